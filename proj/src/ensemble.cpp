#include "depletion/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace depletion {

FractionSampler uniform_fraction() {
    return [](std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
}

FractionSampler fixed_fraction(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("fixed fraction must lie in [0, 1]");
    return [x](std::mt19937_64&) { return x; };
}

RunOutput run_single(const CostDistribution& endowment, const RunInputs& inputs, RunMode mode) {
    const DepletionState initial(endowment, inputs.nu0, inputs.path.t0);
    if (mode == RunMode::forward) {
        auto run = run_forward(initial, inputs.f, inputs.path);
        return {std::move(run.flows), std::vector<bool>(inputs.path.size(), false), std::move(run.final_state)};
    }
    auto rev = run_reverse(initial, inputs.f, inputs.path, inputs.inversion);
    return {std::move(rev.prices), std::move(rev.diverged), std::move(rev.final_state)};
}

void EnsembleSpec::validate() const {
    if (runs < 1) throw ValidationError("ensemble needs at least one run");
    if (!sampling) throw ValidationError("ensemble sampling law is empty");
    if (percentiles.empty()) throw ValidationError("ensemble needs at least one percentile");
    for (std::size_t i = 0; i < percentiles.size(); ++i) {
        if (!(percentiles[i] > 0.0 && percentiles[i] < 1.0))
            throw ValidationError("percentiles must lie strictly inside (0, 1)");
        if (i > 0 && !(percentiles[i] > percentiles[i - 1]))
            throw ValidationError("percentiles must be strictly increasing");
    }
}

std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double percentile_of_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DomainError("percentile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

EnsembleResult run_ensemble(const UncertainEndowment& endowment, const EnsembleSpec& spec, const RunInputs& inputs) {
    spec.validate();
    inputs.path.validate();

    std::vector<double> fractions(spec.runs);
    for (std::size_t i = 0; i < spec.runs; ++i) {
        auto rng = run_stream(spec.seed, i);
        fractions[i] = spec.sampling(rng);
        if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) throw DomainError("sampled fraction outside [0, 1]");
    }

    std::vector<RunOutput> outputs;
    outputs.reserve(spec.runs);
    for (std::size_t i = 0; i < spec.runs; ++i) outputs.push_back({{}, {}, DepletionState(endowment.low(), inputs.nu0)});

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(spec.threads ? spec.threads : hw, spec.runs));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < spec.runs; i = next++) {
            try {
                outputs[i] = run_single(sample_endowment(endowment, fractions[i]), inputs, spec.mode);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t steps = inputs.path.size();
    EnsembleResult result{spec.mode, spec.percentiles, {}, std::vector<double>(steps, 0.0), {}, {}, fractions};
    for (std::size_t j = 0; j < spec.percentiles.size(); ++j)
        result.bands.push_back(TimeSeries{inputs.path.t0, inputs.path.dt, std::vector<double>(steps)});

    std::vector<double> column(spec.runs);
    for (std::size_t k = 0; k < steps; ++k) {
        std::size_t diverged = 0;
        for (std::size_t i = 0; i < spec.runs; ++i) {
            column[i] = outputs[i].series[k];
            diverged += outputs[i].diverged[k] ? 1 : 0;
        }
        std::sort(column.begin(), column.end());
        for (std::size_t j = 0; j < spec.percentiles.size(); ++j)
            result.bands[j].values[k] = percentile_of_sorted(column, spec.percentiles[j]);
        result.divergence_fraction[k] = static_cast<double>(diverged) / static_cast<double>(spec.runs);
    }

    result.low_run = run_single(endowment.low(), inputs, spec.mode).series;
    result.high_run = run_single(endowment.high(), inputs, spec.mode).series;
    return result;
}

std::vector<SweepPoint> sensitivity_sweep(const CostDistribution& endowment, const std::vector<double>& nu0_values,
                                          const RunInputs& inputs, RunMode mode) {
    if (nu0_values.empty()) throw ValidationError("sensitivity sweep needs at least one nu0 value");
    std::vector<SweepPoint> points;
    points.reserve(nu0_values.size());
    for (double nu0 : nu0_values) {
        if (!(nu0 > 0.0)) throw ValidationError("sensitivity nu0 values must be > 0");
        RunInputs varied = inputs;
        varied.nu0 = nu0;
        points.push_back({nu0, run_single(endowment, varied, mode)});
    }
    return points;
}

Peak peak_of(const TimeSeries& series) {
    if (series.empty()) throw DomainError("peak of an empty series");
    const auto it = std::max_element(series.values.begin(), series.values.end());
    const auto k = static_cast<std::size_t>(std::distance(series.values.begin(), it));
    return {series.time_at(k), *it};
}

double mean_of(const TimeSeries& series) {
    if (series.empty()) throw DomainError("mean of an empty series");
    double sum = 0.0;
    for (double v : series.values) sum += v;
    return sum / static_cast<double>(series.size());
}

}  // namespace depletion
