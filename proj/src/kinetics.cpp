#include "depletion/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace depletion {

namespace {

// Fraction of bin [lo, hi) lying below the price.
double covered_fraction(double lo, double hi, double price) {
    if (price <= lo) return 0.0;
    if (price >= hi) return 1.0;
    return (price - lo) / (hi - lo);
}

}  // namespace

ExtractionProbability ExtractionProbability::logistic(double width) {
    ExtractionProbability f{ProbabilityKind::logistic, width};
    f.validate();
    return f;
}

ExtractionProbability ExtractionProbability::erf(double width) {
    ExtractionProbability f{ProbabilityKind::erf, width};
    f.validate();
    return f;
}

ExtractionProbability ExtractionProbability::erf_from_components(double cost_sigma, double price_sigma) {
    return erf(std::hypot(cost_sigma, price_sigma));
}

void ExtractionProbability::validate() const {
    if (kind != ProbabilityKind::sharp && !(width > 0.0 && std::isfinite(width)))
        throw ValidationError("smooth extraction probability needs a finite width > 0");
}

double ExtractionProbability::operator()(double margin) const {
    switch (kind) {
        case ProbabilityKind::sharp:
            return margin >= 0.0 ? 1.0 : 0.0;
        case ProbabilityKind::logistic:
            return 1.0 / (1.0 + std::exp(-margin / width));
        case ProbabilityKind::erf:
            return 0.5 * std::erfc(-margin / (width * std::numbers::sqrt2));
    }
    return 0.0;
}

void TimeSeries::validate() const {
    if (!(dt > 0.0 && std::isfinite(dt))) throw ValidationError("time series step must be finite and > 0");
    if (!std::isfinite(t0)) throw ValidationError("time series start must be finite");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k]))
            throw ValidationError("time series value at step " + std::to_string(k) + " is not finite");
    }
}

DepletionState::DepletionState(CostDistribution remaining, double nu0, double time, double extracted)
    : remaining_(std::move(remaining)), nu0_(nu0), time_(time), extracted_(extracted) {
    if (!(nu0_ > 0.0 && std::isfinite(nu0_))) throw ValidationError("nu0 must be finite and > 0");
}

double probability(const ExtractionProbability& f, double price, double cost) { return f(price - cost); }

double reserves(const DepletionState& s, const ExtractionProbability& f, double price) {
    const auto& d = s.remaining();
    const auto& g = d.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        const double weight = f.kind == ProbabilityKind::sharp ? covered_fraction(g.lower(i), g.upper(i), price)
                                                               : f(price - g.midpoint(i));
        sum += d.bin_quantity(i) * weight;
    }
    return sum;
}

double instantaneous_flow(const DepletionState& s, const ExtractionProbability& f, double price) {
    return s.nu0() * reserves(s, f, price);
}

double step_average_flow(const DepletionState& s, const ExtractionProbability& f, double price, double dt) {
    const auto& d = s.remaining();
    const auto& g = d.grid();
    double removed = 0.0;
    if (f.kind == ProbabilityKind::sharp) {
        const double loss = -std::expm1(-s.nu0() * dt);
        for (std::size_t i = 0; i < d.bin_count(); ++i)
            removed += d.bin_quantity(i) * covered_fraction(g.lower(i), g.upper(i), price);
        removed *= loss;
    } else {
        for (std::size_t i = 0; i < d.bin_count(); ++i)
            removed += d.bin_quantity(i) * -std::expm1(-s.nu0() * f(price - g.midpoint(i)) * dt);
    }
    return removed / dt;
}

StepResult step(const DepletionState& s, const ExtractionProbability& f, double price, double dt) {
    if (!(dt > 0.0)) throw DomainError("step length must be > 0");
    const CostDistribution before =
        f.kind == ProbabilityKind::sharp ? s.remaining().split_at(price) : s.remaining();
    const auto& g = before.grid();
    const auto density = before.density();

    std::vector<double> next(density.begin(), density.end());
    if (f.kind == ProbabilityKind::sharp) {
        const double retention = std::exp(-s.nu0() * dt);
        for (std::size_t i = 0; i < next.size(); ++i)
            if (g.midpoint(i) < price) next[i] *= retention;
    } else {
        for (std::size_t i = 0; i < next.size(); ++i) next[i] *= std::exp(-s.nu0() * f(price - g.midpoint(i)) * dt);
    }

    CostDistribution after = before.with_density(std::move(next));
    const double extracted = total_quantity(before) - total_quantity(after);
    return {DepletionState(std::move(after), s.nu0(), s.time() + dt, s.extracted() + extracted), extracted};
}

ForwardRun run_forward(const DepletionState& initial, const ExtractionProbability& f, const TimeSeries& prices,
                       const SnapshotOptions& options) {
    f.validate();
    prices.validate();
    ForwardRun run{TimeSeries{prices.t0, prices.dt, {}}, {}, initial};
    run.flows.values.reserve(prices.size());
    if (options.snapshot_every > 0) run.snapshots.push_back(initial);

    for (std::size_t k = 0; k < prices.size(); ++k) {
        auto [next, extracted] = step(run.final_state, f, prices[k], prices.dt);
        run.flows.values.push_back(extracted / prices.dt);
        run.final_state = std::move(next);
        if (options.snapshot_every > 0 && (k + 1) % options.snapshot_every == 0) run.snapshots.push_back(run.final_state);
    }
    return run;
}

}  // namespace depletion
