#include "depletion/inverse.hpp"

#include "depletion/csv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace depletion {

namespace {

constexpr int kFloorExtensions = 64;

DepletionState idle(const DepletionState& s, double dt) {
    return DepletionState(s.remaining(), s.nu0(), s.time() + dt, s.extracted());
}

InversionOutcome settle(const DepletionState& s, const ExtractionProbability& f, double price, double dt) {
    auto [next, extracted] = step(s, f, price, dt);
    return {price, std::move(next), extracted / dt, std::nullopt};
}

}  // namespace

double InversionSettings::price_ceiling(const DepletionState& s) const {
    return p_max ? *p_max : 10.0 * s.remaining().grid().back();
}

void InversionSettings::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("inversion tolerance must be > 0");
    if (p_max && !(*p_max > 0.0 && std::isfinite(*p_max))) throw ValidationError("p_max must be finite and > 0");
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
}

double price_floor(const DepletionState& s, const ExtractionProbability& f) {
    return s.remaining().grid().front() - 6.0 * f.support_scale();
}

InversionOutcome invert_step(const DepletionState& s, const ExtractionProbability& f, double demand, double dt,
                             const InversionSettings& cfg) {
    cfg.validate();
    f.validate();
    if (!(demand >= 0.0 && std::isfinite(demand))) throw DomainError("demand must be finite and >= 0");
    if (!(dt > 0.0)) throw DomainError("step length must be > 0");

    double lo = price_floor(s, f);
    const double hi_limit = cfg.price_ceiling(s);
    if (!(hi_limit > lo)) throw ValidationError("p_max must exceed the price floor");

    if (demand == 0.0) return {lo, idle(s, dt), 0.0, std::nullopt};

    const double tol = cfg.tolerance * demand;
    const auto flow = [&](double p) { return step_average_flow(s, f, p, dt); };

    if (flow(hi_limit) < demand - tol) {
        auto out = settle(s, f, hi_limit, dt);
        const double capacity = instantaneous_flow(s, f, hi_limit);
        out.divergence = Divergence{capacity, std::max(0.0, demand - capacity)};
        return out;
    }

    // Smooth f leaks a little flow below the floor; widen until the bracket holds.
    for (int k = 0; k < kFloorExtensions && flow(lo) > demand + tol; ++k) lo -= 6.0 * f.support_scale() * (1 << std::min(k, 20));
    if (flow(lo) >= demand - tol) return settle(s, f, lo, dt);

    double hi = hi_limit;
    if (std::abs(flow(hi) - demand) <= tol) return settle(s, f, hi, dt);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = flow(mid);
        if (std::abs(g - demand) <= tol) return settle(s, f, mid, dt);
        (g < demand ? lo : hi) = mid;
    }
    throw NumericalError("price inversion did not converge within " + std::to_string(cfg.max_iterations) +
                         " iterations (demand " + csv::format_number(demand) + " EJ/y, bracket [" +
                         csv::format_number(lo) + ", " + csv::format_number(hi) + "])");
}

ReverseResult run_reverse(const DepletionState& initial, const ExtractionProbability& f, const TimeSeries& demand,
                          const InversionSettings& cfg, const SnapshotOptions& options) {
    demand.validate();
    for (std::size_t k = 0; k < demand.size(); ++k) {
        if (demand[k] < 0.0) throw ValidationError("demand at step " + std::to_string(k) + " is negative");
    }
    ReverseResult result{TimeSeries{demand.t0, demand.dt, {}}, TimeSeries{demand.t0, demand.dt, {}},
                         TimeSeries{demand.t0, demand.dt, {}}, {}, std::nullopt, {}, initial};
    if (options.snapshot_every > 0) result.snapshots.push_back(initial);
    for (std::size_t k = 0; k < demand.size(); ++k) {
        auto out = invert_step(result.final_state, f, demand[k], demand.dt, cfg);
        const bool diverged = out.divergence.has_value();
        result.prices.values.push_back(out.price);
        result.flows_delivered.values.push_back(out.delivered);
        result.unmet_demand.values.push_back(diverged ? demand[k] - out.delivered : 0.0);
        result.diverged.push_back(diverged);
        if (diverged && !result.diverged_at) result.diverged_at = k;
        result.final_state = std::move(out.state);
        if (options.snapshot_every > 0 && (k + 1) % options.snapshot_every == 0) result.snapshots.push_back(result.final_state);
    }
    return result;
}

}  // namespace depletion
