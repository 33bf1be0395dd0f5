#pragma once

// Reverse problem: given a rigid demand, find the price whose step-average
// flow meets it. Flow is non-decreasing in price for a fixed state, so each
// step is a bracketed bisection.

#include "depletion/kinetics.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace depletion {

struct InversionSettings {
    double tolerance = 1e-6;       // relative flow tolerance
    std::optional<double> p_max;   // default: 10 x last grid edge
    std::size_t max_iterations = 200;

    double price_ceiling(const DepletionState& s) const;
    void validate() const;
};

/// Demand could not be met even with every resource priced as economical.
struct Divergence {
    double capacity;   // nu0 * reserves(p_max) at step start, EJ/y
    double shortfall;  // demand - capacity, clamped at 0
};

struct InversionOutcome {
    double price;
    DepletionState state;
    double delivered;  // step-average flow, EJ/y
    std::optional<Divergence> divergence;
};

struct ReverseResult {
    TimeSeries prices;
    TimeSeries flows_delivered;
    TimeSeries unmet_demand;
    std::vector<bool> diverged;  // per step
    std::optional<std::size_t> diverged_at;
    std::vector<DepletionState> snapshots;
    DepletionState final_state;
};

/// Lowest price searched: first grid edge less six widths of f.
double price_floor(const DepletionState& s, const ExtractionProbability& f);

/// One reverse step. A divergent step is priced at p_max and delivers what
/// p_max unlocks. Throws NumericalError if bisection fails to converge.
InversionOutcome invert_step(const DepletionState& s, const ExtractionProbability& f, double demand, double dt,
                             const InversionSettings& cfg = {});

/// Runs invert_step over a demand path. Divergence is recorded, never fatal:
/// the run continues at p_max and logs unmet demand.
ReverseResult run_reverse(const DepletionState& initial, const ExtractionProbability& f, const TimeSeries& demand,
                          const InversionSettings& cfg = {}, const SnapshotOptions& options = {});

}  // namespace depletion
