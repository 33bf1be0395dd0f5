#pragma once

// Demand splitting across competing technologies with pairwise-comparison
// (replicator) share dynamics. Technologies linked to a depleting resource
// pay its marginal cost; a backstop pays only its fixed offset.

#include "depletion/inverse.hpp"

#include <optional>
#include <string>
#include <vector>

namespace depletion {

struct Technology {
    std::string name;
    std::optional<std::size_t> resource;  // index into the coupled resources; nullopt for a backstop
    double intensity = 1.0;               // EJ resource per EJ service
    double offset = 0.0;                  // $/GJ service

    void validate() const;
};

struct ShareState {
    std::vector<double> shares;
    double turnover = 0.1;  // 1/tau, per year

    void validate() const;
};

/// intensity * marginal_cost + offset; the offset alone for a backstop.
double service_cost(const Technology& tech, double marginal_cost);

/// Advances dS_i/dt = S_i sum_j S_j turnover (sigma(c_j - c_i) - 1/2) over dt,
/// sub-stepping so no share moves by more than 0.2 per sub-step, then clips
/// and renormalises.
ShareState step_shares(const ShareState& state, const std::vector<double>& costs, double dt,
                       double preference_width = 1.0);

struct CoupledResource {
    std::string name;
    CostDistribution endowment;
    double nu0;
    ExtractionProbability f;
};

struct CoupledSettings {
    double preference_width = 1.0;  // $/GJ
    InversionSettings inversion;
};

struct CoupledResult {
    std::vector<TimeSeries> prices;       // per resource, $/GJ
    std::vector<TimeSeries> demand;       // per resource, EJ/y implied by the shares
    std::vector<TimeSeries> delivered;    // per resource, EJ/y
    std::vector<TimeSeries> unmet;        // per resource, EJ/y
    std::vector<std::vector<bool>> diverged;  // per resource, per step
    std::vector<TimeSeries> shares;       // per technology, at the start of each step
    std::vector<TimeSeries> costs;        // per technology service cost
    std::vector<TimeSeries> remaining;    // per resource, total after k steps (k = 0..N)
    std::vector<DepletionState> final_states;
};

/// Each step splits total service demand by shares, inverts each resource for
/// its marginal cost, prices every technology, then updates the shares.
CoupledResult run_coupled(const std::vector<CoupledResource>& resources, const std::vector<Technology>& technologies,
                          const TimeSeries& total_demand, const ShareState& initial, const CoupledSettings& settings = {});

}  // namespace depletion
