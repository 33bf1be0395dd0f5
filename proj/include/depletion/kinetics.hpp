#pragma once

// Depletion kinetics of a cost-distributed stock resource.
//
// The remaining distribution n(C,t) decays in every cost bin at rate
// nu0 * f(P - C), where f is the probability that resources at cost C are
// economical at price P. Over a step of constant price the decay is exactly
// exponential, which is what step() applies; the commodity flow is the mass
// removed per unit time.

#include "depletion/distribution.hpp"

#include <cstddef>
#include <vector>

namespace depletion {

enum class ProbabilityKind { sharp, logistic, erf };

/// Step-like extraction probability f(P - C).
struct ExtractionProbability {
    ProbabilityKind kind = ProbabilityKind::logistic;
    double width = 0.5;  // $/GJ; ignored for sharp

    static ExtractionProbability sharp() { return {ProbabilityKind::sharp, 0.0}; }
    static ExtractionProbability logistic(double width);
    static ExtractionProbability erf(double width);

    /// Error-function step from normally distributed cost and price
    /// uncertainties; the widths add in quadrature.
    static ExtractionProbability erf_from_components(double cost_sigma, double price_sigma);

    /// f(margin) with margin = P - C.
    double operator()(double margin) const;

    /// Width of the region where f is neither 0 nor 1 in practice (0 for sharp).
    double support_scale() const { return kind == ProbabilityKind::sharp ? 0.0 : width; }

    void validate() const;
};

/// Uniformly stepped series: value k belongs to time t0 + k*dt.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double time_at(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double operator[](std::size_t k) const { return values[k]; }

    void validate() const;
};

class DepletionState {
public:
    DepletionState(CostDistribution remaining, double nu0, double time = 0.0, double extracted = 0.0);

    const CostDistribution& remaining() const { return remaining_; }
    double nu0() const { return nu0_; }
    double time() const { return time_; }
    double extracted() const { return extracted_; }

    /// extracted + remaining total, constant over any run up to roundoff.
    double ledger_total() const { return extracted_ + total_quantity(remaining_); }

    DepletionState with_nu0(double nu0) const { return {remaining_, nu0, time_, extracted_}; }

private:
    CostDistribution remaining_;
    double nu0_;
    double time_;
    double extracted_;
};

struct StepResult {
    DepletionState state;
    double extracted;  // EJ removed during the step
};

struct SnapshotOptions {
    /// Record the initial state and then every N-th step; 0 keeps none.
    std::size_t snapshot_every = 0;
};

struct ForwardRun {
    TimeSeries flows;  // step-average flow, EJ/y
    std::vector<DepletionState> snapshots;
    DepletionState final_state;
};

double probability(const ExtractionProbability& f, double price, double cost);

/// Cost-distributed reserves: integral of n(C,t) f(P - C) dC. Sharp f is
/// integrated exactly over partially covered bins; smooth kinds use the bin
/// midpoint.
double reserves(const DepletionState& s, const ExtractionProbability& f, double price);

/// F = nu0 * reserves.
double instantaneous_flow(const DepletionState& s, const ExtractionProbability& f, double price);

/// Mass that step(s, f, price, dt) would remove, divided by dt, without
/// building the new state. Non-decreasing in price.
double step_average_flow(const DepletionState& s, const ExtractionProbability& f, double price, double dt);

/// Exact constant-price update n_i <- n_i exp(-nu0 f(P - C_i) dt). With sharp
/// f a bin straddling the price is first split at the price, so each bin is
/// either fully inside or fully outside the reserves.
StepResult step(const DepletionState& s, const ExtractionProbability& f, double price, double dt);

/// Forward problem: price path in, flow path out. Step k uses prices[k].
ForwardRun run_forward(const DepletionState& initial, const ExtractionProbability& f, const TimeSeries& prices,
                       const SnapshotOptions& options = {});

}  // namespace depletion
