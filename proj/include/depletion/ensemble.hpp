#pragma once

// Monte Carlo bands over resource-assessment uncertainty and nu0 sweeps.

#include "depletion/inverse.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace depletion {

enum class RunMode { forward, reverse };

/// Draws the interpolation fraction x in [0, 1] for one run.
using FractionSampler = std::function<double(std::mt19937_64&)>;

FractionSampler uniform_fraction();
FractionSampler fixed_fraction(double x);

/// Everything a single-resource run needs besides the endowment.
struct RunInputs {
    ExtractionProbability f;
    double nu0;
    TimeSeries path;  // prices (forward) or demand (reverse)
    InversionSettings inversion;
};

/// Flow (forward) or price (reverse) series of one run.
struct RunOutput {
    TimeSeries series;
    std::vector<bool> diverged;  // all false in forward mode
    DepletionState final_state;
};

RunOutput run_single(const CostDistribution& endowment, const RunInputs& inputs, RunMode mode);

struct EnsembleSpec {
    std::size_t runs = 500;
    FractionSampler sampling = uniform_fraction();
    std::uint64_t seed = 0;
    RunMode mode = RunMode::forward;
    std::vector<double> percentiles{0.02, 0.50, 0.98};
    unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it

    void validate() const;
};

struct EnsembleResult {
    RunMode mode;
    std::vector<double> percentiles;
    std::vector<TimeSeries> bands;           // one per percentile
    std::vector<double> divergence_fraction; // per step
    TimeSeries low_run;                      // x = 0 endpoint
    TimeSeries high_run;                     // x = 1 endpoint
    std::vector<double> fractions;           // sampled x by run index
};

/// Generator for run `index`; independent of execution order.
std::mt19937_64 run_stream(std::uint64_t seed, std::uint64_t index);

/// Linear interpolation between order statistics; `sorted` must be ascending.
double percentile_of_sorted(const std::vector<double>& sorted, double p);

EnsembleResult run_ensemble(const UncertainEndowment& endowment, const EnsembleSpec& spec, const RunInputs& inputs);

struct SweepPoint {
    double nu0;
    RunOutput output;
};

/// One full run per nu0 value, all other inputs identical.
std::vector<SweepPoint> sensitivity_sweep(const CostDistribution& endowment, const std::vector<double>& nu0_values,
                                          const RunInputs& inputs, RunMode mode);

struct Peak {
    double time;
    double value;
};

/// First maximum of a series. Requires a non-empty series.
Peak peak_of(const TimeSeries& series);

double mean_of(const TimeSeries& series);

}  // namespace depletion
