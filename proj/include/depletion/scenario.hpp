#pragma once

// Scenario description: horizon, resources, assumption paths, ensemble and
// substitution settings. A ScenarioConfig is what the user wrote; a Scenario
// is the validated, unit-converted form the runners consume.

#include "depletion/calibration.hpp"
#include "depletion/ensemble.hpp"
#include "depletion/substitution.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace depletion {

/// Carries every problem found, each prefixed with a path-like locator such
/// as `resources.oil.demand`.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct Horizon {
    double start = 0.0;
    double end = 0.0;
    double dt = 1.0;

    /// Number of whole steps; throws ValidationError unless dt divides the span.
    std::size_t steps() const;
};

enum class ScenarioMode { forward, reverse, coupled };

struct LinearPathSpec {
    double start;
    double slope;  // per year
};
using BreakpointPathSpec = std::vector<std::pair<double, double>>;  // (year, value)
using ValuesPathSpec = std::vector<double>;
struct CsvPathSpec {
    std::filesystem::path file;  // `year,value`, one row per step
};

struct PathSpec {
    std::variant<LinearPathSpec, BreakpointPathSpec, ValuesPathSpec, CsvPathSpec> shape;
    std::string unit;  // empty: internal unit
};

struct InlineEndowment {
    std::vector<double> edges;
    std::vector<double> density_low;
    std::vector<double> density_high;
};

struct EndowmentSpec {
    std::variant<std::filesystem::path, InlineEndowment> source;
    std::string energy_unit = "EJ";
    std::string cost_unit = "$/GJ";
};

struct CalibrationRef {
    std::filesystem::path file;
    YearRange window;
    RegionScope scope;
    std::string units = "EJ";
};

struct Nu0Spec {
    std::variant<double, std::string, CalibrationRef> source;  // nu0^-1 in years, default-table key, or R/P data
};

struct ResourceConfig {
    std::string name;
    EndowmentSpec endowment;
    Nu0Spec nu0;
    ExtractionProbability f;
    std::optional<PathSpec> price;
    std::optional<PathSpec> demand;
    double central_fraction = 0.5;
};

struct TechnologyConfig {
    std::string name;
    std::optional<std::string> resource;
    double intensity = 1.0;
    double offset = 0.0;
};

struct CoupledConfig {
    PathSpec total_demand;
    std::vector<TechnologyConfig> technologies;
    std::vector<double> initial_shares;
    double turnover = 0.1;
    double preference_width = 1.0;
};

struct SharedDemandConfig {
    PathSpec total;
    std::vector<std::pair<std::string, double>> shares;
};

struct EnsembleConfig {
    std::size_t runs = 500;
    std::uint64_t seed = 0;
    std::vector<double> percentiles{0.02, 0.50, 0.98};
    std::optional<double> fixed_fraction;  // nullopt: uniform
};

struct ScenarioConfig {
    Horizon horizon;
    ScenarioMode mode = ScenarioMode::forward;
    std::vector<ResourceConfig> resources;
    std::optional<SharedDemandConfig> shared_demand;
    std::optional<CoupledConfig> coupled;
    InversionSettings inversion;
    std::optional<EnsembleConfig> ensemble;
    std::size_t snapshot_every = 1;
    std::filesystem::path base_dir;  // relative file references resolve here
};

struct ResolvedResource {
    std::string name;
    UncertainEndowment endowment;
    Nu0Estimate nu0;
    ExtractionProbability f;
    TimeSeries path;  // price ($/GJ) or demand (EJ/y); empty in coupled mode
    double central_fraction;

    CostDistribution central() const { return sample_endowment(endowment, central_fraction); }
    RunInputs inputs(const InversionSettings& inversion) const { return {f, nu0.nu0(), path, inversion}; }
};

struct ResolvedCoupled {
    std::vector<Technology> technologies;
    TimeSeries total_demand;
    ShareState initial;
    CoupledSettings settings;
};

struct Scenario {
    ScenarioConfig config;
    std::size_t steps;
    std::vector<ResolvedResource> resources;
    std::optional<ResolvedCoupled> coupled;
    std::optional<EnsembleSpec> ensemble;

    RunMode run_mode() const { return config.mode == ScenarioMode::reverse ? RunMode::reverse : RunMode::forward; }
};

/// Parses the JSON scenario schema. Throws ConfigError listing every problem.
ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir);
ScenarioConfig read_scenario(const std::filesystem::path& path);

/// Resolves files, defaults and units and checks cross-references. Throws
/// ConfigError listing every problem found.
Scenario validate(const ScenarioConfig& cfg);

/// value(t) = start + slope (t - t0), sampled at each step start.
TimeSeries linear_path(double start_value, double slope, const Horizon& horizon);

/// Piecewise-linear through (year, value) breakpoints, flat outside them.
TimeSeries piecewise_linear_path(const BreakpointPathSpec& breakpoints, const Horizon& horizon);

/// Splits a total by fixed shares (must sum to 1 within 1e-9).
std::vector<TimeSeries> fixed_share_demand(const TimeSeries& total, const std::vector<double>& shares);

}  // namespace depletion
