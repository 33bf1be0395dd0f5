#pragma once

// Estimating nu0 from reserve-to-production (R/P) history.
//
// The inverse of nu0 is the global R/P ratio. Aggregation to a region set is
// always a ratio of sums; per-region ratios are not averaged.

#include "depletion/kinetics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace depletion {

struct YearRange {
    int first;
    int last;  // inclusive
};

/// Rectangular reserves/production table over consecutive years.
class RpSeries {
public:
    /// reserves[r][k], production[r][k] for region r and year years[k].
    RpSeries(std::vector<int> years, std::vector<std::string> regions, std::vector<std::vector<double>> reserves,
             std::vector<std::vector<double>> production);

    const std::vector<int>& years() const { return years_; }
    const std::vector<std::string>& regions() const { return regions_; }
    const std::vector<std::vector<double>>& reserves() const { return reserves_; }
    const std::vector<std::vector<double>>& production() const { return production_; }

    std::size_t region_index(std::string_view name) const;

private:
    std::vector<int> years_;
    std::vector<std::string> regions_;
    std::vector<std::vector<double>> reserves_;
    std::vector<std::vector<double>> production_;
};

struct Nu0Estimate {
    double inverse_mean;  // years
    double inverse_std;   // years
    std::optional<YearRange> window;

    double nu0() const { return 1.0 / inverse_mean; }
};

/// Region subset; std::nullopt aggregates every region.
using RegionScope = std::optional<std::vector<std::string>>;

/// Per-region quantities (per year) removed from reserves.
using ReserveAdjustments = std::map<std::string, std::vector<double>>;

/// R/P in years, one value per year, t0 = first year, dt = 1.
TimeSeries rp_ratio(const RpSeries& series, const RegionScope& scope = std::nullopt);

/// Mean and sample standard deviation of the ratio over an inclusive window.
Nu0Estimate estimate_nu0(const TimeSeries& ratios, YearRange window);

/// Removes a reserve category (e.g. unconventional oil) year by year.
RpSeries exclude_category(const RpSeries& series, const ReserveAdjustments& adjustments);

/// Long-format `year,region,reserves,production`; quantities multiplied by
/// `to_ej` on ingestion. Errors carry the source line.
RpSeries parse_rp_csv(const std::string& text, double to_ej = 1.0);
RpSeries read_rp_csv(const std::filesystem::path& path, double to_ej = 1.0);

/// Shipped nu0^-1 values for oil, gas, coal and uranium.
std::optional<Nu0Estimate> default_nu0(std::string_view resource);
const std::map<std::string, Nu0Estimate, std::less<>>& default_nu0_table();

}  // namespace depletion
