#include "depletion/calibration.hpp"

#include "depletion/csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace depletion {

RpSeries::RpSeries(std::vector<int> years, std::vector<std::string> regions, std::vector<std::vector<double>> reserves,
                   std::vector<std::vector<double>> production)
    : years_(std::move(years)), regions_(std::move(regions)), reserves_(std::move(reserves)),
      production_(std::move(production)) {
    if (years_.empty()) throw ValidationError("R/P series has no years");
    if (regions_.empty()) throw ValidationError("R/P series has no regions");
    for (std::size_t k = 1; k < years_.size(); ++k) {
        if (years_[k] != years_[k - 1] + 1)
            throw ValidationError("R/P years must be consecutive; gap after " + std::to_string(years_[k - 1]));
    }
    for (std::size_t r = 1; r < regions_.size(); ++r) {
        if (std::find(regions_.begin(), regions_.begin() + static_cast<std::ptrdiff_t>(r), regions_[r]) !=
            regions_.begin() + static_cast<std::ptrdiff_t>(r))
            throw ValidationError("region '" + regions_[r] + "' listed twice");
    }
    if (reserves_.size() != regions_.size() || production_.size() != regions_.size())
        throw ValidationError("R/P table has a region count mismatch");
    for (std::size_t r = 0; r < regions_.size(); ++r) {
        if (reserves_[r].size() != years_.size() || production_[r].size() != years_.size())
            throw ValidationError("region '" + regions_[r] + "' does not cover every year");
        for (std::size_t k = 0; k < years_.size(); ++k) {
            if (!std::isfinite(reserves_[r][k]) || reserves_[r][k] < 0.0 || !std::isfinite(production_[r][k]) ||
                production_[r][k] < 0.0) {
                throw ValidationError("region '" + regions_[r] + "', year " + std::to_string(years_[k]) +
                                      ": reserves and production must be finite and >= 0");
            }
        }
    }
}

std::size_t RpSeries::region_index(std::string_view name) const {
    const auto it = std::find(regions_.begin(), regions_.end(), name);
    if (it == regions_.end()) throw ValidationError("unknown region '" + std::string(name) + "'");
    return static_cast<std::size_t>(std::distance(regions_.begin(), it));
}

TimeSeries rp_ratio(const RpSeries& series, const RegionScope& scope) {
    std::vector<std::size_t> included;
    if (scope) {
        if (scope->empty()) throw ValidationError("region scope is empty");
        for (const auto& name : *scope) included.push_back(series.region_index(name));
    } else {
        for (std::size_t r = 0; r < series.regions().size(); ++r) included.push_back(r);
    }

    TimeSeries out{static_cast<double>(series.years().front()), 1.0, {}};
    for (std::size_t k = 0; k < series.years().size(); ++k) {
        double reserves = 0.0;
        double production = 0.0;
        for (auto r : included) {
            reserves += series.reserves()[r][k];
            production += series.production()[r][k];
        }
        if (!(production > 0.0))
            throw ValidationError("zero production in year " + std::to_string(series.years()[k]));
        out.values.push_back(reserves / production);
    }
    return out;
}

Nu0Estimate estimate_nu0(const TimeSeries& ratios, YearRange window) {
    const auto span_text = std::to_string(window.first) + "-" + std::to_string(window.last);
    if (window.first > window.last) throw ValidationError("calibration window " + span_text + " is reversed");
    if (ratios.size() > 0 && (window.first < ratios.t0 || window.last > ratios.time_at(ratios.size() - 1)))
        throw ValidationError("calibration window " + span_text + " extends beyond the data");
    std::vector<double> picked;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        const double year = ratios.time_at(k);
        if (year >= window.first && year <= window.last) picked.push_back(ratios[k]);
    }
    if (picked.empty()) {
        throw ValidationError("calibration window " + span_text + " selects no years");
    }
    double mean = 0.0;
    for (double v : picked) mean += v;
    mean /= static_cast<double>(picked.size());
    double ss = 0.0;
    for (double v : picked) ss += (v - mean) * (v - mean);
    const double std_dev = picked.size() > 1 ? std::sqrt(ss / static_cast<double>(picked.size() - 1)) : 0.0;
    if (!(mean > 0.0)) throw ValidationError("mean R/P ratio must be > 0");
    return {mean, std_dev, window};
}

RpSeries exclude_category(const RpSeries& series, const ReserveAdjustments& adjustments) {
    auto reserves = series.reserves();
    for (const auto& [region, values] : adjustments) {
        const auto r = series.region_index(region);
        if (values.size() != series.years().size())
            throw ValidationError("adjustments for '" + region + "' must cover every year");
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (values[k] < 0.0 || values[k] > reserves[r][k]) {
                throw ValidationError("adjustment " + csv::format_number(values[k]) + " for '" + region + "' in " +
                                      std::to_string(series.years()[k]) + " is outside [0, reserves]");
            }
            reserves[r][k] -= values[k];
        }
    }
    return RpSeries(series.years(), series.regions(), std::move(reserves), series.production());
}

RpSeries parse_rp_csv(const std::string& text, double to_ej) {
    static constexpr std::array<std::string_view, 4> kHeader{"year", "region", "reserves", "production"};
    const auto table = csv::parse(text);
    csv::require_header(table, kHeader);
    if (table.rows.empty()) throw ValidationError("R/P CSV has no rows");

    struct Cell {
        double reserves;
        double production;
    };
    std::map<std::pair<int, std::string>, Cell> cells;
    std::set<int> years;
    std::vector<std::string> regions;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        const double year_value = csv::parse_number(row[0], line, kHeader[0]);
        if (year_value != std::floor(year_value))
            throw ValidationError("line " + std::to_string(line) + ": year must be an integer");
        const int year = static_cast<int>(year_value);
        if (row[1].empty()) throw ValidationError("line " + std::to_string(line) + ": empty region");
        const double res = csv::parse_number(row[2], line, kHeader[2]) * to_ej;
        const double prod = csv::parse_number(row[3], line, kHeader[3]) * to_ej;
        if (!cells.emplace(std::pair{year, row[1]}, Cell{res, prod}).second)
            throw ValidationError("line " + std::to_string(line) + ": duplicate row for " + row[1] + " in " + row[0]);
        years.insert(year);
        if (std::find(regions.begin(), regions.end(), row[1]) == regions.end()) regions.push_back(row[1]);
    }

    std::vector<int> year_list(years.begin(), years.end());
    std::vector<std::vector<double>> reserves(regions.size()), production(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r) {
        for (int y : year_list) {
            const auto it = cells.find({y, regions[r]});
            if (it == cells.end())
                throw ValidationError("missing row for region '" + regions[r] + "' in " + std::to_string(y));
            reserves[r].push_back(it->second.reserves);
            production[r].push_back(it->second.production);
        }
    }
    return RpSeries(std::move(year_list), std::move(regions), std::move(reserves), std::move(production));
}

RpSeries read_rp_csv(const std::filesystem::path& path, double to_ej) {
    try {
        return parse_rp_csv(csv::read_file(path), to_ej);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

const std::map<std::string, Nu0Estimate, std::less<>>& default_nu0_table() {
    // Global R/P ratios in years. Gas uses 56 +- 6 (text value; a figure
    // caption elsewhere quotes 54 +- 6).
    static const std::map<std::string, Nu0Estimate, std::less<>> table{
        {"oil", {44.0, 10.0, std::nullopt}},
        {"gas", {56.0, 6.0, std::nullopt}},
        {"coal", {125.0, 50.0, std::nullopt}},
        {"uranium", {16.0, 1.0, std::nullopt}},
    };
    return table;
}

std::optional<Nu0Estimate> default_nu0(std::string_view resource) {
    const auto& table = default_nu0_table();
    const auto it = table.find(resource);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace depletion
