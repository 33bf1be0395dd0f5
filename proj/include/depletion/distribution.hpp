#pragma once

// Cost-distributed resource endowments.
//
// A resource endowment is stored as a piecewise-constant density n(C) over a
// contiguous grid of cost bins. Units are fixed throughout the library:
// energy in EJ, cost in $/GJ, density in EJ per ($/GJ).

#include "depletion/errors.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace depletion {

/// Strictly increasing, finite, non-negative bin edges.
class CostGrid {
public:
    explicit CostGrid(std::vector<double> edges);

    std::span<const double> edges() const { return edges_; }
    std::size_t bin_count() const { return edges_.size() - 1; }
    double lower(std::size_t bin) const { return edges_[bin]; }
    double upper(std::size_t bin) const { return edges_[bin + 1]; }
    double width(std::size_t bin) const { return edges_[bin + 1] - edges_[bin]; }
    double midpoint(std::size_t bin) const { return 0.5 * (edges_[bin] + edges_[bin + 1]); }
    double front() const { return edges_.front(); }
    double back() const { return edges_.back(); }

    /// Index of the bin containing c (lower edge inclusive); requires front() <= c < back().
    std::size_t locate(double c) const;

    bool operator==(const CostGrid&) const = default;

private:
    std::vector<double> edges_;
};

class CostDistribution {
public:
    CostDistribution(CostGrid grid, std::vector<double> density);

    const CostGrid& grid() const { return grid_; }
    std::span<const double> density() const { return density_; }
    std::size_t bin_count() const { return density_.size(); }

    /// Quantity held in one bin (EJ).
    double bin_quantity(std::size_t bin) const { return density_[bin] * grid_.width(bin); }

    /// Same distribution with an extra edge at c. Returns *this unchanged when c
    /// is outside the grid interior or already an edge.
    CostDistribution split_at(double c) const;

    /// Same grid, replaced densities (validated).
    CostDistribution with_density(std::vector<double> density) const;

private:
    CostGrid grid_;
    std::vector<double> density_;
};

/// Resource-assessment uncertainty range: two distributions on one grid with
/// low <= high bin by bin.
class UncertainEndowment {
public:
    UncertainEndowment(CostDistribution low, CostDistribution high);

    /// Degenerate range with no uncertainty.
    static UncertainEndowment exact(const CostDistribution& d) { return {d, d}; }

    const CostDistribution& low() const { return low_; }
    const CostDistribution& high() const { return high_; }

private:
    CostDistribution low_;
    CostDistribution high_;
};

/// Cumulative quantity N(C) tabulated at each grid edge.
struct CostSupplyCurve {
    std::vector<double> costs;
    std::vector<double> quantities;
};

CostDistribution from_bins(std::vector<double> edges, std::vector<double> densities);

double total_quantity(const CostDistribution& d);

/// N(c): quantity available below cost c, linear inside a partially covered bin.
double cumulative_below(const CostDistribution& d, double c);

/// C(N): inverse of cumulative_below. Throws DomainError for q outside [0, total].
double marginal_cost_at(const CostDistribution& d, double q);

CostSupplyCurve cost_supply_curve(const CostDistribution& d);

/// Per-bin interpolation low + x (high - low), x in [0, 1].
CostDistribution sample_endowment(const UncertainEndowment& u, double x);

/// Reads `cost_low,cost_high,density_low,density_high` rows. Errors carry the
/// 1-based line number.
UncertainEndowment read_endowment_csv(const std::filesystem::path& path);
UncertainEndowment parse_endowment_csv(const std::string& text);

/// Writes the same schema; a single distribution repeats its densities.
std::string format_endowment_csv(const UncertainEndowment& u);

}  // namespace depletion
