#include "depletion/distribution.hpp"

#include "depletion/csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

namespace depletion {

namespace {

std::string at_index(std::size_t i) { return " at index " + std::to_string(i); }

}  // namespace

CostGrid::CostGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw ValidationError("cost grid needs at least 2 edges");
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (!std::isfinite(edges_[i]) || edges_[i] < 0.0)
            throw ValidationError("cost edge must be finite and >= 0" + at_index(i));
        if (i > 0 && !(edges_[i] > edges_[i - 1]))
            throw ValidationError("cost edges must be strictly increasing" + at_index(i));
    }
}

std::size_t CostGrid::locate(double c) const {
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), c);
    return static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
}

CostDistribution::CostDistribution(CostGrid grid, std::vector<double> density)
    : grid_(std::move(grid)), density_(std::move(density)) {
    if (density_.size() != grid_.bin_count()) {
        throw ValidationError("density count " + std::to_string(density_.size()) +
                              " does not match bin count " + std::to_string(grid_.bin_count()));
    }
    for (std::size_t i = 0; i < density_.size(); ++i) {
        if (!std::isfinite(density_[i]) || density_[i] < 0.0)
            throw ValidationError("density must be finite and >= 0" + at_index(i));
    }
    if (!std::isfinite(total_quantity(*this))) throw ValidationError("total quantity is not finite");
}

CostDistribution CostDistribution::split_at(double c) const {
    if (!(c > grid_.front() && c < grid_.back())) return *this;
    const auto bin = grid_.locate(c);
    if (grid_.lower(bin) == c) return *this;
    std::vector<double> edges(grid_.edges().begin(), grid_.edges().end());
    edges.insert(edges.begin() + static_cast<std::ptrdiff_t>(bin) + 1, c);
    std::vector<double> density = density_;
    density.insert(density.begin() + static_cast<std::ptrdiff_t>(bin) + 1, density_[bin]);
    return CostDistribution(CostGrid(std::move(edges)), std::move(density));
}

CostDistribution CostDistribution::with_density(std::vector<double> density) const {
    return CostDistribution(grid_, std::move(density));
}

UncertainEndowment::UncertainEndowment(CostDistribution low, CostDistribution high)
    : low_(std::move(low)), high_(std::move(high)) {
    if (!(low_.grid() == high_.grid())) throw ValidationError("low and high endowments use different grids");
    for (std::size_t i = 0; i < low_.bin_count(); ++i) {
        if (low_.density()[i] > high_.density()[i])
            throw ValidationError("low density exceeds high density" + at_index(i));
    }
}

CostDistribution from_bins(std::vector<double> edges, std::vector<double> densities) {
    return CostDistribution(CostGrid(std::move(edges)), std::move(densities));
}

double total_quantity(const CostDistribution& d) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) total += d.bin_quantity(i);
    return total;
}

double cumulative_below(const CostDistribution& d, double c) {
    const auto& g = d.grid();
    if (c <= g.front()) return 0.0;
    if (c >= g.back()) return total_quantity(d);
    const auto bin = g.locate(c);
    double sum = 0.0;
    for (std::size_t i = 0; i < bin; ++i) sum += d.bin_quantity(i);
    return sum + d.density()[bin] * (c - g.lower(bin));
}

double marginal_cost_at(const CostDistribution& d, double q) {
    const double total = total_quantity(d);
    if (!(q >= 0.0 && q <= total)) {
        throw DomainError("quantity " + csv::format_number(q) + " outside [0, " + csv::format_number(total) + "]");
    }
    const auto& g = d.grid();
    if (q == 0.0) return g.front();
    double cum = 0.0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        const double in_bin = d.bin_quantity(i);
        if (in_bin > 0.0 && q <= cum + in_bin) {
            return std::min(g.upper(i), g.lower(i) + (q - cum) / d.density()[i]);
        }
        cum += in_bin;
    }
    return g.back();  // unreachable for q <= total
}

CostSupplyCurve cost_supply_curve(const CostDistribution& d) {
    CostSupplyCurve curve;
    const auto edges = d.grid().edges();
    curve.costs.assign(edges.begin(), edges.end());
    curve.quantities.reserve(edges.size());
    double cum = 0.0;
    curve.quantities.push_back(cum);
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        cum += d.bin_quantity(i);
        curve.quantities.push_back(cum);
    }
    return curve;
}

CostDistribution sample_endowment(const UncertainEndowment& u, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("interpolation fraction must lie in [0, 1]");
    if (x == 0.0) return u.low();
    if (x == 1.0) return u.high();
    const auto lo = u.low().density();
    const auto hi = u.high().density();
    std::vector<double> density(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) density[i] = lo[i] + x * (hi[i] - lo[i]);
    return u.low().with_density(std::move(density));
}

UncertainEndowment parse_endowment_csv(const std::string& text) {
    static constexpr std::array<std::string_view, 4> kHeader{"cost_low", "cost_high", "density_low", "density_high"};
    const auto table = csv::parse(text);
    csv::require_header(table, kHeader);
    if (table.rows.empty()) throw ValidationError("endowment CSV has no bins");

    std::vector<double> edges;
    std::vector<double> low;
    std::vector<double> high;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.line_numbers[r];
        const double c_lo = csv::parse_number(row[0], line, kHeader[0]);
        const double c_hi = csv::parse_number(row[1], line, kHeader[1]);
        if (r == 0) {
            edges.push_back(c_lo);
        } else if (c_lo != edges.back()) {
            throw ValidationError("line " + std::to_string(line) + ": cost_low " + row[0] +
                                  " does not continue previous cost_high");
        }
        if (!(c_hi > c_lo)) throw ValidationError("line " + std::to_string(line) + ": cost_high must exceed cost_low");
        edges.push_back(c_hi);
        low.push_back(csv::parse_number(row[2], line, kHeader[2]));
        high.push_back(csv::parse_number(row[3], line, kHeader[3]));
    }
    try {
        CostGrid grid(std::move(edges));
        return UncertainEndowment(CostDistribution(grid, std::move(low)), CostDistribution(grid, std::move(high)));
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("endowment CSV: ") + e.what());
    }
}

UncertainEndowment read_endowment_csv(const std::filesystem::path& path) {
    try {
        return parse_endowment_csv(csv::read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string format_endowment_csv(const UncertainEndowment& u) {
    csv::Writer w({"cost_low", "cost_high", "density_low", "density_high"});
    const auto& g = u.low().grid();
    for (std::size_t i = 0; i < g.bin_count(); ++i) {
        const std::array<double, 4> row{g.lower(i), g.upper(i), u.low().density()[i], u.high().density()[i]};
        w.add_row(row);
    }
    return w.str();
}

}  // namespace depletion
