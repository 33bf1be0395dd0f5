#include "depletion/scenario.hpp"

#include "depletion/csv.hpp"
#include "depletion/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace depletion {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& errors) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    return msg;
}

// Collects problems while walking the JSON tree so one pass reports them all.
class JsonReader {
public:
    explicit JsonReader(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }

    const json* object_at(const json& parent, const std::string& key, const std::string& where, bool required) {
        if (!parent.contains(key)) {
            if (required) fail(where, "missing required section '" + key + "'");
            return nullptr;
        }
        const auto& j = parent.at(key);
        if (!j.is_object()) {
            fail(join(where, key), "expected an object");
            return nullptr;
        }
        return &j;
    }

    std::optional<double> number(const json& parent, const std::string& key, const std::string& where,
                                 bool required = true) {
        if (!parent.contains(key)) {
            if (required) fail(where, "missing required number '" + key + "'");
            return std::nullopt;
        }
        const auto& j = parent.at(key);
        if (!j.is_number()) {
            fail(join(where, key), "expected a number");
            return std::nullopt;
        }
        return j.get<double>();
    }

    std::optional<std::string> string(const json& parent, const std::string& key, const std::string& where,
                                      bool required = true) {
        if (!parent.contains(key)) {
            if (required) fail(where, "missing required string '" + key + "'");
            return std::nullopt;
        }
        const auto& j = parent.at(key);
        if (!j.is_string()) {
            fail(join(where, key), "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& j, const std::string& where) {
        if (!j.is_array()) {
            fail(where, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& v : j) {
            if (!v.is_number()) {
                fail(where, "expected an array of numbers");
                return std::nullopt;
            }
            out.push_back(v.get<double>());
        }
        return out;
    }

    static std::string join(const std::string& where, const std::string& key) {
        return where.empty() ? key : where + "." + key;
    }

private:
    std::vector<std::string>& errors_;
};

std::optional<PathSpec> parse_path(JsonReader& in, const json& j, const std::string& where) {
    if (!j.is_object()) {
        in.fail(where, "expected an object with one of linear, breakpoints, values, csv");
        return std::nullopt;
    }
    PathSpec spec;
    if (j.contains("unit")) {
        if (auto unit = in.string(j, "unit", where)) spec.unit = *unit;
    }
    int shapes = 0;
    bool ok = true;
    if (const auto* lin = in.object_at(j, "linear", where, false)) {
        ++shapes;
        const auto lw = JsonReader::join(where, "linear");
        auto start = in.number(*lin, "start", lw);
        auto slope = in.number(*lin, "slope", lw);
        if (start && slope) spec.shape = LinearPathSpec{*start, *slope};
        else ok = false;
    }
    if (j.contains("breakpoints")) {
        ++shapes;
        const auto bw = JsonReader::join(where, "breakpoints");
        BreakpointPathSpec points;
        const auto& arr = j.at("breakpoints");
        if (!arr.is_array() || arr.empty()) {
            in.fail(bw, "expected a non-empty array of [year, value] pairs");
            ok = false;
        } else {
            for (const auto& p : arr) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                    in.fail(bw, "expected [year, value] pairs");
                    ok = false;
                    break;
                }
                points.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            for (std::size_t i = 1; ok && i < points.size(); ++i) {
                if (!(points[i].first > points[i - 1].first)) {
                    in.fail(bw, "breakpoint years must be strictly increasing");
                    ok = false;
                }
            }
        }
        if (ok) spec.shape = std::move(points);
    }
    if (j.contains("values")) {
        ++shapes;
        if (auto values = in.numbers(j.at("values"), JsonReader::join(where, "values"))) spec.shape = std::move(*values);
        else ok = false;
    }
    if (j.contains("csv")) {
        ++shapes;
        if (auto file = in.string(j, "csv", where)) spec.shape = CsvPathSpec{*file};
        else ok = false;
    }
    if (shapes != 1) {
        in.fail(where, "expected exactly one of linear, breakpoints, values, csv");
        return std::nullopt;
    }
    if (!ok) return std::nullopt;
    return spec;
}

std::optional<EndowmentSpec> parse_endowment(JsonReader& in, const json& j, const std::string& where) {
    EndowmentSpec spec;
    if (j.is_string()) {
        spec.source = std::filesystem::path(j.get<std::string>());
        return spec;
    }
    if (!j.is_object()) {
        in.fail(where, "expected a CSV path or an object");
        return std::nullopt;
    }
    if (auto e = in.string(j, "energy_unit", where, false)) spec.energy_unit = *e;
    if (auto c = in.string(j, "cost_unit", where, false)) spec.cost_unit = *c;
    if (j.contains("csv")) {
        if (auto file = in.string(j, "csv", where)) spec.source = std::filesystem::path(*file);
        else return std::nullopt;
        return spec;
    }
    if (!j.contains("edges")) {
        in.fail(where, "expected 'csv' or 'edges' with densities");
        return std::nullopt;
    }
    InlineEndowment inline_spec;
    auto edges = in.numbers(j.at("edges"), JsonReader::join(where, "edges"));
    if (!edges) return std::nullopt;
    inline_spec.edges = std::move(*edges);
    if (j.contains("density")) {
        auto d = in.numbers(j.at("density"), JsonReader::join(where, "density"));
        if (!d) return std::nullopt;
        inline_spec.density_low = *d;
        inline_spec.density_high = std::move(*d);
    } else if (j.contains("density_low") && j.contains("density_high")) {
        auto lo = in.numbers(j.at("density_low"), JsonReader::join(where, "density_low"));
        auto hi = in.numbers(j.at("density_high"), JsonReader::join(where, "density_high"));
        if (!lo || !hi) return std::nullopt;
        inline_spec.density_low = std::move(*lo);
        inline_spec.density_high = std::move(*hi);
    } else {
        in.fail(where, "expected 'density' or both 'density_low' and 'density_high'");
        return std::nullopt;
    }
    spec.source = std::move(inline_spec);
    return spec;
}

std::optional<Nu0Spec> parse_nu0(JsonReader& in, const json& j, const std::string& where) {
    std::vector<std::string> present;
    for (const char* key : {"nu0", "nu0_inverse", "nu0_default", "nu0_calibration"})
        if (j.contains(key)) present.emplace_back(key);
    if (present.size() != 1) {
        in.fail(where, "expected exactly one of nu0, nu0_inverse, nu0_default, nu0_calibration");
        return std::nullopt;
    }
    const auto& key = present.front();
    if (key == "nu0") {
        auto v = in.number(j, key, where);
        if (!v) return std::nullopt;
        if (!(*v > 0.0)) {
            in.fail(JsonReader::join(where, key), "nu0 must be > 0");
            return std::nullopt;
        }
        return Nu0Spec{1.0 / *v};
    }
    if (key == "nu0_inverse") {
        auto v = in.number(j, key, where);
        if (!v) return std::nullopt;
        return Nu0Spec{*v};
    }
    if (key == "nu0_default") {
        auto v = in.string(j, key, where);
        if (!v) return std::nullopt;
        return Nu0Spec{*v};
    }
    const auto cw = JsonReader::join(where, key);
    const auto* cal = in.object_at(j, key, where, true);
    if (!cal) return std::nullopt;
    CalibrationRef ref;
    auto file = in.string(*cal, "csv", cw);
    if (file) ref.file = *file;
    bool ok = file.has_value();
    if (!cal->contains("window")) {
        in.fail(cw, "missing required 'window' [first, last]");
        ok = false;
    } else {
        auto w = in.numbers(cal->at("window"), JsonReader::join(cw, "window"));
        if (w && w->size() == 2) {
            ref.window = {static_cast<int>((*w)[0]), static_cast<int>((*w)[1])};
        } else {
            if (w) in.fail(JsonReader::join(cw, "window"), "expected [first, last]");
            ok = false;
        }
    }
    if (cal->contains("scope")) {
        const auto& s = cal->at("scope");
        if (s.is_string() && s.get<std::string>() == "global") {
            ref.scope = std::nullopt;
        } else if (s.is_array()) {
            std::vector<std::string> regions;
            for (const auto& r : s) {
                if (r.is_string()) regions.push_back(r.get<std::string>());
                else ok = false;
            }
            ref.scope = std::move(regions);
        } else {
            in.fail(JsonReader::join(cw, "scope"), "expected \"global\" or an array of region names");
            ok = false;
        }
    }
    if (auto u = in.string(*cal, "units", cw, false)) ref.units = *u;
    if (!ok) return std::nullopt;
    return Nu0Spec{std::move(ref)};
}

std::optional<ExtractionProbability> parse_extraction(JsonReader& in, const json& j, const std::string& where) {
    ExtractionProbability f;
    if (!j.is_object()) {
        in.fail(where, "expected an object");
        return std::nullopt;
    }
    if (auto kind = in.string(j, "kind", where, false)) {
        if (*kind == "sharp") f = ExtractionProbability::sharp();
        else if (*kind == "logistic") f.kind = ProbabilityKind::logistic;
        else if (*kind == "erf") f.kind = ProbabilityKind::erf;
        else {
            in.fail(JsonReader::join(where, "kind"), "expected sharp, logistic or erf");
            return std::nullopt;
        }
    }
    if (auto width = in.number(j, "width", where, false)) f.width = *width;
    return f;
}

std::optional<ResourceConfig> parse_resource(JsonReader& in, const json& j, const std::string& where) {
    if (!j.is_object()) {
        in.fail(where, "expected an object");
        return std::nullopt;
    }
    ResourceConfig r;
    bool ok = true;
    if (auto name = in.string(j, "name", where)) r.name = *name;
    else ok = false;
    const std::string rw = r.name.empty() ? where : "resources." + r.name;

    if (!j.contains("endowment")) {
        in.fail(rw, "missing required 'endowment'");
        ok = false;
    } else if (auto e = parse_endowment(in, j.at("endowment"), rw + ".endowment")) {
        r.endowment = std::move(*e);
    } else {
        ok = false;
    }
    if (auto nu0 = parse_nu0(in, j, rw)) r.nu0 = std::move(*nu0);
    else ok = false;
    if (j.contains("extraction")) {
        if (auto f = parse_extraction(in, j.at("extraction"), rw + ".extraction")) r.f = *f;
        else ok = false;
    }
    if (j.contains("price")) {
        r.price = parse_path(in, j.at("price"), rw + ".price");
        ok = ok && r.price.has_value();
    }
    if (j.contains("demand")) {
        r.demand = parse_path(in, j.at("demand"), rw + ".demand");
        ok = ok && r.demand.has_value();
    }
    if (auto x = in.number(j, "central_fraction", rw, false)) r.central_fraction = *x;
    if (!ok) return std::nullopt;
    return r;
}

std::optional<CoupledConfig> parse_coupled(JsonReader& in, const json& j, const std::string& where) {
    CoupledConfig c;
    bool ok = true;
    if (!j.contains("total_demand")) {
        in.fail(where, "missing required 'total_demand'");
        ok = false;
    } else if (auto p = parse_path(in, j.at("total_demand"), where + ".total_demand")) {
        c.total_demand = std::move(*p);
    } else {
        ok = false;
    }
    if (!j.contains("technologies") || !j.at("technologies").is_array()) {
        in.fail(where, "missing required array 'technologies'");
        ok = false;
    } else {
        std::size_t idx = 0;
        for (const auto& t : j.at("technologies")) {
            const auto tw = where + ".technologies[" + std::to_string(idx++) + "]";
            if (!t.is_object()) {
                in.fail(tw, "expected an object");
                ok = false;
                continue;
            }
            TechnologyConfig tech;
            if (auto name = in.string(t, "name", tw)) tech.name = *name;
            else ok = false;
            if (t.contains("resource") && !t.at("resource").is_null()) {
                if (auto res = in.string(t, "resource", tw)) tech.resource = *res;
                else ok = false;
            }
            if (auto v = in.number(t, "intensity", tw, false)) tech.intensity = *v;
            if (auto v = in.number(t, "offset", tw, false)) tech.offset = *v;
            c.technologies.push_back(std::move(tech));
        }
    }
    if (!j.contains("initial_shares")) {
        in.fail(where, "missing required 'initial_shares'");
        ok = false;
    } else if (auto s = in.numbers(j.at("initial_shares"), where + ".initial_shares")) {
        c.initial_shares = std::move(*s);
    } else {
        ok = false;
    }
    if (auto v = in.number(j, "turnover", where, false)) c.turnover = *v;
    if (auto v = in.number(j, "preference_width", where, false)) c.preference_width = *v;
    if (!ok) return std::nullopt;
    return c;
}

ScenarioConfig parse_config(const json& root, const std::filesystem::path& base_dir,
                            std::vector<std::string>& errors) {
    JsonReader in(errors);
    ScenarioConfig cfg;
    cfg.base_dir = base_dir;
    if (!root.is_object()) {
        in.fail("<root>", "expected a JSON object");
        return cfg;
    }

    if (const auto* h = in.object_at(root, "horizon", "", true)) {
        if (auto v = in.number(*h, "start", "horizon")) cfg.horizon.start = *v;
        if (auto v = in.number(*h, "end", "horizon")) cfg.horizon.end = *v;
        if (auto v = in.number(*h, "dt", "horizon")) cfg.horizon.dt = *v;
    }
    if (auto mode = in.string(root, "mode", "")) {
        if (*mode == "forward") cfg.mode = ScenarioMode::forward;
        else if (*mode == "reverse") cfg.mode = ScenarioMode::reverse;
        else if (*mode == "coupled") cfg.mode = ScenarioMode::coupled;
        else in.fail("mode", "expected forward, reverse or coupled");
    }
    if (!root.contains("resources") || !root.at("resources").is_array() || root.at("resources").empty()) {
        in.fail("resources", "expected a non-empty array");
    } else {
        std::size_t idx = 0;
        for (const auto& r : root.at("resources")) {
            if (auto res = parse_resource(in, r, "resources[" + std::to_string(idx) + "]"))
                cfg.resources.push_back(std::move(*res));
            ++idx;
        }
    }
    if (const auto* sd = in.object_at(root, "shared_demand", "", false)) {
        SharedDemandConfig shared;
        bool ok = true;
        if (sd->contains("total")) {
            if (auto p = parse_path(in, sd->at("total"), "shared_demand.total")) shared.total = std::move(*p);
            else ok = false;
        } else {
            in.fail("shared_demand", "missing required 'total'");
            ok = false;
        }
        if (const auto* shares = in.object_at(*sd, "shares", "shared_demand", true)) {
            for (const auto& [name, value] : shares->items()) {
                if (value.is_number()) shared.shares.emplace_back(name, value.get<double>());
                else {
                    in.fail("shared_demand.shares." + name, "expected a number");
                    ok = false;
                }
            }
        } else {
            ok = false;
        }
        if (ok) cfg.shared_demand = std::move(shared);
    }
    if (const auto* c = in.object_at(root, "coupled", "", false)) cfg.coupled = parse_coupled(in, *c, "coupled");
    if (const auto* inv = in.object_at(root, "inversion", "", false)) {
        if (auto v = in.number(*inv, "tolerance", "inversion", false)) cfg.inversion.tolerance = *v;
        if (auto v = in.number(*inv, "p_max", "inversion", false)) cfg.inversion.p_max = *v;
        if (auto v = in.number(*inv, "max_iterations", "inversion", false)) {
            if (*v >= 1.0 && *v == std::floor(*v)) cfg.inversion.max_iterations = static_cast<std::size_t>(*v);
            else in.fail("inversion.max_iterations", "expected a positive integer");
        }
    }
    if (const auto* e = in.object_at(root, "ensemble", "", false)) {
        EnsembleConfig ens;
        if (auto v = in.number(*e, "runs", "ensemble", false)) {
            if (*v >= 1.0 && *v == std::floor(*v)) ens.runs = static_cast<std::size_t>(*v);
            else in.fail("ensemble.runs", "expected a positive integer");
        }
        if (e->contains("seed")) {
            const auto& s = e->at("seed");
            if (s.is_number_unsigned()) ens.seed = s.get<std::uint64_t>();
            else in.fail("ensemble.seed", "expected a non-negative integer");
        }
        if (e->contains("percentiles")) {
            if (auto p = in.numbers(e->at("percentiles"), "ensemble.percentiles")) ens.percentiles = std::move(*p);
        }
        if (e->contains("sampling")) {
            const auto& s = e->at("sampling");
            if (s.is_string() && s.get<std::string>() == "uniform") {
                ens.fixed_fraction = std::nullopt;
            } else if (s.is_object() && s.contains("fixed") && s.at("fixed").is_number()) {
                ens.fixed_fraction = s.at("fixed").get<double>();
            } else {
                in.fail("ensemble.sampling", "expected \"uniform\" or {\"fixed\": x}");
            }
        }
        cfg.ensemble = std::move(ens);
    }
    if (const auto* o = in.object_at(root, "output", "", false)) {
        if (auto v = in.number(*o, "snapshot_every", "output", false)) {
            if (*v >= 1.0 && *v == std::floor(*v)) cfg.snapshot_every = static_cast<std::size_t>(*v);
            else in.fail("output.snapshot_every", "expected a positive integer");
        }
    }
    return cfg;
}

std::filesystem::path resolve(const ScenarioConfig& cfg, const std::filesystem::path& p) {
    return p.is_absolute() ? p : cfg.base_dir / p;
}

TimeSeries resolve_path(const ScenarioConfig& cfg, const PathSpec& spec, bool is_price, std::size_t steps,
                        const std::string& where, std::vector<std::string>& errors) {
    const Horizon& h = cfg.horizon;
    double factor = 1.0;
    try {
        if (!spec.unit.empty())
            factor = is_price ? units::price_to_usd_per_gj(spec.unit) : units::rate_to_ej_per_year(spec.unit);
    } catch (const ValidationError& e) {
        errors.push_back(where + ".unit: " + e.what());
    }

    TimeSeries out;
    const std::string noun = is_price ? "price" : "demand";
    if (const auto* lin = std::get_if<LinearPathSpec>(&spec.shape)) {
        out = linear_path(lin->start, lin->slope, h);
    } else if (const auto* bp = std::get_if<BreakpointPathSpec>(&spec.shape)) {
        out = piecewise_linear_path(*bp, h);
    } else if (const auto* values = std::get_if<ValuesPathSpec>(&spec.shape)) {
        if (values->size() != steps) {
            errors.push_back(where + ": " + noun + " path has " + std::to_string(values->size()) +
                             " values but the horizon has " + std::to_string(steps) + " steps");
            return {};
        }
        out = TimeSeries{h.start, h.dt, *values};
    } else {
        const auto& file = std::get<CsvPathSpec>(spec.shape).file;
        try {
            static constexpr std::array<std::string_view, 2> kHeader{"year", "value"};
            const auto table = csv::parse(csv::read_file(resolve(cfg, file)));
            csv::require_header(table, kHeader);
            if (table.rows.size() != steps) {
                errors.push_back(where + ": " + noun + " path has " + std::to_string(table.rows.size()) +
                                 " rows but the horizon has " + std::to_string(steps) + " steps");
                return {};
            }
            out = TimeSeries{h.start, h.dt, {}};
            for (std::size_t k = 0; k < steps; ++k) {
                const auto line = table.line_numbers[k];
                const double year = csv::parse_number(table.rows[k][0], line, "year");
                if (std::abs(year - out.time_at(k)) > 1e-6 * std::max(1.0, std::abs(year)))
                    throw ValidationError("line " + std::to_string(line) + ": year does not match step " +
                                          std::to_string(k));
                out.values.push_back(csv::parse_number(table.rows[k][1], line, "value"));
            }
        } catch (const std::exception& e) {
            errors.push_back(where + ": " + file.string() + ": " + e.what());
            return {};
        }
    }
    for (double& v : out.values) v *= factor;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!std::isfinite(out[k])) {
            errors.push_back(where + ": value at step " + std::to_string(k) + " is not finite");
            break;
        }
        if (!is_price && out[k] < 0.0) {
            errors.push_back(where + ": demand at step " + std::to_string(k) + " is negative");
            break;
        }
    }
    return out;
}

std::optional<UncertainEndowment> resolve_endowment(const ScenarioConfig& cfg, const EndowmentSpec& spec,
                                                    const std::string& where, std::vector<std::string>& errors) {
    try {
        const double cost_factor = units::price_to_usd_per_gj(spec.cost_unit);
        const double energy_factor = units::energy_to_ej(spec.energy_unit);
        UncertainEndowment raw = [&] {
            if (const auto* file = std::get_if<std::filesystem::path>(&spec.source))
                return read_endowment_csv(resolve(cfg, *file));
            const auto& in = std::get<InlineEndowment>(spec.source);
            CostGrid grid(in.edges);
            return UncertainEndowment(CostDistribution(grid, in.density_low), CostDistribution(grid, in.density_high));
        }();
        if (cost_factor == 1.0 && energy_factor == 1.0) return raw;
        std::vector<double> edges(raw.low().grid().edges().begin(), raw.low().grid().edges().end());
        for (double& e : edges) e *= cost_factor;
        const auto scale = [&](std::span<const double> d) {
            std::vector<double> out(d.begin(), d.end());
            for (double& v : out) v *= energy_factor / cost_factor;
            return out;
        };
        CostGrid grid(std::move(edges));
        return UncertainEndowment(CostDistribution(grid, scale(raw.low().density())),
                                  CostDistribution(grid, scale(raw.high().density())));
    } catch (const std::exception& e) {
        errors.push_back(where + ": " + e.what());
        return std::nullopt;
    }
}

std::optional<Nu0Estimate> resolve_nu0(const ScenarioConfig& cfg, const Nu0Spec& spec, const std::string& where,
                                       std::vector<std::string>& errors) {
    if (const auto* inverse = std::get_if<double>(&spec.source)) {
        if (!(*inverse > 0.0 && std::isfinite(*inverse))) {
            errors.push_back(where + ".nu0_inverse: must be finite and > 0");
            return std::nullopt;
        }
        return Nu0Estimate{*inverse, 0.0, std::nullopt};
    }
    if (const auto* key = std::get_if<std::string>(&spec.source)) {
        if (auto found = default_nu0(*key)) return found;
        errors.push_back(where + ".nu0_default: no default nu0 for '" + *key + "'");
        return std::nullopt;
    }
    const auto& ref = std::get<CalibrationRef>(spec.source);
    try {
        const auto series = read_rp_csv(resolve(cfg, ref.file), units::energy_to_ej(ref.units));
        return estimate_nu0(rp_ratio(series, ref.scope), ref.window);
    } catch (const std::exception& e) {
        errors.push_back(where + ".nu0_calibration: " + e.what());
        return std::nullopt;
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : ValidationError(join_lines(errors)), errors_(std::move(errors)) {}

std::size_t Horizon::steps() const {
    if (!(dt > 0.0 && std::isfinite(dt))) throw ValidationError("horizon.dt must be finite and > 0");
    if (!(end > start)) throw ValidationError("horizon.end must exceed horizon.start");
    const double n = (end - start) / dt;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
        throw ValidationError("horizon.dt does not divide the horizon");
    return static_cast<std::size_t>(rounded);
}

ScenarioConfig parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("<root>: invalid JSON: ") + e.what()});
    }
    std::vector<std::string> errors;
    auto cfg = parse_config(root, base_dir, errors);
    if (!errors.empty()) {
        // Report semantic problems in the parts that did parse as well.
        try {
            (void)validate(cfg);
        } catch (const ConfigError& e) {
            for (const auto& msg : e.errors())
                if (std::find(errors.begin(), errors.end(), msg) == errors.end()) errors.push_back(msg);
        }
        throw ConfigError(std::move(errors));
    }
    return cfg;
}

ScenarioConfig read_scenario(const std::filesystem::path& path) {
    const auto text = csv::read_file(path);
    try {
        return parse_scenario(text, path.parent_path());
    } catch (const ConfigError& e) {
        std::vector<std::string> errors;
        for (const auto& msg : e.errors()) errors.push_back(path.filename().string() + ": " + msg);
        throw ConfigError(std::move(errors));
    }
}

Scenario validate(const ScenarioConfig& cfg) {
    std::vector<std::string> errors;
    std::size_t steps = 0;
    try {
        steps = cfg.horizon.steps();
    } catch (const ValidationError& e) {
        errors.emplace_back(e.what());
    }

    Scenario scenario{cfg, steps, {}, std::nullopt, std::nullopt};
    const bool forward = cfg.mode == ScenarioMode::forward;
    const bool reverse = cfg.mode == ScenarioMode::reverse;
    const bool coupled = cfg.mode == ScenarioMode::coupled;

    std::set<std::string> names;
    for (const auto& r : cfg.resources) {
        const auto where = "resources." + r.name;
        if (r.name.empty()) errors.push_back("resources: resource name must not be empty");
        if (!names.insert(r.name).second) errors.push_back(where + ": duplicate resource name");

        auto endowment = resolve_endowment(cfg, r.endowment, where + ".endowment", errors);
        auto nu0 = resolve_nu0(cfg, r.nu0, where, errors);
        try {
            r.f.validate();
        } catch (const ValidationError& e) {
            errors.push_back(where + ".extraction: " + e.what());
        }
        if (!(r.central_fraction >= 0.0 && r.central_fraction <= 1.0))
            errors.push_back(where + ".central_fraction: must lie in [0, 1]");

        TimeSeries path;
        if (forward) {
            if (r.demand) errors.push_back(where + ".demand: not allowed in forward mode");
            if (!r.price) errors.push_back(where + ".price: required in forward mode");
            else if (steps) path = resolve_path(cfg, *r.price, true, steps, where + ".price", errors);
        } else if (reverse) {
            if (r.price) errors.push_back(where + ".price: not allowed in reverse mode");
            if (r.demand && cfg.shared_demand)
                errors.push_back(where + ".demand: conflicts with shared_demand");
            else if (!r.demand && !cfg.shared_demand)
                errors.push_back(where + ".demand: required in reverse mode (or use shared_demand)");
            else if (r.demand && steps)
                path = resolve_path(cfg, *r.demand, false, steps, where + ".demand", errors);
        } else if (r.price || r.demand) {
            errors.push_back(where + ": per-resource price/demand paths are not allowed in coupled mode");
        }

        if (endowment && nu0)
            scenario.resources.push_back({r.name, std::move(*endowment), *nu0, r.f, std::move(path), r.central_fraction});
    }

    if (cfg.shared_demand) {
        if (!reverse) {
            errors.emplace_back("shared_demand: only allowed in reverse mode");
        } else if (steps) {
            const auto total = resolve_path(cfg, cfg.shared_demand->total, false, steps, "shared_demand.total", errors);
            std::vector<double> shares;
            for (const auto& r : scenario.resources) {
                const auto it = std::find_if(cfg.shared_demand->shares.begin(), cfg.shared_demand->shares.end(),
                                             [&](const auto& s) { return s.first == r.name; });
                if (it == cfg.shared_demand->shares.end()) {
                    errors.push_back("shared_demand.shares: missing share for '" + r.name + "'");
                    shares.push_back(0.0);
                } else {
                    shares.push_back(it->second);
                }
            }
            for (const auto& [name, value] : cfg.shared_demand->shares) {
                if (!names.contains(name)) errors.push_back("shared_demand.shares." + name + ": unknown resource");
            }
            try {
                if (!total.empty() && scenario.resources.size() == cfg.resources.size()) {
                    auto split = fixed_share_demand(total, shares);
                    for (std::size_t i = 0; i < split.size(); ++i) scenario.resources[i].path = std::move(split[i]);
                }
            } catch (const ValidationError& e) {
                errors.push_back(std::string("shared_demand.shares: ") + e.what());
            }
        }
    }

    if (coupled && !cfg.coupled) errors.emplace_back("coupled: section required in coupled mode");
    if (!coupled && cfg.coupled) errors.emplace_back("coupled: only allowed in coupled mode");
    if (coupled && cfg.coupled) {
        const auto& c = *cfg.coupled;
        ResolvedCoupled rc;
        if (steps) rc.total_demand = resolve_path(cfg, c.total_demand, false, steps, "coupled.total_demand", errors);
        for (std::size_t i = 0; i < c.technologies.size(); ++i) {
            const auto& t = c.technologies[i];
            const auto where = "coupled.technologies." + (t.name.empty() ? std::to_string(i) : t.name);
            Technology tech{t.name, std::nullopt, t.intensity, t.offset};
            if (t.resource) {
                const auto it = std::find_if(scenario.resources.begin(), scenario.resources.end(),
                                             [&](const auto& r) { return r.name == *t.resource; });
                if (it == scenario.resources.end()) errors.push_back(where + ".resource: unknown resource '" + *t.resource + "'");
                else tech.resource = static_cast<std::size_t>(std::distance(scenario.resources.begin(), it));
            }
            try {
                tech.validate();
            } catch (const ValidationError& e) {
                errors.push_back(where + ": " + e.what());
            }
            rc.technologies.push_back(std::move(tech));
        }
        rc.initial = ShareState{c.initial_shares, c.turnover};
        if (c.initial_shares.size() != c.technologies.size()) {
            errors.emplace_back("coupled.initial_shares: one share per technology required");
        } else {
            try {
                rc.initial.validate();
            } catch (const ValidationError& e) {
                errors.push_back(std::string("coupled.initial_shares: ") + e.what());
            }
        }
        if (!(c.preference_width > 0.0)) errors.emplace_back("coupled.preference_width: must be > 0");
        rc.settings = CoupledSettings{c.preference_width, cfg.inversion};
        scenario.coupled = std::move(rc);
    }

    try {
        cfg.inversion.validate();
    } catch (const ValidationError& e) {
        errors.push_back(std::string("inversion: ") + e.what());
    }

    if (cfg.ensemble) {
        if (coupled) errors.emplace_back("ensemble: not supported in coupled mode");
        EnsembleSpec spec;
        spec.runs = cfg.ensemble->runs;
        spec.seed = cfg.ensemble->seed;
        spec.mode = reverse ? RunMode::reverse : RunMode::forward;
        spec.percentiles = cfg.ensemble->percentiles;
        try {
            if (cfg.ensemble->fixed_fraction) spec.sampling = fixed_fraction(*cfg.ensemble->fixed_fraction);
            spec.validate();
        } catch (const std::exception& e) {
            errors.push_back(std::string("ensemble: ") + e.what());
        }
        scenario.ensemble = std::move(spec);
    }
    if (cfg.snapshot_every < 1) errors.emplace_back("output.snapshot_every: must be >= 1");

    if (!errors.empty()) throw ConfigError(std::move(errors));
    return scenario;
}

TimeSeries linear_path(double start_value, double slope, const Horizon& horizon) {
    const auto steps = horizon.steps();
    TimeSeries out{horizon.start, horizon.dt, {}};
    out.values.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) out.values.push_back(start_value + slope * (out.time_at(k) - horizon.start));
    return out;
}

TimeSeries piecewise_linear_path(const BreakpointPathSpec& breakpoints, const Horizon& horizon) {
    if (breakpoints.empty()) throw ValidationError("piecewise-linear path needs at least one breakpoint");
    const auto steps = horizon.steps();
    TimeSeries out{horizon.start, horizon.dt, {}};
    out.values.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = out.time_at(k);
        if (t <= breakpoints.front().first) {
            out.values.push_back(breakpoints.front().second);
            continue;
        }
        if (t >= breakpoints.back().first) {
            out.values.push_back(breakpoints.back().second);
            continue;
        }
        const auto hi = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                                         [](double v, const auto& bp) { return v < bp.first; });
        const auto lo = std::prev(hi);
        const double w = (t - lo->first) / (hi->first - lo->first);
        out.values.push_back(lo->second + w * (hi->second - lo->second));
    }
    return out;
}

std::vector<TimeSeries> fixed_share_demand(const TimeSeries& total, const std::vector<double>& shares) {
    if (shares.empty()) throw ValidationError("at least one demand share required");
    double sum = 0.0;
    for (double s : shares) {
        if (!(s >= 0.0)) throw ValidationError("demand shares must be >= 0");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("demand shares sum to " + csv::format_number(sum) + ", not 1");
    std::vector<TimeSeries> out;
    for (double s : shares) {
        TimeSeries part{total.t0, total.dt, total.values};
        for (double& v : part.values) v *= s;
        out.push_back(std::move(part));
    }
    return out;
}

}  // namespace depletion
