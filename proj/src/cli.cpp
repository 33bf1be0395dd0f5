#include "depletion/cli.hpp"

#include "depletion/calibration.hpp"
#include "depletion/csv.hpp"
#include "depletion/ensemble.hpp"
#include "depletion/scenario.hpp"
#include "depletion/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <ostream>

namespace depletion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string percentile_label(double p) {
    const double pct = p * 100.0;
    if (std::abs(pct - std::round(pct)) < 1e-9) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%02d", static_cast<int>(std::round(pct)));
        return buf;
    }
    auto s = csv::format_number(pct);
    std::replace(s.begin(), s.end(), '.', '_');
    return "p" + s;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            values.push_back(csv::parse_number(field, 1, flag));
        } catch (const ValidationError&) {
            throw ValidationError(flag + ": not a number: '" + field + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

YearRange parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("--window: expected FIRST:LAST");
    const auto first = csv::parse_number(text.substr(0, colon), 1, "--window");
    const auto last = csv::parse_number(text.substr(colon + 1), 1, "--window");
    if (first != std::floor(first) || last != std::floor(last) || last < first)
        throw ValidationError("--window: expected integer years FIRST:LAST with FIRST <= LAST");
    return {static_cast<int>(first), static_cast<int>(last)};
}

// Rows at step-start times, one column per (name, series) pair.
std::string series_csv(const TimeSeries& clock, const std::vector<std::pair<std::string, const std::vector<double>*>>& columns) {
    std::vector<std::string> header{"year"};
    for (const auto& [name, _] : columns) header.push_back(name);
    csv::Writer w(header);
    std::vector<double> row(columns.size() + 1);
    for (std::size_t k = 0; k < clock.size(); ++k) {
        row[0] = clock.time_at(k);
        for (std::size_t c = 0; c < columns.size(); ++c) row[c + 1] = (*columns[c].second)[k];
        w.add_row(row);
    }
    return w.str();
}

std::vector<double> as_doubles(const std::vector<bool>& flags) {
    std::vector<double> out;
    out.reserve(flags.size());
    for (bool b : flags) out.push_back(b ? 1.0 : 0.0);
    return out;
}

struct RunOptions {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

struct LoadedScenario {
    Scenario scenario;
    std::string digest;
};

LoadedScenario load_scenario(const RunOptions& opts) {
    const fs::path path(opts.config);
    const auto bytes = csv::read_file(path);
    auto cfg = read_scenario(path);
    if (opts.seed && cfg.ensemble) cfg.ensemble->seed = *opts.seed;
    auto scenario = validate(cfg);
    if (scenario.ensemble) scenario.ensemble->threads = opts.threads;
    return {std::move(scenario), sha256_hex(bytes)};
}

void write_manifest(const fs::path& dir, const std::string& command, const LoadedScenario& loaded,
                    std::chrono::steady_clock::time_point started) {
    RunManifest m;
    m.command = command;
    m.config_digest = loaded.digest;
    m.seed = loaded.scenario.ensemble ? loaded.scenario.ensemble->seed : 0;
    m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    csv::write_file(dir / "manifest.json", m.to_json());
}

// remaining.csv: totals at the initial state and after every snapshot interval.
std::string remaining_csv(const Scenario& sc, const std::vector<std::vector<DepletionState>>& snapshots) {
    std::vector<std::string> header{"year"};
    for (const auto& r : sc.resources) {
        header.push_back(r.name + "_remaining");
        header.push_back(r.name + "_extracted");
    }
    csv::Writer w(header);
    const std::size_t rows = snapshots.empty() ? 0 : snapshots.front().size();
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < rows; ++k) {
        row[0] = snapshots.front()[k].time();
        for (std::size_t r = 0; r < snapshots.size(); ++r) {
            row[1 + 2 * r] = total_quantity(snapshots[r][k].remaining());
            row[2 + 2 * r] = snapshots[r][k].extracted();
        }
        w.add_row(row);
    }
    return w.str();
}

void write_bands(const fs::path& dir, const Scenario& sc, std::ostream& out) {
    const auto& spec = *sc.ensemble;
    const bool reverse = spec.mode == RunMode::reverse;
    std::vector<EnsembleResult> results;
    for (const auto& r : sc.resources) results.push_back(run_ensemble(r.endowment, spec, r.inputs(sc.config.inversion)));

    std::vector<std::pair<std::string, const std::vector<double>*>> columns;
    json plot;
    plot["quantity"] = reverse ? "marginal_cost" : "flow";
    plot["unit"] = reverse ? "$/GJ" : "EJ/y";
    plot["runs"] = spec.runs;
    plot["seed"] = spec.seed;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& name = sc.resources[i].name;
        const auto& res = results[i];
        json series;
        for (std::size_t j = 0; j < res.percentiles.size(); ++j) {
            const auto label = percentile_label(res.percentiles[j]);
            columns.emplace_back(name + "_" + label, &res.bands[j].values);
            series[label] = res.bands[j].values;
        }
        columns.emplace_back(name + "_low", &res.low_run.values);
        columns.emplace_back(name + "_high", &res.high_run.values);
        series["low"] = res.low_run.values;
        series["high"] = res.high_run.values;
        if (reverse) {
            columns.emplace_back(name + "_diverged_fraction", &res.divergence_fraction);
            series["diverged_fraction"] = res.divergence_fraction;
        }
        plot["series"][name] = std::move(series);
    }
    const auto& clock = sc.resources.front().path;
    std::vector<double> years;
    for (std::size_t k = 0; k < clock.size(); ++k) years.push_back(clock.time_at(k));
    plot["years"] = years;
    csv::write_file(dir / "bands.csv", series_csv(clock, columns));
    csv::write_file(dir / "bands_plot.json", plot.dump(1) + "\n");
    out << "ensemble: " << spec.runs << " runs per resource, seed " << spec.seed << " -> bands.csv\n";
}

int cmd_run(const RunOptions& opts, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    const auto loaded = load_scenario(opts);
    const auto& sc = loaded.scenario;
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    const SnapshotOptions snaps{sc.config.snapshot_every};

    if (sc.config.mode == ScenarioMode::forward) {
        std::vector<ForwardRun> runs;
        std::vector<std::vector<DepletionState>> snapshots;
        std::vector<std::pair<std::string, const std::vector<double>*>> columns;
        for (const auto& r : sc.resources) {
            runs.push_back(run_forward(DepletionState(r.central(), r.nu0.nu0(), r.path.t0), r.f, r.path, snaps));
        }
        for (std::size_t i = 0; i < runs.size(); ++i) {
            columns.emplace_back(sc.resources[i].name + "_flow", &runs[i].flows.values);
            snapshots.push_back(runs[i].snapshots);
            const auto peak = peak_of(runs[i].flows);
            out << sc.resources[i].name << ": peak flow " << csv::format_number(peak.value) << " EJ/y in "
                << csv::format_number(peak.time) << "\n";
        }
        csv::write_file(dir / "flows.csv", series_csv(sc.resources.front().path, columns));
        csv::write_file(dir / "remaining.csv", remaining_csv(sc, snapshots));
    } else if (sc.config.mode == ScenarioMode::reverse) {
        std::vector<ReverseResult> runs;
        std::vector<std::vector<DepletionState>> snapshots;
        std::vector<std::vector<double>> flags;
        for (const auto& r : sc.resources) {
            runs.push_back(run_reverse(DepletionState(r.central(), r.nu0.nu0(), r.path.t0), r.f, r.path,
                                       sc.config.inversion, snaps));
            flags.push_back(as_doubles(runs.back().diverged));
        }
        std::vector<std::pair<std::string, const std::vector<double>*>> columns;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& name = sc.resources[i].name;
            columns.emplace_back(name + "_price", &runs[i].prices.values);
            columns.emplace_back(name + "_demand", &sc.resources[i].path.values);
            columns.emplace_back(name + "_delivered", &runs[i].flows_delivered.values);
            columns.emplace_back(name + "_unmet", &runs[i].unmet_demand.values);
            columns.emplace_back(name + "_diverged", &flags[i]);
            snapshots.push_back(runs[i].snapshots);
            out << name << ": mean marginal cost " << csv::format_number(mean_of(runs[i].prices)) << " $/GJ";
            if (runs[i].diverged_at) out << ", diverged at " << csv::format_number(runs[i].prices.time_at(*runs[i].diverged_at));
            out << "\n";
        }
        csv::write_file(dir / "prices.csv", series_csv(sc.resources.front().path, columns));
        csv::write_file(dir / "remaining.csv", remaining_csv(sc, snapshots));
    } else {
        const auto& c = *sc.coupled;
        std::vector<CoupledResource> resources;
        for (const auto& r : sc.resources) resources.push_back({r.name, r.central(), r.nu0.nu0(), r.f});
        const auto res = run_coupled(resources, c.technologies, c.total_demand, c.initial, c.settings);

        std::vector<std::vector<double>> flags;
        for (const auto& d : res.diverged) flags.push_back(as_doubles(d));
        std::vector<std::pair<std::string, const std::vector<double>*>> columns;
        for (std::size_t i = 0; i < resources.size(); ++i) {
            const auto& name = resources[i].name;
            columns.emplace_back(name + "_price", &res.prices[i].values);
            columns.emplace_back(name + "_demand", &res.demand[i].values);
            columns.emplace_back(name + "_delivered", &res.delivered[i].values);
            columns.emplace_back(name + "_unmet", &res.unmet[i].values);
            columns.emplace_back(name + "_diverged", &flags[i]);
            const auto peak = peak_of(res.prices[i]);
            out << name << ": max marginal cost " << csv::format_number(peak.value) << " $/GJ in "
                << csv::format_number(peak.time) << "\n";
        }
        csv::write_file(dir / "prices.csv", series_csv(c.total_demand, columns));

        std::vector<std::pair<std::string, const std::vector<double>*>> share_cols;
        for (std::size_t i = 0; i < c.technologies.size(); ++i)
            share_cols.emplace_back(c.technologies[i].name, &res.shares[i].values);
        for (std::size_t i = 0; i < c.technologies.size(); ++i)
            share_cols.emplace_back(c.technologies[i].name + "_cost", &res.costs[i].values);
        csv::write_file(dir / "shares.csv", series_csv(c.total_demand, share_cols));

        std::vector<std::string> header{"year"};
        for (const auto& r : resources) header.push_back(r.name + "_remaining");
        csv::Writer w(header);
        const auto& clock = c.total_demand;
        for (std::size_t k = 0; k <= clock.size(); k += sc.config.snapshot_every) {
            std::vector<double> row{clock.time_at(k)};
            for (const auto& rem : res.remaining) row.push_back(rem[k]);
            w.add_row(row);
        }
        csv::write_file(dir / "remaining.csv", w.str());
    }

    if (sc.ensemble) write_bands(dir, sc, out);
    write_manifest(dir, "run", loaded, started);
    return kExitOk;
}

int cmd_sensitivity(const RunOptions& opts, const std::string& nu0_inverse_list, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    if (nu0_inverse_list.empty()) throw ValidationError("--nu0-inverse: at least one value required");
    const auto inverses = parse_number_list(nu0_inverse_list, "--nu0-inverse");
    std::vector<double> nu0_values;
    for (double v : inverses) {
        if (!(v > 0.0)) throw ValidationError("--nu0-inverse: values must be > 0");
        nu0_values.push_back(1.0 / v);
    }
    const auto loaded = load_scenario(opts);
    const auto& sc = loaded.scenario;
    if (sc.config.mode == ScenarioMode::coupled) throw ValidationError("sensitivity: coupled mode is not supported");
    const bool reverse = sc.config.mode == ScenarioMode::reverse;
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    csv::Writer summary(reverse ? std::vector<std::string>{"resource", "nu0_inverse", "mean_price", "diverged_steps"}
                                : std::vector<std::string>{"resource", "nu0_inverse", "peak_year", "peak_flow"});
    for (const auto& r : sc.resources) {
        const auto points = sensitivity_sweep(r.central(), nu0_values, r.inputs(sc.config.inversion), sc.run_mode());
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& o = points[i].output;
            const auto value = csv::format_number(inverses[i]);
            std::vector<std::pair<std::string, const std::vector<double>*>> columns;
            const auto flags = as_doubles(o.diverged);
            columns.emplace_back(reverse ? "price" : "flow", &o.series.values);
            if (reverse) columns.emplace_back("diverged", &flags);
            csv::write_file(dir / ("sensitivity_" + r.name + "_" + value + ".csv"), series_csv(o.series, columns));

            std::vector<std::string> row{r.name, value};
            if (reverse) {
                const auto diverged = std::count(o.diverged.begin(), o.diverged.end(), true);
                row.push_back(csv::format_number(mean_of(o.series)));
                row.push_back(std::to_string(diverged));
                out << r.name << " nu0^-1=" << value << ": mean marginal cost " << row[2] << " $/GJ\n";
            } else {
                const auto peak = peak_of(o.series);
                row.push_back(csv::format_number(peak.time));
                row.push_back(csv::format_number(peak.value));
                out << r.name << " nu0^-1=" << value << ": peak " << row[3] << " EJ/y in " << row[2] << "\n";
            }
            summary.add_row(row);
        }
    }
    csv::write_file(dir / "sensitivity_summary.csv", summary.str());
    write_manifest(dir, "sensitivity", loaded, started);
    return kExitOk;
}

struct CalibrateOptions {
    std::string rp_csv;
    std::string window;
    std::string scope = "global";
    std::string units = "EJ";
    std::string exclude_csv;
    std::string out_dir;
};

ReserveAdjustments read_adjustments(const fs::path& path, const RpSeries& series, double to_ej) {
    static constexpr std::array<std::string_view, 3> kHeader{"year", "region", "adjustment"};
    const auto table = csv::parse(csv::read_file(path));
    csv::require_header(table, kHeader);
    ReserveAdjustments adj;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        const double year = csv::parse_number(row[0], line, kHeader[0]);
        const auto& years = series.years();
        const auto it = std::find(years.begin(), years.end(), static_cast<int>(year));
        if (it == years.end() || year != std::floor(year))
            throw ValidationError(path.string() + ": line " + std::to_string(line) + ": year not in R/P series");
        series.region_index(row[1]);
        auto& values = adj[row[1]];
        values.resize(years.size(), 0.0);
        values[static_cast<std::size_t>(std::distance(years.begin(), it))] +=
            csv::parse_number(row[2], line, kHeader[2]) * to_ej;
    }
    return adj;
}

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out) {
    const double to_ej = units::energy_to_ej(opts.units);
    auto series = read_rp_csv(opts.rp_csv, to_ej);
    if (!opts.exclude_csv.empty()) series = exclude_category(series, read_adjustments(opts.exclude_csv, series, to_ej));

    RegionScope scope;
    if (opts.scope != "global") {
        std::vector<std::string> regions;
        std::size_t start = 0;
        while (start <= opts.scope.size()) {
            const auto comma = opts.scope.find(',', start);
            regions.push_back(opts.scope.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        scope = std::move(regions);
    }
    const auto ratios = rp_ratio(series, scope);
    const YearRange window =
        opts.window.empty() ? YearRange{series.years().front(), series.years().back()} : parse_window(opts.window);
    const auto estimate = estimate_nu0(ratios, window);

    out << "window " << window.first << "-" << window.last << ": nu0^-1 = " << csv::format_number(estimate.inverse_mean)
        << " +- " << csv::format_number(estimate.inverse_std) << " y, nu0 = " << csv::format_number(estimate.nu0())
        << " /y\n";

    if (!opts.out_dir.empty()) {
        const fs::path dir(opts.out_dir);
        fs::create_directories(dir);
        std::vector<std::pair<std::string, const std::vector<double>*>> columns{{"rp_ratio", &ratios.values}};
        csv::write_file(dir / "rp_ratio.csv", series_csv(ratios, columns));
        csv::Writer w({"window_first", "window_last", "nu0_inverse_mean", "nu0_inverse_std", "nu0"});
        const std::array<double, 5> row{static_cast<double>(window.first), static_cast<double>(window.last),
                                        estimate.inverse_mean, estimate.inverse_std, estimate.nu0()};
        w.add_row(row);
        csv::write_file(dir / "calibration.csv", w.str());
    }
    return kExitOk;
}

}  // namespace

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["elapsed_seconds"] = elapsed_seconds;
    return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xF];
    }
    return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Depletion kinetics of non-renewable energy resources", "depletion"};
    app.require_subcommand(1);

    RunOptions run_opts;
    std::uint64_t seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario config (forward, reverse or coupled, optional ensemble)");
    run_cmd->add_option("--config", run_opts.config, "Scenario config (JSON)")->required();
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory")->required();
    auto* run_seed = run_cmd->add_option("--seed", seed, "Override the ensemble seed");
    run_cmd->add_option("--threads", run_opts.threads, "Ensemble worker threads (0: all cores)");

    RunOptions sens_opts;
    std::string nu0_list;
    auto* sens_cmd = app.add_subcommand("sensitivity", "Sweep nu0 over a list of R/P values");
    sens_cmd->add_option("--config", sens_opts.config, "Scenario config (JSON)")->required();
    sens_cmd->add_option("--out", sens_opts.out_dir, "Output directory")->required();
    sens_cmd->add_option("--nu0-inverse", nu0_list, "Comma-separated nu0^-1 values in years")->required();

    CalibrateOptions cal_opts;
    auto* cal_cmd = app.add_subcommand("calibrate", "Estimate nu0 from reserve/production history");
    cal_cmd->add_option("--rp", cal_opts.rp_csv, "CSV with year,region,reserves,production")->required();
    cal_cmd->add_option("--window", cal_opts.window, "Inclusive year window FIRST:LAST (default: all years)");
    cal_cmd->add_option("--scope", cal_opts.scope, "'global' or comma-separated regions");
    cal_cmd->add_option("--units", cal_opts.units, "Energy unit of reserves/production (EJ, PJ, Mtoe, Gboe, TWh)");
    cal_cmd->add_option("--exclude", cal_opts.exclude_csv, "CSV year,region,adjustment removed from reserves");
    cal_cmd->add_option("--out", cal_opts.out_dir, "Directory for rp_ratio.csv and calibration.csv");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitValidation;
    }

    try {
        if (*run_cmd) {
            if (*run_seed) run_opts.seed = seed;
            return cmd_run(run_opts, out);
        }
        if (*sens_cmd) {
            return cmd_sensitivity(sens_opts, nu0_list, out);
        }
        return cmd_calibrate(cal_opts, out);
    } catch (const ConfigError& e) {
        err << "invalid scenario:\n";
        for (const auto& msg : e.errors()) err << "  " << msg << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace depletion::cli
