#include "depletion/cli.hpp"

#include "depletion/csv.hpp"
#include "depletion/distribution.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace depletion;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(DEPLETION_SOURCE_DIR) / "configs";

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("depletion_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return csv::read_file(p); }

std::vector<double> column(const fs::path& file, const std::string& name) {
    const auto table = csv::parse(slurp(file));
    const auto idx = table.column(name);
    std::vector<double> values;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        values.push_back(csv::parse_number(table.rows[i][idx], table.line_numbers[i], name));
    return values;
}

}  // namespace

TEST_CASE("calibrate: constant series gives 44 with zero spread") {
    const auto dir = scratch("calibrate");
    std::string text = "year,region,reserves,production\n";
    for (int y = 1990; y <= 2010; ++y) text += std::to_string(y) + ",world,1320,30\n";
    csv::write_file(dir / "rp.csv", text);
    const auto r = invoke({"calibrate", "--rp", (dir / "rp.csv").string(), "--out", (dir / "out").string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("nu0^-1 = 44 +- 0 y") != std::string::npos);
    for (double v : column(dir / "out" / "rp_ratio.csv", "rp_ratio")) CHECK(v == 44.0);
    CHECK(column(dir / "out" / "calibration.csv", "nu0_inverse_mean")[0] == 44.0);
    fs::remove_all(dir);
}

TEST_CASE("calibrate: two regions aggregate as a ratio of sums") {
    const auto dir = scratch("calibrate2");
    csv::write_file(dir / "rp.csv",
                    "year,region,reserves,production\n2000,a,1000,20\n2000,b,320,10\n2001,a,1000,20\n2001,b,320,10\n");
    const auto r = invoke({"calibrate", "--rp", (dir / "rp.csv").string(), "--window", "2000:2001"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("nu0^-1 = 44 ") != std::string::npos);
    const auto one = invoke({"calibrate", "--rp", (dir / "rp.csv").string(), "--scope", "b"});
    CHECK(one.out.find("nu0^-1 = 32 ") != std::string::npos);

    csv::write_file(dir / "exclude.csv", "year,region,adjustment\n2000,a,100\n2001,a,100\n");
    const auto ex = invoke({"calibrate", "--rp", (dir / "rp.csv").string(), "--exclude", (dir / "exclude.csv").string()});
    CHECK(ex.code == cli::kExitOk);
    CHECK(ex.out.find("nu0^-1 = 40.66666") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("calibrate: bad inputs exit nonzero with a message") {
    const auto dir = scratch("calibrate_bad");
    csv::write_file(dir / "rp.csv", "year,place,reserves,production\n2000,a,1,1\n");
    const auto header = invoke({"calibrate", "--rp", (dir / "rp.csv").string()});
    CHECK(header.code == cli::kExitValidation);
    CHECK(header.err.find("region") != std::string::npos);

    const auto missing = invoke({"calibrate", "--rp", (dir / "nope.csv").string()});
    CHECK(missing.code == cli::kExitIo);

    const auto usage = invoke({"calibrate"});
    CHECK(usage.code == cli::kExitValidation);
    CHECK(usage.err.find("usage error") != std::string::npos);
    CHECK(invoke({}).code == cli::kExitValidation);
    CHECK(invoke({"frobnicate"}).code == cli::kExitValidation);
    fs::remove_all(dir);
}

TEST_CASE("run: forward demo writes single-peaked flows and a manifest") {
    const auto dir = scratch("forward");
    const auto r = invoke({"run", "--config", (kConfigs / "forward_oil.json").string(), "--out", dir.string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto flows = column(dir / "flows.csv", "oil_flow");
    const auto peak = static_cast<std::size_t>(std::max_element(flows.begin(), flows.end()) - flows.begin());
    CHECK(peak > 0);
    CHECK(peak + 1 < flows.size());
    for (std::size_t k = 1; k < flows.size(); ++k) CHECK((k <= peak ? flows[k] >= flows[k - 1] : flows[k] <= flows[k - 1]));

    const auto years = column(dir / "remaining.csv", "year");
    CHECK(years.front() == 2010.0);
    CHECK(years[1] == 2015.0);
    const auto rem = column(dir / "remaining.csv", "oil_remaining");
    const auto ext = column(dir / "remaining.csv", "oil_extracted");
    for (std::size_t k = 0; k < rem.size(); ++k) CHECK(rem[k] + ext[k] == doctest::Approx(rem[0]).epsilon(1e-9));

    const auto manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find(cli::sha256_hex(slurp(kConfigs / "forward_oil.json"))) != std::string::npos);
    CHECK(manifest.find("\"tool_version\": \"1.0.0\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("run: same config and seed give byte-identical outputs at any thread count") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto cfg = (kConfigs / "ensemble_oil.json").string();
    REQUIRE(invoke({"run", "--config", cfg, "--out", a.string(), "--seed", "5", "--threads", "1"}).code == 0);
    REQUIRE(invoke({"run", "--config", cfg, "--out", b.string(), "--seed", "5", "--threads", "4"}).code == 0);
    for (const char* file : {"flows.csv", "remaining.csv", "bands.csv", "bands_plot.json"})
        CHECK(slurp(a / file) == slurp(b / file));
    CHECK(slurp(a / "manifest.json").find("\"seed\": 5") != std::string::npos);

    const auto lo = column(a / "bands.csv", "oil_p02");
    const auto mid = column(a / "bands.csv", "oil_p50");
    const auto hi = column(a / "bands.csv", "oil_p98");
    for (std::size_t k = 0; k < lo.size(); ++k) CHECK((lo[k] <= mid[k] && mid[k] <= hi[k]));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("run: tiny endowment diverges and is flagged") {
    const auto dir = scratch("tiny");
    const auto r = invoke({"run", "--config", (kConfigs / "reverse_tiny.json").string(), "--out", dir.string()});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("diverged at") != std::string::npos);
    const auto price = column(dir / "prices.csv", "tiny_price");
    const auto flag = column(dir / "prices.csv", "tiny_diverged");
    const auto unmet = column(dir / "prices.csv", "tiny_unmet");
    CHECK(flag.front() == 0.0);
    CHECK(flag.back() == 1.0);
    for (std::size_t k = 0; k < price.size(); ++k) {
        if (flag[k] == 1.0) {
            CHECK(price[k] == 100.0);
            CHECK(unmet[k] > 0.0);
        } else {
            CHECK(unmet[k] == 0.0);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("run: coupled demo writes shares") {
    const auto dir = scratch("coupled");
    REQUIRE(invoke({"run", "--config", (kConfigs / "coupled.json").string(), "--out", dir.string()}).code == 0);
    const auto a = column(dir / "shares.csv", "combustion");
    const auto b = column(dir / "shares.csv", "backstop");
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] + b[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(column(dir / "remaining.csv", "oil_remaining").size() == a.size() + 1);
    fs::remove_all(dir);
}

TEST_CASE("run: invalid config exits before writing anything") {
    const auto dir = scratch("invalid");
    csv::write_file(dir / "bad.json", R"({"horizon": {"start": 2010, "end": 2000, "dt": 1}, "mode": "forward",
        "resources": [{"name": "x", "endowment": {"edges": [1, 2], "density": [1]}, "nu0_inverse": -1,
                       "price": {"values": [1]}}]})");
    const auto out = dir / "out";
    const auto r = invoke({"run", "--config", (dir / "bad.json").string(), "--out", out.string()});
    CHECK(r.code == cli::kExitValidation);
    CHECK(r.err.find("horizon.end") != std::string::npos);
    CHECK(r.err.find("resources.x.nu0_inverse") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
    CHECK(invoke({"run", "--config", (dir / "missing.json").string(), "--out", out.string()}).code == cli::kExitIo);
    fs::remove_all(dir);
}

TEST_CASE("sensitivity: per-value outputs and summary") {
    const auto dir = scratch("sens");
    const auto cfg = (kConfigs / "sensitivity_oil.json").string();
    const auto r = invoke({"sensitivity", "--config", cfg, "--out", dir.string(), "--nu0-inverse", "34,44,54"});
    REQUIRE(r.code == cli::kExitOk);
    const auto years = column(dir / "sensitivity_summary.csv", "peak_year");
    REQUIRE(years.size() == 3);
    CHECK(years[0] < years[1]);
    CHECK(years[1] < years[2]);
    CHECK(fs::exists(dir / "sensitivity_oil_44.csv"));

    const auto one = scratch("sens_one");
    CHECK(invoke({"sensitivity", "--config", cfg, "--out", one.string(), "--nu0-inverse", "44"}).code == 0);
    CHECK(column(one / "sensitivity_summary.csv", "peak_year").size() == 1);
    CHECK(slurp(one / "sensitivity_oil_44.csv") == slurp(dir / "sensitivity_oil_44.csv"));

    CHECK(invoke({"sensitivity", "--config", cfg, "--out", one.string(), "--nu0-inverse", ""}).code == cli::kExitValidation);
    CHECK(invoke({"sensitivity", "--config", cfg, "--out", one.string(), "--nu0-inverse", "44,x"}).code == cli::kExitValidation);
    CHECK(invoke({"sensitivity", "--config", cfg, "--out", one.string(), "--nu0-inverse", "0"}).code == cli::kExitValidation);
    fs::remove_all(dir);
    fs::remove_all(one);
}

TEST_CASE("output CSVs round-trip through the input readers") {
    // An endowment written by the library reads back unchanged.
    const auto u = read_endowment_csv(kConfigs / "data" / "oil_endowment.csv");
    const auto again = parse_endowment_csv(format_endowment_csv(u));
    CHECK(again.low().grid() == u.low().grid());
    CHECK(std::equal(again.high().density().begin(), again.high().density().end(), u.high().density().begin()));

    // Written numbers parse back to the same doubles.
    const auto dir = scratch("roundtrip");
    REQUIRE(invoke({"run", "--config", (kConfigs / "reverse_gas.json").string(), "--out", dir.string()}).code == 0);
    const auto table = csv::parse(slurp(dir / "prices.csv"));
    csv::Writer w(table.header);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        std::vector<double> row;
        for (std::size_t c = 0; c < table.header.size(); ++c)
            row.push_back(csv::parse_number(table.rows[i][c], table.line_numbers[i], table.header[c]));
        w.add_row(row);
    }
    CHECK(w.str() == slurp(dir / "prices.csv"));
    fs::remove_all(dir);
}

TEST_CASE("the installed binary reports failures through its exit status") {
    const std::string cmd = std::string("\"") + DEPLETION_CLI_PATH + "\" calibrate --rp /nonexistent.csv > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(status != 0);
    CHECK(WEXITSTATUS(status) == cli::kExitIo);
}
