#include "depletion/scenario.hpp"

#include "depletion/csv.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace depletion;
namespace fs = std::filesystem;

namespace {

const char* kMinimalForward = R"({
  "horizon": {"start": 2010, "end": 2020, "dt": 1},
  "mode": "forward",
  "resources": [{
    "name": "oil",
    "endowment": {"edges": [1, 10], "density": [10]},
    "nu0_inverse": 20,
    "price": {"linear": {"start": 5, "slope": 0.1}}
  }]
})";

fs::path scratch_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("depletion_scenario_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool mentions(const ConfigError& e, const std::string& needle) {
    return std::any_of(e.errors().begin(), e.errors().end(),
                       [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

ConfigError config_error(const std::string& json, const fs::path& base = {}) {
    try {
        (void)validate(parse_scenario(json, base));
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a configuration error");
    return ConfigError({});
}

}  // namespace

TEST_CASE("minimal forward config validates") {
    const auto s = validate(parse_scenario(kMinimalForward, {}));
    CHECK(s.steps == 10);
    REQUIRE(s.resources.size() == 1);
    const auto& oil = s.resources[0];
    CHECK(oil.nu0.inverse_mean == 20.0);
    CHECK(oil.path.t0 == 2010.0);
    CHECK(oil.path.size() == 10);
    CHECK(oil.path[0] == 5.0);
    CHECK(oil.f.kind == ProbabilityKind::logistic);
    CHECK(oil.f.width == 0.5);
    CHECK(total_quantity(oil.central()) == 90.0);
    CHECK(s.run_mode() == RunMode::forward);
}

TEST_CASE("linear path arithmetic") {
    const Horizon h{2010.0, 2030.0, 1.0};
    const auto flat = linear_path(5.0, 0.0, h);
    for (double v : flat.values) CHECK(v == 5.0);
    const auto rising = linear_path(5.0, 0.1, h);
    CHECK(rising[10] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(rising.time_at(10) == 2020.0);
    const auto falling = linear_path(5.0, -0.2, h);
    CHECK(falling[10] == doctest::Approx(3.0));
    CHECK_THROWS_AS(linear_path(1.0, 0.0, Horizon{2010.0, 2011.0, 0.3}), ValidationError);
}

TEST_CASE("piecewise-linear path is flat outside its breakpoints") {
    const auto p = piecewise_linear_path({{2012.0, 2.0}, {2014.0, 6.0}}, Horizon{2010.0, 2017.0, 1.0});
    CHECK(p.values == std::vector<double>{2.0, 2.0, 2.0, 4.0, 6.0, 6.0, 6.0});
}

TEST_CASE("fixed shares split a total") {
    const TimeSeries total{2010.0, 1.0, {494.0, 494.0}};
    const auto parts = fixed_share_demand(total, {10.0 / 494.0, 484.0 / 494.0});
    CHECK(parts[0][0] == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(fixed_share_demand(total, {1.0})[0].values == total.values);
    CHECK_THROWS_AS(fixed_share_demand(total, {0.6, 0.5}), ValidationError);
    CHECK_THROWS_AS(fixed_share_demand(total, {1.2, -0.2}), ValidationError);
}

TEST_CASE("property: fixed shares conserve the total") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> shares(1 + trial % 6);
        for (auto& s : shares) s = u(rng);
        double sum = 0.0;
        for (double s : shares) sum += s;
        for (auto& s : shares) s /= sum;
        TimeSeries total{0.0, 1.0, {}};
        for (int k = 0; k < 20; ++k) total.values.push_back(1000.0 * u(rng));
        const auto parts = fixed_share_demand(total, shares);
        for (std::size_t k = 0; k < total.size(); ++k) {
            double back = 0.0;
            for (const auto& p : parts) back += p[k];
            CHECK(testing::rel_close(back, total[k], 1e-12));
        }
    }
}

TEST_CASE("default nu0 for oil resolves to 44") {
    std::string json = kMinimalForward;
    json.replace(json.find("\"nu0_inverse\": 20"), 17, "\"nu0_default\": \"oil\"");
    const auto s = validate(parse_scenario(json, {}));
    CHECK(s.resources[0].nu0.inverse_mean == 44.0);
    CHECK(s.resources[0].nu0.inverse_std == 10.0);
}

TEST_CASE("validation is idempotent") {
    const auto once = validate(parse_scenario(kMinimalForward, {}));
    const auto twice = validate(once.config);
    CHECK(twice.steps == once.steps);
    CHECK(twice.resources[0].path.values == once.resources[0].path.values);
    CHECK(twice.resources[0].nu0.inverse_mean == once.resources[0].nu0.inverse_mean);
}

TEST_CASE("demand path of the wrong length names the resource") {
    const auto e = config_error(R"({
      "horizon": {"start": 2010, "end": 2015, "dt": 1},
      "mode": "reverse",
      "resources": [{
        "name": "gas",
        "endowment": {"edges": [1, 10], "density": [10]},
        "nu0_inverse": 56,
        "demand": {"values": [1, 2, 3]}
      }]
    })");
    CHECK(mentions(e, "resources.gas.demand"));
    CHECK(mentions(e, "3 values"));
}

TEST_CASE("every problem is reported at once, with locators") {
    const auto e = config_error(R"({
      "horizon": {"start": 2010, "end": 2015, "dt": 0.7},
      "mode": "reverse",
      "resources": [
        {"name": "a", "endowment": {"edges": [1, 10], "density": [10]}, "nu0_inverse": -3,
         "demand": {"linear": {"start": 1, "slope": 0}}},
        {"name": "b", "nu0_inverse": 40, "demand": {"linear": {"start": 1, "slope": 0}}},
        {"name": "c", "endowment": {"edges": [1, 10], "density": [10]}, "nu0_default": "peat",
         "demand": {"linear": {"start": 1, "slope": 0}, "unit": "furlongs"}}
      ],
      "inversion": {"tolerance": 0}
    })");
    CHECK(e.errors().size() >= 5);
    CHECK(mentions(e, "horizon.dt"));
    CHECK(mentions(e, "resources.a.nu0_inverse"));
    CHECK(mentions(e, "resources.b: missing required 'endowment'"));
    CHECK(mentions(e, "resources.c.nu0_default"));
    CHECK(mentions(e, "inversion"));
}

TEST_CASE("mode-specific assumptions are enforced") {
    std::string json = kMinimalForward;
    json.replace(json.find("\"forward\""), 9, "\"reverse\"");
    const auto e = config_error(json);
    CHECK(mentions(e, "resources.oil.price: not allowed in reverse mode"));
    CHECK(mentions(e, "resources.oil.demand: required"));

    CHECK(mentions(config_error(R"({"horizon": {"start": 0, "end": 1, "dt": 1}, "mode": "sideways",
                                    "resources": []})"),
                   "mode"));
    CHECK(mentions(config_error("{not json"), "invalid JSON"));
}

TEST_CASE("shared demand splits by share and checks the sum") {
    const std::string base = R"({
      "horizon": {"start": 2010, "end": 2012, "dt": 1},
      "mode": "reverse",
      "resources": [
        {"name": "nuclear", "endowment": {"edges": [1, 10], "density": [100]}, "nu0_default": "uranium"},
        {"name": "rest", "endowment": {"edges": [1, 10], "density": [1000]}, "nu0_inverse": 50}
      ],
      "shared_demand": {"total": {"values": [494, 494]}, "shares": SHARES}
    })";
    auto with = [&](const std::string& shares) {
        auto s = base;
        s.replace(s.find("SHARES"), 6, shares);
        return s;
    };
    const auto s = validate(parse_scenario(with(R"({"nuclear": 0.020242914979757085, "rest": 0.979757085020242915})"), {}));
    CHECK(s.resources[0].path[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(s.resources[0].nu0.inverse_mean == 16.0);
    const auto e = config_error(with(R"({"nuclear": 0.6, "rest": 0.5})"));
    CHECK(mentions(e, "shared_demand.shares"));
    CHECK(mentions(config_error(with(R"({"nuclear": 1.0, "coal": 0.0})")), "shared_demand.shares.coal: unknown"));
}

TEST_CASE("files, units and calibration references resolve relative to the config") {
    const auto dir = scratch_dir("files");
    csv::write_file(dir / "endowment.csv",
                    "cost_low,cost_high,density_low,density_high\n"
                    "1,5,1,2\n"
                    "5,10,0.5,1\n");
    csv::write_file(dir / "rp.csv",
                    "year,region,reserves,production\n"
                    "2000,a,1000,20\n2000,b,320,10\n2001,a,1000,20\n2001,b,320,10\n");
    csv::write_file(dir / "price.csv", "year,value\n2010,30.589316\n2011,61.178632\n");
    csv::write_file(dir / "scenario.json", R"({
      "horizon": {"start": 2010, "end": 2012, "dt": 1},
      "mode": "forward",
      "resources": [{
        "name": "oil",
        "endowment": {"csv": "endowment.csv", "energy_unit": "Gboe", "cost_unit": "$/boe"},
        "nu0_calibration": {"csv": "rp.csv", "window": [2000, 2001], "scope": "global"},
        "extraction": {"kind": "erf", "width": 1.5},
        "price": {"csv": "price.csv", "unit": "$/boe"}
      }]
    })");
    const auto s = validate(read_scenario(dir / "scenario.json"));
    const auto& oil = s.resources[0];
    CHECK(oil.nu0.inverse_mean == doctest::Approx(44.0));
    CHECK(oil.path[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(oil.path[1] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(oil.f.kind == ProbabilityKind::erf);
    // 4 + 2.5 Gboe low case; 1 Gboe = 6.1178632 EJ.
    CHECK(total_quantity(oil.endowment.low()) == doctest::Approx(6.5 * 6.1178632).epsilon(1e-12));
    CHECK(oil.endowment.low().grid().back() == doctest::Approx(10.0 / 6.1178632).epsilon(1e-12));

    csv::write_file(dir / "bad.json", R"({
      "horizon": {"start": 2010, "end": 2012, "dt": 1},
      "mode": "forward",
      "resources": [{"name": "oil", "endowment": "missing.csv", "nu0_inverse": 44,
                     "price": {"csv": "price.csv"}}]
    })");
    try {
        (void)validate(read_scenario(dir / "bad.json"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "resources.oil.endowment"));
    }
    fs::remove_all(dir);
}

TEST_CASE("coupled and ensemble sections") {
    const auto s = validate(parse_scenario(R"({
      "horizon": {"start": 2010, "end": 2020, "dt": 1},
      "mode": "coupled",
      "resources": [{"name": "oil", "endowment": {"edges": [1, 10], "density": [10]}, "nu0_inverse": 44}],
      "coupled": {
        "total_demand": {"linear": {"start": 1, "slope": 0.05}},
        "technologies": [{"name": "engine", "resource": "oil"}, {"name": "solar", "offset": 6}],
        "initial_shares": [0.9, 0.1],
        "turnover": 0.5
      }
    })", {}));
    REQUIRE(s.coupled);
    CHECK(s.coupled->technologies[0].resource == std::optional<std::size_t>{0});
    CHECK_FALSE(s.coupled->technologies[1].resource);
    CHECK(s.coupled->initial.turnover == 0.5);
    CHECK(s.coupled->total_demand[10 - 1] == doctest::Approx(1.45));

    std::string json = kMinimalForward;
    json.insert(json.rfind('}'), R"(, "ensemble": {"runs": 10, "seed": 3, "sampling": {"fixed": 0.25}})");
    const auto e = validate(parse_scenario(json, {}));
    REQUIRE(e.ensemble);
    CHECK(e.ensemble->runs == 10);
    CHECK(e.ensemble->seed == 3);
    std::mt19937_64 g;
    CHECK(e.ensemble->sampling(g) == 0.25);

    std::string bad = kMinimalForward;
    bad.insert(bad.rfind('}'), R"(, "ensemble": {"runs": 0, "percentiles": [0.9, 0.1]})");
    CHECK(mentions(config_error(bad), "ensemble"));
}
