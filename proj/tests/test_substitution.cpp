#include "depletion/substitution.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace depletion;

namespace {

std::vector<Technology> resource_and_backstop(double backstop_cost) {
    return {Technology{"fossil", 0, 1.0, 0.0}, Technology{"backstop", std::nullopt, 1.0, backstop_cost}};
}

CoupledResource small_resource() {
    return {"fossil", testing::uniform_1_10(), 1.0 / 44.0, ExtractionProbability::sharp()};
}

TimeSeries growing_demand(std::size_t steps = 80) {
    TimeSeries d{2010.0, 1.0, {}};
    for (std::size_t k = 0; k < steps; ++k) d.values.push_back(1.0 * std::exp(0.03 * static_cast<double>(k)));
    return d;
}

double max_of(const TimeSeries& s) { return *std::max_element(s.values.begin(), s.values.end()); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("service cost") {
    CHECK(service_cost(Technology{"a", 0, 1.0, 0.0}, 5.0) == 5.0);
    CHECK(service_cost(Technology{"b", 0, 2.0, 1.0}, 3.0) == 7.0);
    CHECK(service_cost(Technology{"c", std::nullopt, 1.0, 9.0}, 1e6) == 9.0);
    CHECK_THROWS_AS((Technology{"d", 0, 0.0, 0.0}.validate()), ValidationError);
    CHECK_NOTHROW((Technology{"e", std::nullopt, 0.0, 3.0}.validate()));
}

TEST_CASE("share steps: direction, fixed points and zero shares") {
    const ShareState even{{0.5, 0.5}, 0.1};
    CHECK(step_shares(even, {3.0, 3.0}, 1.0).shares == even.shares);
    const auto moved = step_shares(even, {2.0, 4.0}, 1.0);
    CHECK(moved.shares[0] > 0.5);
    CHECK(moved.shares[0] + moved.shares[1] == doctest::Approx(1.0).epsilon(1e-15));

    const ShareState dead{{0.0, 0.3, 0.7}, 0.5};
    const auto after = step_shares(dead, {-100.0, 5.0, 6.0}, 10.0);
    CHECK(after.shares[0] == 0.0);
    CHECK(after.shares[1] > 0.3);

    CHECK_THROWS_AS(step_shares(ShareState{{0.6, 0.5}, 0.1}, {1.0, 2.0}, 1.0), ValidationError);
    CHECK_THROWS_AS(step_shares(even, {1.0}, 1.0), ValidationError);
}

TEST_CASE("two-technology share dynamics follow the logistic closed form") {
    // dS/dt = a S (1 - S) with a = turnover (sigma(c2 - c1) - 1/2).
    const double turnover = 0.2;
    const double c1 = 4.0;
    const double c2 = 5.5;
    const double a = turnover * (logistic(c2 - c1) - 0.5);
    ShareState s{{0.3, 0.7}, turnover};
    const double dt = 0.01;
    for (int k = 1; k <= 3000; ++k) {
        s = step_shares(s, {c1, c2}, dt);
        if (k % 500 == 0) {
            const double t = k * dt;
            const double exact = 0.3 * std::exp(a * t) / (0.3 * std::exp(a * t) + 0.7);
            CHECK(s.shares[0] == doctest::Approx(exact).epsilon(1e-4));
        }
    }
}

TEST_CASE("property: shares stay on the simplex") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 5;
        std::vector<double> s(n), c(n);
        for (auto& x : s) x = u(rng);
        const double sum = std::accumulate(s.begin(), s.end(), 0.0);
        for (auto& x : s) x /= sum;
        s.back() = 1.0 - std::accumulate(s.begin(), s.end() - 1, 0.0);
        if (s.back() < 0.0) continue;
        for (auto& x : c) x = 50.0 * u(rng);
        ShareState state{s, 5.0 * u(rng)};
        for (int k = 0; k < 20; ++k) {
            state = step_shares(state, c, 0.5 + 3.0 * u(rng), 0.5);
            double total = 0.0;
            for (double x : state.shares) {
                CHECK(x >= 0.0);
                total += x;
            }
            CHECK(std::abs(total - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("property: a uniform cost shift leaves shares unchanged") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        ShareState a{{0.2, 0.3, 0.5}, 0.3};
        ShareState b = a;
        const std::vector<double> c{10.0 * u(rng), 10.0 * u(rng), 10.0 * u(rng)};
        const double shift = 100.0 * u(rng) - 50.0;
        std::vector<double> shifted = c;
        for (auto& x : shifted) x += shift;
        for (int k = 0; k < 30; ++k) {
            a = step_shares(a, c, 1.0);
            b = step_shares(b, shifted, 1.0);
        }
        for (std::size_t i = 0; i < 3; ++i) CHECK(a.shares[i] == doctest::Approx(b.shares[i]).epsilon(1e-12));
    }
}

TEST_CASE("single technology reproduces the plain reverse run") {
    const CoupledResource big{"oil", from_bins({1.0, 10.0}, {1000.0}), 0.05, ExtractionProbability::logistic(0.5)};
    TimeSeries demand{2000.0, 1.0, std::vector<double>(30, 20.0)};
    const auto coupled = run_coupled({big}, {Technology{"oil", 0, 1.0, 0.0}}, demand, ShareState{{1.0}, 0.1});
    const auto plain = run_reverse(DepletionState(big.endowment, big.nu0, 2000.0), big.f, demand);
    CHECK(coupled.prices[0].values == plain.prices.values);
    CHECK(coupled.delivered[0].values == plain.flows_delivered.values);
    CHECK(coupled.remaining[0].size() == 31);
    CHECK(coupled.remaining[0].values.back() == doctest::Approx(total_quantity(plain.final_state.remaining())));
}

TEST_CASE("zero turnover freezes the shares and matches rigid demand") {
    const auto techs = resource_and_backstop(8.0);
    const auto demand = growing_demand();
    const auto frozen = run_coupled({small_resource()}, techs, demand, ShareState{{0.9, 0.1}, 0.0});
    for (double s : frozen.shares[0].values) CHECK(s == 0.9);
    TimeSeries rigid = demand;
    for (auto& v : rigid.values) v *= 0.9;
    const auto plain = run_reverse(DepletionState(testing::uniform_1_10(), 1.0 / 44.0, 2010.0),
                                   ExtractionProbability::sharp(), rigid);
    CHECK(frozen.prices[0].values == plain.prices.values);
    CHECK(plain.diverged_at);
}

TEST_CASE("substitution damps the marginal cost of a small resource") {
    const auto techs = resource_and_backstop(6.0);
    const auto demand = growing_demand();
    const auto frozen = run_coupled({small_resource()}, techs, demand, ShareState{{0.9, 0.1}, 0.0});
    const auto free = run_coupled({small_resource()}, techs, demand, ShareState{{0.9, 0.1}, 0.5});

    CHECK(max_of(free.prices[0]) < max_of(frozen.prices[0]));
    CHECK(std::none_of(free.diverged[0].begin(), free.diverged[0].end(), [](bool b) { return b; }));
    // Fossil share falls exactly when its service cost exceeds the backstop.
    for (std::size_t k = 0; k + 1 < free.shares[0].size(); ++k) {
        const double gap = free.costs[0][k] - free.costs[1][k];
        if (gap > 0.0) CHECK(free.shares[0][k + 1] < free.shares[0][k]);
        if (gap < 0.0) CHECK(free.shares[0][k + 1] > free.shares[0][k]);
    }
    CHECK(free.shares[0].values.back() < 0.5);
    // Demand bookkeeping follows the shares.
    for (std::size_t k = 0; k < demand.size(); ++k)
        CHECK(free.demand[0][k] == doctest::Approx(demand[k] * free.shares[0][k]));
}

TEST_CASE("coupled input checks") {
    const auto demand = growing_demand(3);
    CHECK_THROWS_AS(run_coupled({small_resource()}, {Technology{"x", 3, 1.0, 0.0}}, demand, ShareState{{1.0}, 0.1}),
                    ValidationError);
    CHECK_THROWS_AS(run_coupled({small_resource()}, resource_and_backstop(1.0), demand, ShareState{{1.0}, 0.1}),
                    ValidationError);
}
