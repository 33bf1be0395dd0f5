#include "depletion/substitution.hpp"

#include <algorithm>
#include <cmath>

namespace depletion {

namespace {

constexpr double kMaxShareMove = 0.2;

std::vector<double> share_rates(const std::vector<double>& s, const std::vector<double>& costs, double turnover,
                                double width) {
    std::vector<double> rate(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0) continue;
        double pull = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (j == i || s[j] == 0.0) continue;
            pull += s[j] * (1.0 / (1.0 + std::exp(-(costs[j] - costs[i]) / width)) - 0.5);
        }
        rate[i] = s[i] * turnover * pull;
    }
    return rate;
}

}  // namespace

void Technology::validate() const {
    if (resource && !(intensity > 0.0 && std::isfinite(intensity)))
        throw ValidationError("technology '" + name + "' needs intensity > 0");
    if (!std::isfinite(offset)) throw ValidationError("technology '" + name + "' has a non-finite cost offset");
}

void ShareState::validate() const {
    if (shares.empty()) throw ValidationError("share state is empty");
    double sum = 0.0;
    for (double s : shares) {
        if (!(s >= 0.0 && std::isfinite(s))) throw ValidationError("shares must be finite and >= 0");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("shares must sum to 1");
    if (!(turnover >= 0.0 && std::isfinite(turnover))) throw ValidationError("turnover rate must be >= 0");
}

double service_cost(const Technology& tech, double marginal_cost) {
    if (!tech.resource) return tech.offset;
    return tech.intensity * marginal_cost + tech.offset;
}

ShareState step_shares(const ShareState& state, const std::vector<double>& costs, double dt,
                       double preference_width) {
    state.validate();
    if (costs.size() != state.shares.size()) throw ValidationError("one cost per technology required");
    if (!(dt > 0.0)) throw DomainError("step length must be > 0");
    if (!(preference_width > 0.0)) throw ValidationError("preference width must be > 0");

    ShareState next = state;
    double remaining = dt;
    while (remaining > 0.0) {
        const auto rate = share_rates(next.shares, costs, next.turnover, preference_width);
        double fastest = 0.0;
        for (double r : rate) fastest = std::max(fastest, std::abs(r));
        if (fastest == 0.0) break;
        const double h = std::min(remaining, kMaxShareMove / fastest);
        double sum = 0.0;
        for (std::size_t i = 0; i < rate.size(); ++i) {
            next.shares[i] = std::max(0.0, next.shares[i] + h * rate[i]);
            sum += next.shares[i];
        }
        for (double& s : next.shares) s /= sum;
        remaining = h < remaining ? remaining - h : 0.0;
    }
    return next;
}

CoupledResult run_coupled(const std::vector<CoupledResource>& resources, const std::vector<Technology>& technologies,
                          const TimeSeries& total_demand, const ShareState& initial, const CoupledSettings& settings) {
    total_demand.validate();
    initial.validate();
    settings.inversion.validate();
    if (technologies.size() != initial.shares.size()) throw ValidationError("one initial share per technology required");
    for (const auto& tech : technologies) {
        tech.validate();
        if (tech.resource && *tech.resource >= resources.size())
            throw ValidationError("technology '" + tech.name + "' links to an unknown resource");
    }
    for (std::size_t k = 0; k < total_demand.size(); ++k) {
        if (total_demand[k] < 0.0) throw ValidationError("total demand at step " + std::to_string(k) + " is negative");
    }

    const auto series = [&] { return TimeSeries{total_demand.t0, total_demand.dt, {}}; };
    CoupledResult out;
    std::vector<DepletionState> states;
    for (const auto& r : resources) {
        r.f.validate();
        states.emplace_back(r.endowment, r.nu0, total_demand.t0);
        out.prices.push_back(series());
        out.demand.push_back(series());
        out.delivered.push_back(series());
        out.unmet.push_back(series());
        out.diverged.emplace_back();
        out.remaining.push_back(TimeSeries{total_demand.t0, total_demand.dt, {total_quantity(r.endowment)}});
    }
    for (std::size_t i = 0; i < technologies.size(); ++i) {
        out.shares.push_back(series());
        out.costs.push_back(series());
    }

    ShareState shares = initial;
    const double dt = total_demand.dt;
    for (std::size_t k = 0; k < total_demand.size(); ++k) {
        std::vector<double> resource_demand(resources.size(), 0.0);
        for (std::size_t i = 0; i < technologies.size(); ++i) {
            if (technologies[i].resource)
                resource_demand[*technologies[i].resource] += total_demand[k] * shares.shares[i] * technologies[i].intensity;
        }

        std::vector<double> marginal(resources.size());
        for (std::size_t r = 0; r < resources.size(); ++r) {
            auto step_out = invert_step(states[r], resources[r].f, resource_demand[r], dt, settings.inversion);
            const bool diverged = step_out.divergence.has_value();
            marginal[r] = step_out.price;
            out.prices[r].values.push_back(step_out.price);
            out.demand[r].values.push_back(resource_demand[r]);
            out.delivered[r].values.push_back(step_out.delivered);
            out.unmet[r].values.push_back(diverged ? resource_demand[r] - step_out.delivered : 0.0);
            out.diverged[r].push_back(diverged);
            states[r] = std::move(step_out.state);
            out.remaining[r].values.push_back(total_quantity(states[r].remaining()));
        }

        std::vector<double> costs(technologies.size());
        for (std::size_t i = 0; i < technologies.size(); ++i) {
            const auto& tech = technologies[i];
            costs[i] = service_cost(tech, tech.resource ? marginal[*tech.resource] : 0.0);
            out.shares[i].values.push_back(shares.shares[i]);
            out.costs[i].values.push_back(costs[i]);
        }
        if (shares.turnover > 0.0) shares = step_shares(shares, costs, dt, settings.preference_width);
    }
    out.final_states = std::move(states);
    return out;
}

}  // namespace depletion
