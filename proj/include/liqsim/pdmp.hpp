#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqsim/impact.hpp"
#include "liqsim/price_distribution.hpp"
#include "liqsim/random.hpp"

namespace liqsim {

/// Market-wide constants. Price moves deterministically by the drift between
/// jumps; randomness enters through the jump marks J with S+ = S (1 - J), so
/// the mark distribution must be supported strictly below 1.
struct MarketParams {
    double s0 = 1.0;   // initial price
    double mu = 0.0;   // drift per period
    double vol = 0.0;  // diffusion scale of the pre-jump motivation; unused by the flow
    double r = 0.0;    // risk-free rate used for discounting
    PriceDistribution mark_dist = PriceDistribution::uniform(-0.05, 0.05);
};

namespace detail {

inline void validate_market(const MarketParams& m) {
    if (!(m.s0 > 0.0) || !std::isfinite(m.s0)) {
        throw std::invalid_argument("initial price s0 must be positive and finite");
    }
    if (!(m.vol >= 0.0) || !std::isfinite(m.vol)) {
        throw std::invalid_argument("volatility must be nonnegative and finite");
    }
    if (!(m.r >= 0.0) || !std::isfinite(m.r)) {
        throw std::invalid_argument("risk-free rate must be nonnegative and finite");
    }
    if (!std::isfinite(m.mu)) {
        throw std::invalid_argument("drift must be finite");
    }
    if (m.mark_dist.family() != PriceDistribution::Family::uniform ||
        !(m.mark_dist.param_b() < 1.0)) {
        throw std::invalid_argument(
            "jump marks must be uniform with upper bound < 1 so prices stay positive");
    }
}

} // namespace detail

/// Full PDMP state: (time, inventory q, cash F, arrival intensity, price S).
struct PdmpState {
    double t = 0.0;
    double inventory = 0.0;
    double cash = 0.0;
    ImpactedIntensityState intensity;
    double price = 1.0;
};

/// Embedded-chain node: stage index k, jump time T_k, post-jump state.
struct ChainNode {
    int k = 0;
    double jump_time = 0.0;
    PdmpState post_jump;
};

/// Liquidation problem constants: Q0 shares, slice size Delta per unit rate,
/// deadline T, the finite grid of admissible trading rates, and the haircut
/// applied to inventory left at the deadline.
struct LiquidationConfig {
    double q0 = 70000.0;
    double slice = 100.0;
    double horizon = 10.0;
    std::vector<double> action_grid = {0.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    double terminal_haircut = 0.5;
};

namespace detail {

inline void validate_liquidation(const LiquidationConfig& c) {
    if (!(c.q0 > 0.0) || !std::isfinite(c.q0)) {
        throw std::invalid_argument("initial inventory q0 must be positive and finite");
    }
    if (!(c.slice > 0.0) || !std::isfinite(c.slice)) {
        throw std::invalid_argument("slice must be positive and finite");
    }
    if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) {
        throw std::invalid_argument("horizon must be positive and finite");
    }
    if (!(c.terminal_haircut >= 0.0 && c.terminal_haircut <= 1.0)) {
        throw std::invalid_argument("terminal haircut must lie in [0, 1]");
    }
    if (c.action_grid.empty()) {
        throw std::invalid_argument("action grid must be nonempty");
    }
    double prev = -1.0;
    for (double g : c.action_grid) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("trading rates must be nonnegative and finite");
        }
        if (!(g > prev)) {
            throw std::invalid_argument("action grid must be strictly ascending");
        }
        prev = g;
    }
    if (c.slice * c.action_grid.back() > c.q0) {
        throw std::invalid_argument("slice * max trading rate must not exceed q0");
    }
}

} // namespace detail

/// Rates from the action grid that keep inventory nonnegative; {0} when
/// nothing can be sold.
inline std::vector<double> admissible_actions(const PdmpState& state,
                                              const LiquidationConfig& config) {
    std::vector<double> out;
    for (double g : config.action_grid) {
        if (g * config.slice <= state.inventory) {
            out.push_back(g);
        }
    }
    if (out.empty()) {
        out.push_back(0.0);
    }
    return out;
}

/// Deterministic motion between jumps: time advances, the intensity follows
/// its ODE under the held rate, and the price compounds the drift. Inventory
/// and cash move only at jumps.
inline PdmpState flow(PdmpState state, double gamma, double dt, const MarketParams& params) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("flow requires dt >= 0");
    }
    state.intensity = evolve_between_jumps(state.intensity, gamma, dt);
    state.price *= std::exp(params.mu * dt);
    state.t += dt;
    return state;
}

/// Flow up to an exact target time (assigned, not accumulated, so callers can
/// rely on state.t == target afterwards).
inline PdmpState flow_to(PdmpState state, double gamma, double target_time,
                         const MarketParams& params) {
    if (target_time < state.t) {
        throw std::invalid_argument("flow_to target precedes current time");
    }
    state = flow(std::move(state), gamma, target_time - state.t, params);
    state.t = target_time;
    return state;
}

struct JumpDraw {
    std::optional<double> time; // empty when no arrival before the horizon
    double mark = 0.0;          // J, applied as S+ = S (1 - J)
};

/// Thinning against the deterministic intensity path implied by the flow.
inline JumpDraw sample_next_jump(const PdmpState& state, double gamma, std::mt19937_64& rng,
                                 const MarketParams& params, double horizon) {
    if (!(state.t < horizon)) {
        throw std::invalid_argument("sample_next_jump requires state.t < horizon");
    }
    const double fixed_point =
        impact_value(state.intensity.impact, gamma) / state.intensity.decay;
    double lambda = state.intensity.level;
    double t = state.t;
    for (;;) {
        const double bound = std::max(lambda, fixed_point);
        if (!(bound > 0.0)) {
            return {};
        }
        const double wait = detail::exponential_draw(rng, bound);
        t += wait;
        if (t >= horizon) {
            return {};
        }
        lambda = fixed_point + (lambda - fixed_point) * std::exp(-state.intensity.decay * wait);
        if (detail::canonical(rng) * bound < lambda) {
            return {t, params.mark_dist.sample(rng)};
        }
    }
}

inline JumpDraw sample_next_jump(const PdmpState& state, double gamma, RngSeed seed,
                                 const MarketParams& params, double horizon) {
    auto rng = make_rng(seed);
    return sample_next_jump(state, gamma, rng, params, horizon);
}

/// Discounted proceeds of trading Delta gamma at this jump; identical to the
/// cash increment applied by jump().
inline double reward(const PdmpState& pre_state, double gamma, const LiquidationConfig& config,
                     const MarketParams& params) {
    if (!(gamma >= 0.0) || gamma * config.slice > pre_state.inventory) {
        throw std::logic_error("reward called with an inadmissible trading rate");
    }
    return std::exp(-params.r * pre_state.t) * pre_state.price * config.slice * gamma;
}

/// Jump transition at an arrival: trade Delta gamma shares, collect the
/// discounted proceeds, and let the intensity jump by sigma.
inline PdmpState jump(PdmpState state, double gamma, const LiquidationConfig& config,
                      const MarketParams& params) {
    if (!(gamma >= 0.0) || gamma * config.slice > state.inventory) {
        throw std::logic_error("jump called with an inadmissible trading rate");
    }
    state.cash += reward(state, gamma, config, params);
    state.inventory -= gamma * config.slice;
    state.intensity = apply_jump(state.intensity).state;
    return state;
}

/// Credit for inventory remaining at the deadline: a (1 - haircut) fraction
/// of its discounted value. Zero when the position is fully liquidated.
inline double terminal_credit(const PdmpState& state, const LiquidationConfig& config,
                              const MarketParams& params) {
    if (state.t < config.horizon) {
        throw std::logic_error("terminal_credit requires state.t >= horizon");
    }
    return (1.0 - config.terminal_haircut) * std::exp(-params.r * config.horizon) *
           state.price * state.inventory;
}

inline PdmpState initial_state(const LiquidationConfig& config, const MarketParams& params,
                               const ImpactedIntensityState& intensity0) {
    detail::validate_liquidation(config);
    detail::validate_market(params);
    detail::validate_intensity_state(intensity0);
    return {0.0, config.q0, 0.0, intensity0, params.s0};
}

/// One simulated path of the controlled PDMP. nodes[k] is the embedded-chain
/// node Z_k (node 0 is the initial state); actions[k] is the rate held from
/// node k onwards and marks[k] the mark realized at node k+1.
struct Trajectory {
    std::vector<ChainNode> nodes;
    std::vector<double> actions;
    std::vector<double> marks;
    double trade_reward = 0.0;
    double terminal_reward = 0.0;
    PdmpState final_state;

    [[nodiscard]] double total_reward() const { return trade_reward + terminal_reward; }
};

/// Simulates one trajectory under a policy mapping (stage, post-jump state)
/// to an admissible trading rate.
template <typename PolicyFn>
Trajectory simulate_trajectory(const PdmpState& initial, PolicyFn&& policy,
                               const LiquidationConfig& config, const MarketParams& params,
                               std::mt19937_64& rng) {
    constexpr int kMaxJumps = 10'000'000;
    Trajectory traj;
    PdmpState state = initial;
    traj.nodes.push_back({0, state.t, state});
    int k = 0;
    for (;;) {
        const double gamma = policy(k, state);
        traj.actions.push_back(gamma);
        const JumpDraw draw = sample_next_jump(state, gamma, rng, params, config.horizon);
        if (!draw.time) {
            state = flow_to(std::move(state), gamma, config.horizon, params);
            traj.terminal_reward = terminal_credit(state, config, params);
            state.cash += traj.terminal_reward;
            break;
        }
        state = flow_to(std::move(state), gamma, *draw.time, params);
        state.price *= 1.0 - draw.mark;
        traj.trade_reward += reward(state, gamma, config, params);
        state = jump(std::move(state), gamma, config, params);
        ++k;
        traj.nodes.push_back({k, state.t, state});
        traj.marks.push_back(draw.mark);
        if (k >= kMaxJumps) {
            throw std::runtime_error("trajectory exceeded the jump cap; intensity diverged");
        }
    }
    traj.final_state = state;
    return traj;
}

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "k,T_k,inventory,cash,intensity,price,gamma\n";
    char buf[220];
    for (std::size_t i = 0; i < traj.nodes.size(); ++i) {
        const ChainNode& node = traj.nodes[i];
        const PdmpState& s = node.post_jump;
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", node.k,
                      node.jump_time, s.inventory, s.cash, s.intensity.level, s.price,
                      traj.actions[i]);
        out << buf;
    }
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    write_trajectory_csv(traj, out);
}

} // namespace liqsim
