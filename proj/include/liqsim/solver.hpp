#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "liqsim/errors.hpp"
#include "liqsim/pdmp.hpp"
#include "liqsim/random.hpp"
#include "liqsim/report.hpp"

namespace liqsim {

/// Reduced state quantized by the solver: (inventory, intensity level, price,
/// time within horizon). The stage index carries the jump count.
using ReducedState = std::array<double, 4>;

inline ReducedState reduce(const PdmpState& s) {
    return {s.inventory, s.intensity.level, s.price, s.t};
}

struct StageGrid {
    std::vector<ReducedState> points;
    std::array<double, 4> scales{1.0, 1.0, 1.0, 1.0}; // per-coordinate metric scale
};

/// One grid per stage k = 0..n; stage k quantizes the embedded-chain state at
/// the k-th jump (stage 0 is the initial state).
struct QuantGrid {
    std::vector<StageGrid> stages;

    [[nodiscard]] int stage_count() const { return static_cast<int>(stages.size()); }
};

namespace detail {

constexpr std::uint64_t kTrainingPhase = 0x7261696e'00000000ULL;
constexpr std::uint64_t kTransitionPhase = 0x7472616e'00000000ULL;
constexpr std::uint64_t kEvalPhase = 0x6576616c'00000000ULL;

inline RngSeed derive_stream(RngSeed base, std::uint64_t phase, std::uint64_t index) {
    return base.with_stream(splitmix64(splitmix64(base.stream ^ phase) + index));
}

/// Runs fn(begin, end) over a partition of [0, total); single-threaded when
/// threads <= 1. Chunks are fixed by total alone so results that are written
/// to preallocated slots do not depend on the thread count.
template <typename Fn>
void parallel_chunks(std::size_t total, int threads, Fn&& fn) {
    if (threads <= 1 || total < 2) {
        fn(std::size_t{0}, total);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), total);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(total, begin + chunk);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([begin, end, &fn] { fn(begin, end); });
    }
    for (auto& t : pool) {
        t.join();
    }
}

inline double quantile_of_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t m = sorted.size();
    if (m == 1) {
        return sorted[0];
    }
    const double pos = p * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, m - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace detail

/// Per-stage grids by per-coordinate quantile placement on the sampled chain
/// states; Voronoi metric scales are the per-coordinate sample standard
/// deviations. Deterministic given the samples.
inline QuantGrid build_grid(const std::vector<Trajectory>& paths, int n_stages,
                            int points_per_stage) {
    if (n_stages < 0 || points_per_stage < 1) {
        throw std::invalid_argument("build_grid requires n_stages >= 0 and N >= 1");
    }
    QuantGrid grid;
    grid.stages.resize(static_cast<std::size_t>(n_stages) + 1);
    for (int k = 0; k <= n_stages; ++k) {
        std::array<std::vector<double>, 4> coords;
        for (const Trajectory& path : paths) {
            if (static_cast<int>(path.nodes.size()) > k) {
                const ReducedState x = reduce(path.nodes[static_cast<std::size_t>(k)].post_jump);
                for (std::size_t c = 0; c < 4; ++c) {
                    coords[c].push_back(x[c]);
                }
            }
        }
        const std::size_t m = coords[0].size();
        if (m < static_cast<std::size_t>(points_per_stage)) {
            throw insufficient_data_error("stage " + std::to_string(k) + " has " +
                                          std::to_string(m) + " samples; need at least " +
                                          std::to_string(points_per_stage) +
                                          " (reduce stages or add training paths)");
        }
        StageGrid& sg = grid.stages[static_cast<std::size_t>(k)];
        for (std::size_t c = 0; c < 4; ++c) {
            std::sort(coords[c].begin(), coords[c].end());
            double mean = 0.0;
            for (double v : coords[c]) {
                mean += v;
            }
            mean /= static_cast<double>(m);
            double ss = 0.0;
            for (double v : coords[c]) {
                ss += (v - mean) * (v - mean);
            }
            const double sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
            sg.scales[c] = sd > 1e-12 ? sd : 1.0;
        }
        sg.points.resize(static_cast<std::size_t>(points_per_stage));
        for (int i = 0; i < points_per_stage; ++i) {
            const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(points_per_stage);
            for (std::size_t c = 0; c < 4; ++c) {
                sg.points[static_cast<std::size_t>(i)][c] = detail::quantile_of_sorted(coords[c], p);
            }
        }
    }
    return grid;
}

/// Index of the nearest stage-k grid point under the scaled Euclidean metric;
/// ties break toward the lowest index.
inline int project(const ReducedState& x, const QuantGrid& grid, int stage) {
    if (stage < 0 || stage >= grid.stage_count()) {
        throw std::invalid_argument("project: stage out of range");
    }
    const StageGrid& sg = grid.stages[static_cast<std::size_t>(stage)];
    if (sg.points.empty()) {
        throw std::invalid_argument("project: empty stage grid");
    }
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sg.points.size(); ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            const double z = (x[c] - sg.points[i][c]) / sg.scales[c];
            d += z * z;
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

/// Estimated one-step kernel for stage k under each action: row-stochastic
/// probabilities over the stage-(k+1) points plus one trailing column for
/// "no further jump before the deadline", and the expected one-step reward
/// (trade proceeds, or the terminal credit when absorbed).
struct StageTransitions {
    std::vector<std::vector<std::vector<double>>> prob; // [action][point][next or absorb]
    std::vector<std::vector<double>> reward;            // [action][point]
    std::vector<std::vector<char>> admissible;          // [action][point]
    std::vector<std::vector<char>> flagged;             // row had no usable samples
};

struct TransitionModel {
    std::vector<double> actions;
    std::vector<StageTransitions> stages;        // size n
    std::vector<std::vector<char>> cell_reached; // [stage][point], diagnostic
};

/// Expected credit of holding (q, S) from epoch time t to the deadline with
/// no further trades: price drifts deterministically and symmetric marks drop
/// out in expectation.
inline double terminal_value_at(double inventory, double price, double t,
                                const LiquidationConfig& config, const MarketParams& market) {
    return (1.0 - config.terminal_haircut) * std::exp(-market.r * config.horizon) * inventory *
           price * std::exp(market.mu * (config.horizon - t));
}

/// Monte Carlo estimate of the quantized transition kernel. mc_paths is the
/// per-stage-action budget, split evenly over the grid points (at least 100
/// samples per point as a precondition).
inline TransitionModel estimate_transitions(const QuantGrid& grid,
                                            const LiquidationConfig& config,
                                            const MarketParams& market,
                                            const ImpactedIntensityState& intensity_template,
                                            long long mc_paths, RngSeed seed, int threads = 1) {
    detail::validate_liquidation(config);
    detail::validate_market(market);
    if (grid.stage_count() < 2) {
        throw std::invalid_argument("estimate_transitions needs at least two stage grids");
    }
    if (config.action_grid.front() != 0.0) {
        throw std::invalid_argument("solver requires the action grid to include rate 0");
    }
    std::size_t max_points = 0;
    for (const StageGrid& sg : grid.stages) {
        max_points = std::max(max_points, sg.points.size());
    }
    if (mc_paths < 100LL * static_cast<long long>(max_points)) {
        throw std::invalid_argument("mc_paths must be at least 100 * grid points per stage");
    }

    TransitionModel model;
    model.actions = config.action_grid;
    const int n = grid.stage_count() - 1;
    const int n_actions = static_cast<int>(model.actions.size());
    model.stages.resize(static_cast<std::size_t>(n));
    model.cell_reached.assign(grid.stages.size(), {});
    for (int k = 0; k <= n; ++k) {
        model.cell_reached[static_cast<std::size_t>(k)].assign(
            grid.stages[static_cast<std::size_t>(k)].points.size(), k == 0 ? 1 : 0);
    }

    for (int k = 0; k < n; ++k) {
        StageTransitions& st = model.stages[static_cast<std::size_t>(k)];
        const auto& points = grid.stages[static_cast<std::size_t>(k)].points;
        const std::size_t next_cells = grid.stages[static_cast<std::size_t>(k) + 1].points.size();
        const std::size_t rows = points.size();
        st.prob.assign(static_cast<std::size_t>(n_actions),
                       std::vector<std::vector<double>>(rows, std::vector<double>(next_cells + 1, 0.0)));
        st.reward.assign(static_cast<std::size_t>(n_actions), std::vector<double>(rows, 0.0));
        st.admissible.assign(static_cast<std::size_t>(n_actions), std::vector<char>(rows, 0));
        st.flagged.assign(static_cast<std::size_t>(n_actions), std::vector<char>(rows, 0));

        const long long mc_per_point = mc_paths / static_cast<long long>(rows);
        const std::size_t total_rows = static_cast<std::size_t>(n_actions) * rows;
        detail::parallel_chunks(total_rows, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t idx = begin; idx < end; ++idx) {
                const std::size_t a = idx / rows;
                const std::size_t i = idx % rows;
                const double gamma = model.actions[a];
                const ReducedState& pt = points[i];
                const double q = pt[0];
                if (gamma * config.slice > q) {
                    continue; // inadmissible; row never queried
                }
                st.admissible[a][i] = 1;

                PdmpState state;
                state.t = std::min(pt[3], config.horizon * (1.0 - 1e-12));
                state.inventory = q;
                state.cash = 0.0;
                state.intensity = intensity_template;
                state.intensity.level = std::max(0.0, pt[1]);
                state.price = pt[2];

                // Stream ids must be unique across every (stage, action, point)
                // row, so stride by the global maximum point count.
                const std::uint64_t row_id =
                    (static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n_actions) + a) *
                        static_cast<std::uint64_t>(max_points) +
                    i;
                auto rng = make_rng(detail::derive_stream(seed, detail::kTransitionPhase, row_id));

                const double absorb_value =
                    terminal_value_at(state.inventory, state.price, state.t, config, market);
                auto& row = st.prob[a][i];
                double reward_sum = 0.0;
                long long used = 0;
                for (long long s = 0; s < mc_per_point; ++s) {
                    const JumpDraw draw =
                        sample_next_jump(state, gamma, rng, market, config.horizon);
                    ++used;
                    if (!draw.time) {
                        row[next_cells] += 1.0;
                        reward_sum += absorb_value;
                        continue;
                    }
                    PdmpState landed = flow_to(state, gamma, *draw.time, market);
                    landed.price *= 1.0 - draw.mark;
                    reward_sum += reward(landed, gamma, config, market);
                    landed = jump(std::move(landed), gamma, config, market);
                    const int j = project(reduce(landed), grid, k + 1);
                    row[static_cast<std::size_t>(j)] += 1.0;
                }
                if (used == 0) {
                    st.flagged[a][i] = 1;
                    row.assign(next_cells + 1, 0.0);
                    row[next_cells] = 1.0;
                    continue;
                }
                for (double& p : row) {
                    p /= static_cast<double>(used);
                }
                st.reward[a][i] = reward_sum / static_cast<double>(used);
            }
        });

        auto& reached_next = model.cell_reached[static_cast<std::size_t>(k) + 1];
        for (int a = 0; a < n_actions; ++a) {
            for (std::size_t i = 0; i < rows; ++i) {
                if (!st.admissible[static_cast<std::size_t>(a)][i]) {
                    continue;
                }
                for (std::size_t j = 0; j < next_cells; ++j) {
                    if (st.prob[static_cast<std::size_t>(a)][i][j] > 0.0) {
                        reached_next[j] = 1;
                    }
                }
            }
        }
    }
    return model;
}

struct ValueTable {
    std::vector<std::vector<double>> values; // [stage][point], stage 0..n
};

struct Policy {
    std::vector<double> actions;
    std::vector<std::vector<int>> choice; // [stage][point], stage 0..n-1

    [[nodiscard]] double gamma(int stage, int point) const {
        return actions[static_cast<std::size_t>(
            choice[static_cast<std::size_t>(stage)][static_cast<std::size_t>(point)])];
    }
};

/// One Bellman backup: for each point the best admissible action by expected
/// one-step reward plus expected continuation. Ties break toward the smaller
/// trading rate.
inline std::pair<std::vector<double>, std::vector<int>> bellman_sweep(
    const StageTransitions& st, const std::vector<double>& next_values) {
    const std::size_t n_actions = st.prob.size();
    const std::size_t rows = st.reward.empty() ? 0 : st.reward.front().size();
    std::vector<double> values(rows, 0.0);
    std::vector<int> choice(rows, -1);
    for (std::size_t i = 0; i < rows; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = -1;
        for (std::size_t a = 0; a < n_actions; ++a) {
            if (!st.admissible[a][i]) {
                continue;
            }
            const auto& row = st.prob[a][i];
            double q = st.reward[a][i];
            for (std::size_t j = 0; j < next_values.size(); ++j) {
                q += row[j] * next_values[j];
            }
            if (q > best) {
                best = q;
                best_a = static_cast<int>(a);
            }
        }
        if (best_a < 0) {
            throw std::logic_error(
                "bellman_sweep: point with no admissible action; include 0 in the action grid");
        }
        values[i] = best;
        choice[i] = best_a;
    }
    return {std::move(values), std::move(choice)};
}

/// Backward dynamic program over the quantized chain. The terminal stage is
/// valued at the no-further-trading credit; interior stages maximize reward
/// plus expected continuation over admissible rates.
inline std::pair<ValueTable, Policy> backward_dp(const QuantGrid& grid,
                                                 const TransitionModel& trans,
                                                 const LiquidationConfig& config,
                                                 const MarketParams& market) {
    const int n = grid.stage_count() - 1;
    if (static_cast<int>(trans.stages.size()) != n) {
        throw std::logic_error("backward_dp: transition model does not match the grid stages");
    }
    for (int k = 0; k < n; ++k) {
        const auto& st = trans.stages[static_cast<std::size_t>(k)];
        const std::size_t rows = grid.stages[static_cast<std::size_t>(k)].points.size();
        const std::size_t next_cells = grid.stages[static_cast<std::size_t>(k) + 1].points.size();
        if (st.prob.size() != trans.actions.size() || st.reward.size() != trans.actions.size()) {
            throw std::logic_error("backward_dp: transition model action dimension mismatch");
        }
        for (std::size_t a = 0; a < st.prob.size(); ++a) {
            if (st.prob[a].size() != rows || st.reward[a].size() != rows) {
                throw std::logic_error("backward_dp: transition model point dimension mismatch");
            }
            for (const auto& row : st.prob[a]) {
                if (row.size() != next_cells + 1) {
                    throw std::logic_error("backward_dp: transition row width mismatch");
                }
            }
        }
    }

    ValueTable table;
    Policy policy;
    policy.actions = trans.actions;
    table.values.resize(static_cast<std::size_t>(n) + 1);
    policy.choice.resize(static_cast<std::size_t>(n));

    auto& terminal = table.values[static_cast<std::size_t>(n)];
    const auto& last_points = grid.stages[static_cast<std::size_t>(n)].points;
    terminal.resize(last_points.size());
    for (std::size_t i = 0; i < last_points.size(); ++i) {
        const ReducedState& pt = last_points[i];
        terminal[i] = terminal_value_at(pt[0], pt[2], pt[3], config, market);
    }

    for (int k = n - 1; k >= 0; --k) {
        auto [values, choice] = bellman_sweep(trans.stages[static_cast<std::size_t>(k)],
                                              table.values[static_cast<std::size_t>(k) + 1]);
        table.values[static_cast<std::size_t>(k)] = std::move(values);
        policy.choice[static_cast<std::size_t>(k)] = std::move(choice);
    }
    return {std::move(table), std::move(policy)};
}

/// Policy application for simulation: project the current state onto the
/// stage grid, take the solved rate, and clamp to the largest admissible grid
/// rate. Epochs past the last solved stage reuse the final stage's policy.
class GridPolicy {
public:
    GridPolicy(const Policy& policy, const QuantGrid& grid, const LiquidationConfig& config)
        : policy_(&policy), grid_(&grid), config_(&config) {}

    double operator()(int k, const PdmpState& state) const {
        if (policy_->choice.empty()) {
            return 0.0;
        }
        const int stage = std::min(k, static_cast<int>(policy_->choice.size()) - 1);
        const double target = policy_->gamma(stage, project(reduce(state), *grid_, stage));
        double chosen = 0.0;
        for (double g : config_->action_grid) {
            if (g > target || g * config_->slice > state.inventory) {
                break;
            }
            chosen = g;
        }
        return chosen;
    }

private:
    const Policy* policy_;
    const QuantGrid* grid_;
    const LiquidationConfig* config_;
};

/// Per-path net revenues (trade proceeds plus terminal credit) under an
/// arbitrary policy; deterministic given the seed regardless of threads.
template <typename PolicyFn>
std::vector<double> policy_revenues(PolicyFn&& policy, const LiquidationConfig& config,
                                    const MarketParams& market,
                                    const ImpactedIntensityState& intensity0, long long n_paths,
                                    RngSeed seed, int threads = 1) {
    const PdmpState start = initial_state(config, market, intensity0);
    std::vector<double> revenues(static_cast<std::size_t>(n_paths), 0.0);
    detail::parallel_chunks(static_cast<std::size_t>(n_paths), threads,
                            [&](std::size_t begin, std::size_t end) {
                                for (std::size_t p = begin; p < end; ++p) {
                                    auto rng = make_rng(
                                        detail::derive_stream(seed, detail::kEvalPhase, p));
                                    const Trajectory traj =
                                        simulate_trajectory(start, policy, config, market, rng);
                                    revenues[p] = traj.total_reward();
                                }
                            });
    return revenues;
}

/// Simulates n_paths trajectories under the solved policy and summarizes
/// revenue and the quantiles of trading rate and inventory level across all
/// decision epochs.
inline SimReport evaluate_policy(const Policy& policy, const QuantGrid& grid,
                                 const LiquidationConfig& config, const MarketParams& market,
                                 const ImpactedIntensityState& intensity0, long long n_paths,
                                 RngSeed seed, int threads = 1) {
    if (n_paths < 1) {
        throw std::invalid_argument("evaluate_policy requires n_paths >= 1");
    }
    const PdmpState start = initial_state(config, market, intensity0);
    const GridPolicy grid_policy(policy, grid, config);

    struct Slot {
        double net = 0.0;
        double gross = 0.0;
        std::vector<double> rates;
        std::vector<double> inventories;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n_paths));
    detail::parallel_chunks(
        static_cast<std::size_t>(n_paths), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                auto rng = make_rng(detail::derive_stream(seed, detail::kEvalPhase, p));
                const Trajectory traj =
                    simulate_trajectory(start, grid_policy, config, market, rng);
                Slot& slot = slots[p];
                slot.net = traj.total_reward();
                slot.gross = traj.trade_reward;
                slot.rates = traj.actions;
                slot.inventories.reserve(traj.nodes.size());
                for (const ChainNode& node : traj.nodes) {
                    slot.inventories.push_back(node.post_jump.inventory);
                }
            }
        });

    SimReport report;
    report.n_paths = n_paths;
    report.seed = seed;
    std::vector<double> rate_pool;
    std::vector<double> inventory_pool;
    double net_sum = 0.0;
    double gross_sum = 0.0;
    for (const Slot& slot : slots) {
        net_sum += slot.net;
        gross_sum += slot.gross;
        rate_pool.insert(rate_pool.end(), slot.rates.begin(), slot.rates.end());
        inventory_pool.insert(inventory_pool.end(), slot.inventories.begin(),
                              slot.inventories.end());
    }
    const double np = static_cast<double>(n_paths);
    report.revenue = net_sum / np;
    report.revenue_gross = gross_sum / np;
    double ss = 0.0;
    for (const Slot& slot : slots) {
        ss += (slot.net - report.revenue) * (slot.net - report.revenue);
    }
    report.revenue_se = n_paths > 1 ? std::sqrt(ss / (np * (np - 1.0))) : 0.0;
    report.trade_rate_quantiles = quantile_row(std::move(rate_pool));
    report.inventory_quantiles = quantile_row(std::move(inventory_pool));
    return report;
}

} // namespace liqsim
