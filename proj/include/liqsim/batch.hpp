#pragma once

#include <algorithm>
#include <exception>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "liqsim/pdmp.hpp"
#include "liqsim/random.hpp"
#include "liqsim/report.hpp"
#include "liqsim/scenario.hpp"
#include "liqsim/solver.hpp"

namespace liqsim {

struct ScenarioSolution {
    ScenarioConfig config;
    QuantGrid grid;
    ValueTable values;
    Policy policy;
    SimReport report;
};

namespace detail {

/// Exploration paths for grid building: at each node a uniformly random
/// admissible rate, so the sample cloud covers the states any policy reaches.
inline std::vector<Trajectory> training_paths(const ScenarioConfig& sc) {
    const PdmpState start = initial_state(sc.liquidation, sc.market, sc.intensity0);
    std::vector<Trajectory> paths;
    paths.reserve(static_cast<std::size_t>(sc.solver.training_paths));
    for (long long p = 0; p < sc.solver.training_paths; ++p) {
        auto rng = make_rng(detail::derive_stream(sc.seed, detail::kTrainingPhase,
                                                  static_cast<std::uint64_t>(p)));
        const auto explore = [&](int, const PdmpState& state) {
            const std::vector<double> actions = admissible_actions(state, sc.liquidation);
            const std::size_t pick = std::min(
                actions.size() - 1,
                static_cast<std::size_t>(detail::canonical(rng) *
                                         static_cast<double>(actions.size())));
            return actions[pick];
        };
        paths.push_back(simulate_trajectory(start, explore, sc.liquidation, sc.market, rng));
    }
    return paths;
}

} // namespace detail

/// Full pipeline for one scenario: exploration paths, quantization grid,
/// transition estimation, backward dynamic program, policy evaluation.
inline ScenarioSolution solve_scenario(const ScenarioConfig& sc, int threads = 1) {
    ScenarioSolution solution;
    solution.config = sc;
    const std::vector<Trajectory> paths = detail::training_paths(sc);
    solution.grid = build_grid(paths, sc.solver.stages, sc.solver.grid_points);
    const TransitionModel trans =
        estimate_transitions(solution.grid, sc.liquidation, sc.market, sc.intensity0,
                             sc.solver.mc_paths, sc.seed, threads);
    auto [values, policy] = backward_dp(solution.grid, trans, sc.liquidation, sc.market);
    solution.values = std::move(values);
    solution.policy = std::move(policy);
    solution.report = evaluate_policy(solution.policy, solution.grid, sc.liquidation, sc.market,
                                      sc.intensity0, sc.solver.eval_paths, sc.seed, threads);
    solution.report.label = sc.label;
    solution.report.sigma = sc.intensity0.excitation;
    solution.report.kappa = sc.intensity0.decay;
    return solution;
}

/// Runs every scenario, isolating failures: a scenario that throws yields a
/// report slot with the error recorded while the rest of the batch continues.
/// Deterministic given per-scenario seeds regardless of parallelism.
inline std::vector<SimReport> run_batch(const std::vector<ScenarioConfig>& configs,
                                        int parallelism = 1) {
    std::vector<SimReport> reports(configs.size());
    const bool across_scenarios = configs.size() > 1;
    const int inner_threads = across_scenarios ? 1 : parallelism;
    detail::parallel_chunks(configs.size(), across_scenarios ? parallelism : 1,
                            [&](std::size_t begin, std::size_t end) {
                                for (std::size_t i = begin; i < end; ++i) {
                                    try {
                                        reports[i] = solve_scenario(configs[i], inner_threads).report;
                                    } catch (const std::exception& e) {
                                        reports[i] = SimReport{};
                                        reports[i].label = configs[i].label;
                                        reports[i].sigma = configs[i].intensity0.excitation;
                                        reports[i].kappa = configs[i].intensity0.decay;
                                        reports[i].seed = configs[i].seed;
                                        reports[i].error = e.what();
                                    }
                                }
                            });
    return reports;
}

/// Value table and policy as one JSON document: per stage, the grid point
/// coordinates (inventory, intensity, price, time), the stage value, and the
/// optimal rate (omitted at the terminal stage). Field order is fixed.
inline nlohmann::ordered_json policy_to_json(const QuantGrid& grid, const ValueTable& table,
                                             const Policy& policy) {
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    const int n = grid.stage_count() - 1;
    for (int k = 0; k <= n; ++k) {
        nlohmann::ordered_json stage;
        stage["stage"] = k;
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        const auto& sg = grid.stages[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < sg.points.size(); ++i) {
            nlohmann::ordered_json point;
            point["coords"] = sg.points[i];
            point["value"] = table.values[static_cast<std::size_t>(k)][i];
            if (k < n) {
                point["gamma"] = policy.gamma(k, static_cast<int>(i));
            }
            points.push_back(std::move(point));
        }
        stage["points"] = std::move(points);
        stages.push_back(std::move(stage));
    }
    return stages;
}

inline void write_policy_json(const ScenarioSolution& solution, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << policy_to_json(solution.grid, solution.values, solution.policy).dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("failed while writing: " + path);
    }
}

} // namespace liqsim
