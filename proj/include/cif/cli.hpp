#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cif/config.hpp"
#include "cif/sensor.hpp"
#include "cif/simulate.hpp"
#include "cif/solver.hpp"

// Command layer shared by the CLI binary and the tests: resolves a parsed
// config into model objects, runs one experiment, and writes byte-stable
// CSV / JSON outputs.

namespace cif::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitHypothesisViolation = 4;

/// Fixed 12-significant-digit formatting, so identical runs produce
/// identical bytes.
inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

struct ResolvedModel {
    RewardParams params;
    ObservationModel model;
    bool tp2 = false;
    bool supermodular = false;
    bool positivity = false;
};

inline RewardParams reward_from_config(const ExperimentConfig& c) {
    if (c.reward_preset == "baseline") return presets::baseline();
    if (c.reward_preset == "b_squared") return presets::channel_squared();
    if (c.reward_preset == "b_cubed") return presets::channel_cubed();
    RewardParams p{{c.delta1, c.delta2}, {c.alpha1, c.alpha2}, {c.beta1, c.beta2},
                   {c.gamma1, c.gamma2}};
    if (!p.in_unit_range()) throw ConfigError("reward.*: parameters must lie in [0,1]");
    return p;
}

inline ObservationModel observation_from_config(const ExperimentConfig& c,
                                                const RewardParams& params) {
    if (c.obs_source == "explicit")
        return ObservationModel({{{c.b11, c.b12}, {c.b21, c.b22}}});
    if (c.obs_source == "power")
        return calibrate_observation_model(presets::baseline()).power(c.obs_power);
    return calibrate_observation_model(params);
}

inline ResolvedModel resolve_model(const ExperimentConfig& c) {
    ResolvedModel r;
    r.params = reward_from_config(c);
    r.model = observation_from_config(c, r.params);
    r.tp2 = is_tp2(r.model);
    r.supermodular = check_supermodular(r.params, r.model);
    r.positivity = r.params.positivity_ok();
    return r;
}

inline EntropyWeight psi_from_config(const ExperimentConfig& c) {
    EntropyWeight w;
    if (c.psi_kind == "quadratic") {
        w.kind = EntropyWeight::Kind::quadratic;
        w.offset = c.psi_offset;
        w.coeff = c.psi_coeff;
    } else if (c.psi_kind == "two_level") {
        w.kind = EntropyWeight::Kind::two_level;
        w.lo = c.psi_lo;
        w.hi = c.psi_hi;
        w.split = c.psi_split;
    } else {
        w.kind = EntropyWeight::Kind::table;
        for (const auto& entry : detail::split_list(c.psi_table)) {
            const auto colon = entry.find(':');
            if (colon == std::string::npos)
                throw ConfigError("cost.psi_table: expected 'p2:weight' pairs");
            w.knots.emplace_back(
                detail::parse_double("cost.psi_table", detail::trim(entry.substr(0, colon))),
                detail::parse_double("cost.psi_table", detail::trim(entry.substr(colon + 1))));
        }
        if (w.knots.empty()) throw ConfigError("cost.psi_table: empty table");
        for (std::size_t i = 1; i < w.knots.size(); ++i)
            if (w.knots[i].first <= w.knots[i - 1].first)
                throw ConfigError("cost.psi_table: knots must be strictly increasing in p2");
    }
    return w;
}

inline FusionCostSpec cost_from_config(const ExperimentConfig& c) {
    if (c.cost_kind == "linear") return FusionCostSpec::linear(c.phi_s);
    return FusionCostSpec::entropy(c.phi_e, psi_from_config(c));
}

/// Metadata comment emitted at the top of every CSV.
inline std::string csv_header_comment(const ExperimentConfig& c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    return std::string("# config_hash=") + buf + " seed=" + std::to_string(c.seed);
}

inline std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.out_dir);
    const auto path = std::filesystem::path(c.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

inline nlohmann::ordered_json hypotheses_json(const ResolvedModel& r) {
    return {{"a1_tp2", r.tp2},
            {"a2_supermodular", r.supermodular},
            {"coefficient_positivity", r.positivity},
            {"within_theorem_hypotheses", r.tp2 && r.supermodular}};
}

inline int hypothesis_exit(const ExperimentConfig& c, const ResolvedModel& r) {
    if (c.strict && !(r.tp2 && r.supermodular)) return kExitHypothesisViolation;
    return kExitOk;
}

/// solve: value iteration on the configured grid; emits value.csv,
/// policy.csv and threshold.json.
inline int cmd_solve(const ExperimentConfig& c) {
    const ResolvedModel r = resolve_model(c);
    const FusionCostSpec cost = cost_from_config(c);
    const BeliefGrid grid(c.grid_points);
    const SolveResult sol = value_iterate(cost, r.params, r.model, c.rho, grid, c.max_iters,
                                          c.tol);
    const ThresholdReport thr = extract_threshold(sol, grid);

    auto value = open_output(c, "value.csv");
    value << csv_header_comment(c) << "\npi2,value\n";
    for (int i = 0; i < grid.n; ++i)
        value << fmt(grid.point(i)) << ',' << fmt(sol.value[i]) << '\n';

    auto policy = open_output(c, "policy.csv");
    policy << csv_header_comment(c) << "\npi2,incentive,region_at_policy\n";
    for (int i = 0; i < grid.n; ++i)
        policy << fmt(grid.point(i)) << ',' << fmt(sol.policy[i]) << ','
               << to_string(sol.policy_region[i]) << '\n';

    nlohmann::ordered_json j;
    j["switch_points"] = sol.switch_points;
    j["single_switch"] = thr.single_switch;
    if (thr.single_switch) j["threshold_pi2"] = thr.threshold_p2;
    j["iterations"] = sol.iterations;
    j["residual"] = sol.residual;
    if (sol.residual_history.size() >= 100)
        j["residual_at_100"] = sol.residual_history[99];
    j["converged"] = sol.residual < c.tol;
    j["checks"] = hypotheses_json(r);
    open_output(c, "threshold.json") << j.dump(2) << '\n';
    return hypothesis_exit(c, r);
}

/// regions: belief-space boundaries of the social-learning region as a
/// function of the incentive, by bisection on the monotone incentive
/// function branches.
inline int cmd_regions(const ExperimentConfig& c) {
    const ResolvedModel r = resolve_model(c);
    const IncentiveCoefficients coeffs = coefficients(r.params, r.model);
    // Delta branches are strictly decreasing in pi(2); invert by bisection.
    const auto invert = [&](int obs, double p) {
        double lo = 0.0, hi = 1.0;
        const auto delta = [&](double p2) {
            return incentive_function(coeffs, Belief::from_p2(p2), obs, r.model);
        };
        if (p >= delta(0.0)) return 0.0;
        if (p <= delta(1.0)) return 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (delta(mid) > p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto out = open_output(c, "regions.csv");
    out << csv_header_comment(c) << "\np,p2_lower_boundary,p2_upper_boundary\n";
    for (int i = 0; i < c.regions_resolution; ++i) {
        const double p = static_cast<double>(i) / (c.regions_resolution - 1);
        out << fmt(p) << ',' << fmt(invert(2, p)) << ',' << fmt(invert(1, p)) << '\n';
    }
    return hypothesis_exit(c, r);
}

struct ModelSuite {
    std::vector<std::string> names;
    std::vector<RewardParams> params;
    std::vector<ObservationModel> models;
};

/// The named multi-channel suite: the calibrated baseline channel and its
/// matrix powers, each paired with its own reward parameters.
inline ModelSuite model_suite(const std::vector<std::string>& names) {
    const ObservationModel base = calibrate_observation_model(presets::baseline());
    ModelSuite suite;
    for (const auto& name : names) {
        suite.names.push_back(name);
        if (name == "b") {
            suite.params.push_back(presets::baseline());
            suite.models.push_back(base);
        } else if (name == "b2") {
            suite.params.push_back(presets::channel_squared());
            suite.models.push_back(base.power(2));
        } else {
            suite.params.push_back(presets::channel_cubed());
            suite.models.push_back(base.power(3));
        }
    }
    return suite;
}

inline double resolve_threshold(const ExperimentConfig& c, const RewardParams& params,
                                const ObservationModel& model, const FusionCostSpec& cost) {
    if (c.sim_threshold >= 0.0) return c.sim_threshold;
    const BeliefGrid grid(c.grid_points);
    const SolveResult sol = value_iterate(cost, params, model, c.rho, grid, c.max_iters, c.tol);
    const ThresholdReport thr = extract_threshold(sol, grid);
    if (!thr.single_switch)
        throw std::runtime_error("resolve_threshold: policy is not single-threshold; "
                                 "set sim.threshold explicitly");
    return thr.threshold_p2;
}

inline PolicySpec policy_from_config(const ExperimentConfig& c, const RewardParams& params,
                                     const ObservationModel& model, const FusionCostSpec& cost) {
    if (c.sim_policy == "zero") return PolicySpec::zero();
    if (c.sim_policy == "consistency") return PolicySpec::consistency();
    return PolicySpec::threshold(resolve_threshold(c, params, model, cost));
}

/// simulate: sample-path batches; per-step aggregates, sub-martingale
/// increments, and per-channel average incentives.
inline int cmd_simulate(const ExperimentConfig& c) {
    const ResolvedModel r = resolve_model(c);
    const FusionCostSpec cost = cost_from_config(c);
    const Belief prior = Belief::from_p2(c.sim_prior_p2);

    const PolicySpec policy = policy_from_config(c, r.params, r.model, cost);
    std::vector<Trajectory> paths;
    paths.reserve(c.sim_paths);
    for (int i = 0; i < c.sim_paths; ++i)
        paths.push_back(simulate_path(r.params, r.model, cost, policy, prior, c.sim_horizon,
                                      path_seed(c.seed, i), c.sim_theta));

    auto summary = open_output(c, "paths_summary.csv");
    summary << csv_header_comment(c)
            << "\nk,mean_incentive,se_incentive,mean_pi2,mean_belief_error,"
               "freq_p1,freq_p2,freq_p3,frac_a_eq_y\n";
    const double m = static_cast<double>(paths.size());
    for (int k = 1; k <= c.sim_horizon; ++k) {
        RunningStat inc;
        double pi2 = 0, err = 0, f1 = 0, f2 = 0, f3 = 0, ay = 0;
        for (const auto& t : paths) {
            inc.add(t.incentives[k - 1]);
            pi2 += t.beliefs[k].p2;
            err += std::abs(t.beliefs[k].p2 - (t.true_state == 2 ? 1.0 : 0.0));
            f1 += t.regions[k - 1] == Region::P1;
            f2 += t.regions[k - 1] == Region::P2;
            f3 += t.regions[k - 1] == Region::P3;
            ay += t.action_matches_obs[k - 1];
        }
        summary << k << ',' << fmt(inc.mean) << ',' << fmt(inc.stderr_mean()) << ','
                << fmt(pi2 / m) << ',' << fmt(err / m) << ',' << fmt(f1 / m) << ','
                << fmt(f2 / m) << ',' << fmt(f3 / m) << ',' << fmt(ay / m) << '\n';
    }

    if (paths.size() >= 2) {
        const SubmartingaleStats sub = submartingale_stats(paths);
        auto out = open_output(c, "submartingale.csv");
        out << csv_header_comment(c) << "\nk,mean_increment,se\n";
        for (std::size_t k = 0; k < sub.mean_increment.size(); ++k)
            out << (k + 1) << ',' << fmt(sub.mean_increment[k]) << ',' << fmt(sub.se[k])
                << '\n';
    }

    // Per-channel average incentives, under each channel's own optimal
    // threshold policy.
    const ModelSuite suite = model_suite(c.sim_models);
    std::vector<PolicySpec> policies;
    for (std::size_t i = 0; i < suite.names.size(); ++i)
        policies.push_back(PolicySpec::threshold(
            resolve_threshold(c, suite.params[i], suite.models[i], cost)));
    const AveragedIncentives avg = averaged_incentives(suite.models, suite.params, policies,
                                                       cost, prior, c.sim_paths, c.sim_horizon,
                                                       c.seed);
    auto out = open_output(c, "avg_incentives.csv");
    out << csv_header_comment(c) << "\nk";
    for (const auto& name : suite.names) out << ",mean_" << name << ",se_" << name;
    out << '\n';
    for (int k = 0; k < c.sim_horizon; ++k) {
        out << (k + 1);
        for (std::size_t mi = 0; mi < suite.names.size(); ++mi)
            out << ',' << fmt(avg.mean[mi][k]) << ',' << fmt(avg.se[mi][k]);
        out << '\n';
    }
    return hypothesis_exit(c, r);
}

/// bound: the analytic cost-of-consistency bound against the grid-based
/// and Monte Carlo gaps.
inline int cmd_bound(const ExperimentConfig& c) {
    const ResolvedModel r = resolve_model(c);
    const FusionCostSpec cost = cost_from_config(c);
    const BeliefGrid grid(c.grid_points);
    const IncentiveCoefficients coeffs = coefficients(r.params, r.model);

    const SolveResult sol = value_iterate(cost, r.params, r.model, c.rho, grid, c.max_iters,
                                          c.tol);
    const ThresholdReport thr = extract_threshold(sol, grid);
    const double threshold_p2 = c.sim_threshold >= 0.0 ? c.sim_threshold
                                                       : (thr.single_switch ? thr.threshold_p2
                                                                            : 0.0);
    const PolicyEvalResult wc = evaluate_policy(cost, r.params, r.model,
                                                make_consistency_policy(coeffs, r.model), c.rho,
                                                grid, c.max_iters, c.tol);
    double grid_gap = -std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n; ++i) {
        const double g = wc.value[i] - sol.value[i];
        grid_gap = std::max(grid_gap, g);
        min_gap = std::min(min_gap, g);
    }
    const double bound = consistency_cost_bound(c.phi_s, c.rho, 1.0 - threshold_p2,
                                                r.model(2, 1));

    // horizon with truncation error below 1e-6
    int horizon = 1;
    while (std::pow(c.rho, horizon) * (1.0 + c.phi_s) / (1.0 - c.rho) >= 1e-6 &&
           horizon < 4000)
        ++horizon;
    const CostGapResult mc = empirical_cost_gap(r.params, r.model, cost, c.rho, threshold_p2,
                                                c.bound_starts, c.bound_paths, horizon, c.seed);

    nlohmann::ordered_json j;
    j["analytic_bound"] = std::isinf(bound) ? 1e308 : bound;
    j["bound_infinite"] = std::isinf(bound);
    j["threshold_pi2"] = threshold_p2;
    j["grid_max_gap"] = grid_gap;
    j["grid_min_gap"] = min_gap;
    j["mc_max_gap"] = mc.max_gap;
    j["mc_max_gap_se"] = mc.max_gap_se;
    j["mc_horizon"] = horizon;
    const bool pass = (std::isinf(bound) || grid_gap <= bound) && min_gap >= -1e-9;
    j["pass"] = pass;
    j["checks"] = hypotheses_json(r);
    open_output(c, "bound_report.json") << j.dump(2) << '\n';
    return hypothesis_exit(c, r);
}

/// calibrate: recover the observation model from the reward parameters and
/// report the structural checks. Infeasibility is reported, not fatal.
inline int cmd_calibrate(const ExperimentConfig& c) {
    const RewardParams params = reward_from_config(c);
    nlohmann::ordered_json j;
    j["positivity_ok"] = params.positivity_ok();
    try {
        const ObservationModel model = calibrate_observation_model(params);
        const IncentiveCoefficients coeffs = coefficients(params, model);
        const CalibrationResiduals res = calibration_residuals(params, model);
        j["b"] = {{model(1, 1), model(1, 2)}, {model(2, 1), model(2, 2)}};
        j["l1"] = coeffs.l1;
        j["l2"] = coeffs.l2;
        j["l3"] = coeffs.l3;
        j["residual_at_e1"] = res.at_e1;
        j["residual_at_e2"] = res.at_e2;
        j["a1_tp2"] = is_tp2(model);
        j["a2_supermodular"] = check_supermodular(params, model);
        // When an explicit matrix is configured, also report how far the
        // given (params, matrix) pair is from the calibration identities.
        if (c.obs_source != "calibrate") {
            const ObservationModel given = observation_from_config(c, params);
            const CalibrationResiduals gres = calibration_residuals(params, given);
            j["given_b"] = {{given(1, 1), given(1, 2)}, {given(2, 1), given(2, 2)}};
            j["given_residual_at_e1"] = gres.at_e1;
            j["given_residual_at_e2"] = gres.at_e2;
        }
    } catch (const CalibrationError& e) {
        j["error"] = e.what();
    }
    open_output(c, "calibration.json") << j.dump(2) << '\n';
    return kExitOk;
}

/// consistency: empirical convergence and low-belief occupancy curves
/// under the always-incentivize policy with a fixed true state.
inline int cmd_consistency(const ExperimentConfig& c) {
    const ResolvedModel r = resolve_model(c);
    const FusionCostSpec cost = cost_from_config(c);
    const Belief prior = Belief::from_p2(c.sim_prior_p2);
    const int theta = c.sim_theta == 0 ? 2 : c.sim_theta;
    const double threshold_p2 = resolve_threshold(c, r.params, r.model, cost);

    std::vector<Trajectory> paths;
    paths.reserve(c.sim_paths);
    for (int i = 0; i < c.sim_paths; ++i)
        paths.push_back(simulate_path(r.params, r.model, cost, PolicySpec::consistency(),
                                      prior, c.sim_horizon, path_seed(c.seed, i), theta));
    const ConsistencyStats stats = consistency_stats(paths, c.sim_epsilon, threshold_p2,
                                                     r.model);
    auto out = open_output(c, "consistency.csv");
    out << csv_header_comment(c) << "\nk,p_diverged,p_in_low,envelope,se_in_low\n";
    for (std::size_t k = 0; k < stats.p_diverged.size(); ++k)
        out << (k + 1) << ',' << fmt(stats.p_diverged[k]) << ',' << fmt(stats.p_in_low[k])
            << ',' << fmt(stats.envelope[k]) << ',' << fmt(stats.se_in_low[k]) << '\n';
    return hypothesis_exit(c, r);
}

}  // namespace cif::cli
