#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "cif/belief.hpp"
#include "cif/sensor.hpp"
#include "cif/solver.hpp"

// Monte Carlo sample-path generation under an incentive policy, the
// statistics that verify the structural claims (sub-martingale incentives,
// asymptotic consistency, the cost-of-consistency gap), and a small-horizon
// enumeration oracle for discounted costs.

namespace cif {

/// One realized run: the true state, and the per-step incentives,
/// observations, actions, beliefs, regions and costs.
struct Trajectory {
    int true_state = 1;
    std::vector<Belief> beliefs;      // pi_0 .. pi_N
    std::vector<double> incentives;   // p_1 .. p_N
    std::vector<int> observations;    // y_1 .. y_N
    std::vector<int> actions;         // a_1 .. a_N
    std::vector<Region> regions;      // region at (pi_{k-1}, p_k)
    std::vector<double> stage_costs;  // c_1 .. c_N
    std::vector<bool> action_matches_obs;  // diagnostic: raw I(a_k == y_k)
};

/// Stationary incentive policy selected by kind. `threshold_p2` applies to
/// the threshold kind; `grid`/`table` to the grid kind.
struct PolicySpec {
    enum class Kind { zero, threshold, consistency, grid };
    Kind kind = Kind::zero;
    double threshold_p2 = 0.0;
    BeliefGrid grid{2};
    std::vector<double> table;

    static PolicySpec zero() { return PolicySpec{}; }
    static PolicySpec threshold(double p2) {
        PolicySpec s;
        s.kind = Kind::threshold;
        s.threshold_p2 = p2;
        return s;
    }
    static PolicySpec consistency() {
        PolicySpec s;
        s.kind = Kind::consistency;
        return s;
    }
    static PolicySpec from_grid(BeliefGrid g, std::vector<double> values) {
        PolicySpec s;
        s.kind = Kind::grid;
        s.grid = g;
        s.table = std::move(values);
        return s;
    }
};

inline std::function<double(const Belief&)> make_policy(const PolicySpec& spec,
                                                        const RewardParams& params,
                                                        const ObservationModel& model) {
    const IncentiveCoefficients coeffs = coefficients(params, model);
    switch (spec.kind) {
        case PolicySpec::Kind::zero:
            return [](const Belief&) { return 0.0; };
        case PolicySpec::Kind::threshold:
            return make_threshold_policy(coeffs, model, spec.threshold_p2);
        case PolicySpec::Kind::consistency:
            return make_consistency_policy(coeffs, model);
        case PolicySpec::Kind::grid:
            return [grid = spec.grid, table = spec.table](const Belief& pi) {
                return std::clamp(grid.interpolate(table, pi.p2), 0.0, 1.0);
            };
    }
    throw std::logic_error("make_policy: unknown kind");
}

namespace detail {

/// Deterministic uniform in [0,1) from the top 53 bits of the generator;
/// avoids distribution objects so output is stable across standard
/// library implementations.
inline double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Seed for path `index` in a batch with base seed `base`. Paths are
/// indexed, not streamed, so growing a batch never reshuffles earlier
/// paths.
inline std::uint64_t path_seed(std::uint64_t base, std::uint64_t index) {
    return base + index;
}

/// Generate one sample path. The true state is drawn from the prior unless
/// `fixed_state` (1 or 2) is given. Per step: the incentive is computed
/// from the previous belief, then the observation is drawn, then the
/// action and the filter update follow.
inline Trajectory simulate_path(const RewardParams& params, const ObservationModel& model,
                                const FusionCostSpec& cost, const PolicySpec& policy_spec,
                                const Belief& prior, int horizon, std::uint64_t seed,
                                int fixed_state = 0) {
    if (horizon < 1) throw std::invalid_argument("simulate_path: horizon >= 1");
    const auto policy = make_policy(policy_spec, params, model);
    const IncentiveCoefficients coeffs = coefficients(params, model);
    std::mt19937_64 rng(seed);

    Trajectory traj;
    traj.true_state = fixed_state != 0
                          ? fixed_state
                          : (detail::canonical(rng) < prior.p2 ? 2 : 1);
    traj.beliefs.reserve(horizon + 1);
    traj.beliefs.push_back(prior);

    Belief pi = prior;
    for (int k = 1; k <= horizon; ++k) {
        const double p = policy(pi);  // committed before y_k is drawn
        const Region region = classify_region(coeffs, model, p, pi);
        const int y = detail::canonical(rng) < model(traj.true_state, 2) ? 2 : 1;
        // Action from the region structure: a = y in the learning region,
        // the fixed action in the herding regions. This is the myopic argmax
        // with boundary ties resolved the same way as classify_region.
        const int a = region == Region::P2 ? y : (region == Region::P1 ? 2 : 1);
        const DecisionLikelihood likelihood = decision_likelihood(params, model, p, pi);
        const Belief next = social_filter(pi, a, likelihood);

        traj.incentives.push_back(p);
        traj.regions.push_back(region);
        traj.observations.push_back(y);
        traj.actions.push_back(a);
        traj.stage_costs.push_back(stage_cost(cost, pi, p, region));
        traj.action_matches_obs.push_back(a == y);
        traj.beliefs.push_back(next);
        pi = next;
    }
    return traj;
}

/// Order-independent accumulator: count / mean / sum of squared deviations.
struct RunningStat {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }
    void merge(const RunningStat& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const std::int64_t n = count + o.count;
        mean += d * o.count / n;
        m2 += o.m2 + d * d * static_cast<double>(count) * o.count / n;
        count = n;
    }
    double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
    double stderr_mean() const {
        return count > 1 ? std::sqrt(variance() / count) : 0.0;
    }
};

struct SubmartingaleStats {
    std::vector<double> mean_increment;  // over paths, of p_{k+1} - p_k
    std::vector<double> se;
    double min_mean_increment = 0.0;
    double min_margin = 0.0;  // min over k of (mean + 3 se)
};

/// Across-path mean of the per-step incentive increments. A sub-martingale
/// incentive sequence keeps every mean increment above -3 standard errors.
inline SubmartingaleStats submartingale_stats(const std::vector<Trajectory>& paths) {
    if (paths.size() < 2) throw std::invalid_argument("submartingale_stats: need >= 2 paths");
    const std::size_t n = paths.front().incentives.size();
    SubmartingaleStats out;
    out.min_mean_increment = std::numeric_limits<double>::infinity();
    out.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        RunningStat stat;
        for (const auto& t : paths) stat.add(t.incentives[k + 1] - t.incentives[k]);
        out.mean_increment.push_back(stat.mean);
        out.se.push_back(stat.stderr_mean());
        out.min_mean_increment = std::min(out.min_mean_increment, stat.mean);
        out.min_margin = std::min(out.min_margin, stat.mean + 3.0 * stat.stderr_mean());
    }
    return out;
}

struct ConsistencyStats {
    std::vector<double> p_diverged;   // P(|pi_k - g(theta)| > eps)
    std::vector<double> p_in_low;     // P(pi_k in H), H = {pi(2) <= threshold}
    std::vector<double> envelope;     // e^{-2 k (pi_s*(1) - B_{theta 1})^2}
    std::vector<double> se_in_low;    // binomial SE of p_in_low
};

/// Empirical divergence and low-belief-region occupancy curves for paths
/// conditioned on a fixed true state, with the analytic concentration
/// envelope alongside.
inline ConsistencyStats consistency_stats(const std::vector<Trajectory>& paths, double eps,
                                          double threshold_p2, const ObservationModel& model) {
    if (paths.empty()) throw std::invalid_argument("consistency_stats: no paths");
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("consistency_stats: eps in (0,1)");
    const int theta = paths.front().true_state;
    const double target_p2 = theta == 2 ? 1.0 : 0.0;
    const double rate = (1.0 - threshold_p2) - model(theta, 1);  // pi_s*(1) - B_{theta 1}
    const std::size_t n = paths.front().beliefs.size() - 1;
    const double m = static_cast<double>(paths.size());
    ConsistencyStats out;
    for (std::size_t k = 1; k <= n; ++k) {
        double diverged = 0.0, in_low = 0.0;
        for (const auto& t : paths) {
            if (std::abs(t.beliefs[k].p2 - target_p2) > eps) diverged += 1.0;
            if (t.beliefs[k].p2 <= threshold_p2) in_low += 1.0;
        }
        const double ph = in_low / m;
        out.p_diverged.push_back(diverged / m);
        out.p_in_low.push_back(ph);
        out.envelope.push_back(std::exp(-2.0 * static_cast<double>(k) * rate * rate));
        out.se_in_low.push_back(std::sqrt(ph * (1.0 - ph) / m));
    }
    return out;
}

/// Discounted cost of one realized path: sum_k rho^{k-1} c_k, matching the
/// dynamic-programming convention where the first stage is undiscounted.
inline double discounted_cost(const Trajectory& traj, double rho) {
    double total = 0.0, w = 1.0;
    for (double c : traj.stage_costs) {
        total += w * c;
        w *= rho;
    }
    return total;
}

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
};

inline McEstimate mc_discounted_cost(const RewardParams& params, const ObservationModel& model,
                                     const FusionCostSpec& cost, const PolicySpec& policy,
                                     const Belief& prior, double rho, int paths, int horizon,
                                     std::uint64_t seed, int fixed_state = 0) {
    RunningStat stat;
    for (int i = 0; i < paths; ++i) {
        const Trajectory t = simulate_path(params, model, cost, policy, prior, horizon,
                                           path_seed(seed, i), fixed_state);
        stat.add(discounted_cost(t, rho));
    }
    return {stat.mean, stat.stderr_mean()};
}

namespace detail {

inline double enumerate_cost(const RewardParams& params, const ObservationModel& model,
                             const FusionCostSpec& cost,
                             const std::function<double(const Belief&)>& policy,
                             const IncentiveCoefficients& coeffs, const Belief& pi, int theta,
                             double rho, int steps_left) {
    if (steps_left == 0) return 0.0;
    const double p = policy(pi);
    const Region region = classify_region(coeffs, model, p, pi);
    const double c = stage_cost(cost, pi, p, region);
    double continuation = 0.0;
    for (int y = 1; y <= 2; ++y) {
        const double w = model(theta, y);
        if (w == 0.0) continue;
        const int a = region == Region::P2 ? y : (region == Region::P1 ? 2 : 1);
        const Belief next = social_filter(pi, a, decision_likelihood(params, model, p, pi));
        continuation += w * enumerate_cost(params, model, cost, policy, coeffs, next, theta,
                                           rho, steps_left - 1);
    }
    return c + rho * continuation;
}

}  // namespace detail

/// Exact truncated expected discounted cost by enumerating the true state
/// and every observation sequence. Deterministic; horizons above 8 are
/// rejected to keep the enumeration honest.
inline double brute_force_cost(const RewardParams& params, const ObservationModel& model,
                               const FusionCostSpec& cost, const PolicySpec& policy_spec,
                               const Belief& prior, double rho, int horizon) {
    if (horizon < 0 || horizon > 8)
        throw std::invalid_argument("brute_force_cost: horizon must be in [0,8]");
    if (horizon == 0) return 0.0;
    const auto policy = make_policy(policy_spec, params, model);
    const IncentiveCoefficients coeffs = coefficients(params, model);
    double total = 0.0;
    for (int theta = 1; theta <= 2; ++theta) {
        const double w = prior(theta);
        if (w == 0.0) continue;
        total += w * detail::enumerate_cost(params, model, cost, policy, coeffs, prior, theta,
                                            rho, horizon);
    }
    return total;
}

struct CostGapResult {
    double max_gap = -std::numeric_limits<double>::infinity();
    double max_gap_se = 0.0;
    std::vector<double> starts;
    std::vector<double> gap;  // per start: What(mu_c) - Jhat(mu*)
    std::vector<double> se;   // combined SE per start
};

/// Monte Carlo estimate of the per-start cost gap between the
/// always-incentivize policy and a threshold policy.
inline CostGapResult empirical_cost_gap(const RewardParams& params,
                                        const ObservationModel& model,
                                        const FusionCostSpec& cost, double rho,
                                        double threshold_p2, int n_starts, int paths_per_start,
                                        int horizon, std::uint64_t seed) {
    CostGapResult out;
    for (int s = 0; s < n_starts; ++s) {
        const double p2 = n_starts == 1 ? 0.5 : static_cast<double>(s) / (n_starts - 1);
        const Belief start = Belief::from_p2(p2);
        const McEstimate wc = mc_discounted_cost(params, model, cost, PolicySpec::consistency(),
                                                 start, rho, paths_per_start, horizon,
                                                 seed + 1000003ull * s);
        const McEstimate js = mc_discounted_cost(params, model, cost,
                                                 PolicySpec::threshold(threshold_p2), start,
                                                 rho, paths_per_start, horizon,
                                                 seed + 1000003ull * s + 500009ull);
        const double gap = wc.mean - js.mean;
        const double se = std::sqrt(wc.se * wc.se + js.se * js.se);
        out.starts.push_back(p2);
        out.gap.push_back(gap);
        out.se.push_back(se);
        if (gap > out.max_gap) {
            out.max_gap = gap;
            out.max_gap_se = se;
        }
    }
    return out;
}

struct AveragedIncentives {
    // mean[m][k]: average incentive at step k+1 for model m
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> se;
};

/// Per-step average incentives over independent paths, one curve per
/// (observation model, reward params, policy) triple.
inline AveragedIncentives averaged_incentives(
    const std::vector<ObservationModel>& models, const std::vector<RewardParams>& params,
    const std::vector<PolicySpec>& policies, const FusionCostSpec& cost, const Belief& prior,
    int paths, int horizon, std::uint64_t seed) {
    if (models.size() != params.size() || models.size() != policies.size())
        throw std::invalid_argument("averaged_incentives: mismatched model/params/policy lists");
    AveragedIncentives out;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<RunningStat> stats(horizon);
        for (int i = 0; i < paths; ++i) {
            const Trajectory t = simulate_path(params[m], models[m], cost, policies[m], prior,
                                               horizon, path_seed(seed, i));
            for (int k = 0; k < horizon; ++k) stats[k].add(t.incentives[k]);
        }
        std::vector<double> mean(horizon), se(horizon);
        for (int k = 0; k < horizon; ++k) {
            mean[k] = stats[k].mean;
            se[k] = stats[k].stderr_mean();
        }
        out.mean.push_back(std::move(mean));
        out.se.push_back(std::move(se));
    }
    return out;
}

}  // namespace cif
