#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <stdexcept>
#include <vector>

#include "cif/belief.hpp"
#include "cif/sensor.hpp"

// Discretized-belief dynamic programming for the fusion center: stage
// costs, the three-branch Q function, value iteration with policy
// extraction, switch-point detection, fixed-policy evaluation, and the
// analytic cost-of-consistency bound.

namespace cif {

enum class CostKind { linear, entropy };

/// Belief-indexed weight on the entropy term. Two built-in families plus a
/// tabulated form (piecewise-linear in pi(2)).
struct EntropyWeight {
    enum class Kind { quadratic, two_level, table };
    Kind kind = Kind::quadratic;

    // quadratic: offset - coeff * pi(2)^2
    double offset = 0.1;
    double coeff = 1.0;

    // two_level: lo * I(pi(2) < split) - hi * I(pi(2) > split)
    double lo = 0.6;
    double hi = 0.35;
    double split = 0.75;

    // table: sorted (pi(2), weight) knots, linearly interpolated
    std::vector<std::pair<double, double>> knots;

    double operator()(double p2) const {
        switch (kind) {
            case Kind::quadratic:
                return offset - coeff * p2 * p2;
            case Kind::two_level:
                return (p2 < split ? lo : 0.0) - (p2 > split ? hi : 0.0);
            case Kind::table: {
                if (knots.empty()) return 0.0;
                if (p2 <= knots.front().first) return knots.front().second;
                if (p2 >= knots.back().first) return knots.back().second;
                for (std::size_t i = 1; i < knots.size(); ++i) {
                    if (p2 <= knots[i].first) {
                        const auto& [x0, v0] = knots[i - 1];
                        const auto& [x1, v1] = knots[i];
                        const double t = (p2 - x0) / (x1 - x0);
                        return v0 + t * (v1 - v0);
                    }
                }
                return knots.back().second;
            }
        }
        return 0.0;
    }
};

/// Fusion-center stage cost: linear (incentive minus a reward for landing
/// in the learning region) or the entropy variant that additionally
/// charges for estimate uncertainty.
struct FusionCostSpec {
    CostKind kind = CostKind::linear;
    double phi_s = 0.4;   // linear weight
    double phi_e = 0.25;  // entropy-cost weight on informativeness
    EntropyWeight psi;    // entropy-cost belief weight

    static FusionCostSpec linear(double phi) {
        FusionCostSpec s;
        s.kind = CostKind::linear;
        s.phi_s = phi;
        return s;
    }
    static FusionCostSpec entropy(double phi, EntropyWeight w) {
        FusionCostSpec s;
        s.kind = CostKind::entropy;
        s.phi_e = phi;
        s.psi = std::move(w);
        return s;
    }
};

/// Binary entropy of the belief in bits; defined as 0 at the corners.
inline double belief_entropy(const Belief& pi) {
    double h = 0.0;
    for (double p : {pi.p1, pi.p2})
        if (p > 0.0 && p < 1.0) h -= p * std::log2(p);
    return h;
}

/// Realized per-step cost given the region the decision rule is in.
/// Only the learning region earns the informativeness reward.
inline double stage_cost(const FusionCostSpec& spec, const Belief& belief, double incentive,
                         Region region) {
    const double informative = region == Region::P2 ? 1.0 : 0.0;
    if (spec.kind == CostKind::linear) return incentive - spec.phi_s * informative;
    return incentive + spec.psi(belief.p2) * belief_entropy(belief) -
           spec.phi_e * informative;
}

/// Uniform grid on pi(2) in [0,1].
struct BeliefGrid {
    int n = 1000;

    explicit BeliefGrid(int points = 1000) : n(points) {
        if (n < 2) throw std::invalid_argument("BeliefGrid: need at least 2 points");
    }

    double point(int i) const { return static_cast<double>(i) / (n - 1); }
    double spacing() const { return 1.0 / (n - 1); }

    /// Linear interpolation of per-grid-point values at pi(2) = p2.
    double interpolate(const std::vector<double>& values, double p2) const {
        const double t = std::clamp(p2, 0.0, 1.0) * (n - 1);
        const int lo = std::min(static_cast<int>(t), n - 2);
        const double f = t - lo;
        return values[lo] * (1.0 - f) + values[lo + 1] * f;
    }
};

struct SolveResult {
    std::vector<double> value;
    std::vector<double> policy;          // incentive at each grid point
    std::vector<Region> policy_region;   // branch the chosen incentive lands in
    std::vector<int> switch_points;      // first index of each new policy segment
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
};

namespace detail {

/// Branch selection for the simplified Q function. The interval structure
/// is [0, low) / [low, high) / [high, 1], with the degenerate equality
/// low == high == p kept in the learning branch (see classify_region).
inline Region q_branch(const IncentivePair& dd, double p) {
    if (p < dd.low - kRegionBoundaryTol) return Region::P3;
    if (p < dd.high || p <= dd.low + kRegionBoundaryTol) return Region::P2;
    return Region::P1;
}

}  // namespace detail

/// Q(pi, p) with continuation values read from a grid-sampled V. Herding
/// branches freeze the belief; the learning branch averages over the two
/// private posteriors with the observation marginals sigma(pi, y).
inline double q_value(const FusionCostSpec& spec, const IncentiveCoefficients& coeffs,
                      const ObservationModel& model, const BeliefGrid& grid,
                      const std::vector<double>& values, const Belief& belief,
                      double incentive, double rho) {
    const IncentivePair dd = incentive_pair(coeffs, belief, model);
    const Region branch = detail::q_branch(dd, incentive);
    const double c = stage_cost(spec, belief, incentive, branch);
    if (branch != Region::P2) return c + rho * grid.interpolate(values, belief.p2);
    const Belief eta1 = private_update(belief, 1, model);
    const Belief eta2 = private_update(belief, 2, model);
    const double s1 = model(1, 1) * belief.p1 + model(2, 1) * belief.p2;
    const double s2 = model(1, 2) * belief.p1 + model(2, 2) * belief.p2;
    return c + rho * (s1 * grid.interpolate(values, eta1.p2) +
                      s2 * grid.interpolate(values, eta2.p2));
}

inline double q_value(const FusionCostSpec& spec, const RewardParams& params,
                      const ObservationModel& model, const BeliefGrid& grid,
                      const std::vector<double>& values, const Belief& belief,
                      double incentive, double rho) {
    return q_value(spec, coefficients(params, model), model, grid, values, belief,
                   incentive, rho);
}

struct BackupResult {
    std::vector<double> value;
    std::vector<double> policy;
    std::vector<Region> policy_region;
};

/// One Bellman sweep. For the linear cost the minimization over [0,1]
/// reduces to the three candidates {0, low, high}; the entropy cost has no
/// such reduction, so a dense incentive grid is searched as well.
inline BackupResult bellman_backup(const FusionCostSpec& spec,
                                   const IncentiveCoefficients& coeffs,
                                   const ObservationModel& model, const BeliefGrid& grid,
                                   const std::vector<double>& values, double rho,
                                   int entropy_search_points = 101) {
    BackupResult out;
    out.value.resize(grid.n);
    out.policy.resize(grid.n);
    out.policy_region.resize(grid.n);

    std::vector<double> candidates;
    for (int i = 0; i < grid.n; ++i) {
        const Belief pi = Belief::from_p2(grid.point(i));
        const IncentivePair dd = incentive_pair(coeffs, pi, model);
        candidates.clear();
        candidates.push_back(0.0);
        candidates.push_back(std::clamp(dd.low, 0.0, 1.0));
        candidates.push_back(std::clamp(dd.high, 0.0, 1.0));
        if (spec.kind == CostKind::entropy) {
            for (int j = 0; j < entropy_search_points; ++j)
                candidates.push_back(static_cast<double>(j) / (entropy_search_points - 1));
        }
        double best = std::numeric_limits<double>::infinity();
        double best_p = 0.0;
        for (double p : candidates) {
            const double q = q_value(spec, coeffs, model, grid, values, pi, p, rho);
            if (q < best) {
                best = q;
                best_p = p;
            }
        }
        out.value[i] = best;
        out.policy[i] = best_p;
        out.policy_region[i] = detail::q_branch(dd, best_p);
    }
    return out;
}

/// Indices where the policy crosses between "don't incentivize" (herding
/// branch) and the learning branch.
inline std::vector<int> detect_switch_points(const std::vector<Region>& policy_region) {
    std::vector<int> switches;
    for (std::size_t i = 1; i < policy_region.size(); ++i) {
        const bool was = policy_region[i - 1] == Region::P2;
        const bool now = policy_region[i] == Region::P2;
        if (was != now) switches.push_back(static_cast<int>(i));
    }
    return switches;
}

inline SolveResult value_iterate(const FusionCostSpec& spec, const RewardParams& params,
                                 const ObservationModel& model, double rho,
                                 const BeliefGrid& grid, int max_iters = 1000,
                                 double tol = 1e-9) {
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("value_iterate: rho in [0,1)");
    const IncentiveCoefficients coeffs = coefficients(params, model);
    SolveResult result;
    std::vector<double> v(grid.n, 0.0);
    BackupResult back;
    for (int it = 0; it < max_iters; ++it) {
        back = bellman_backup(spec, coeffs, model, grid, v, rho);
        double diff = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            if (!std::isfinite(back.value[i]))
                throw std::runtime_error("value_iterate: non-finite value");
            diff = std::max(diff, std::abs(back.value[i] - v[i]));
        }
        v = back.value;
        result.iterations = it + 1;
        result.residual = diff;
        result.residual_history.push_back(diff);
        if (diff < tol) break;
    }
    result.value = std::move(v);
    result.policy = std::move(back.policy);
    result.policy_region = std::move(back.policy_region);
    result.switch_points = detect_switch_points(result.policy_region);
    return result;
}

struct ThresholdReport {
    bool single_switch = false;
    double threshold_p2 = 0.0;        // valid when single_switch
    std::vector<int> switch_indices;  // all switches, multi-threshold case
};

/// Midpoint-of-cell threshold when the policy switches exactly once;
/// otherwise the full switch list (entropy-cost policies).
inline ThresholdReport extract_threshold(const SolveResult& result, const BeliefGrid& grid) {
    ThresholdReport report;
    report.switch_indices = result.switch_points;
    if (result.switch_points.size() == 1) {
        const int i = result.switch_points.front();
        report.single_switch = true;
        report.threshold_p2 = 0.5 * (grid.point(i - 1) + grid.point(i));
    }
    return report;
}

struct PolicyEvalResult {
    std::vector<double> value;
    int iterations = 0;
    double residual = 0.0;
};

/// Fixed-policy value by iterating the policy-restricted backup. With
/// tol <= 0 this runs exactly max_iters sweeps, which from W = 0 yields
/// the horizon-max_iters truncated discounted cost.
inline PolicyEvalResult evaluate_policy(const FusionCostSpec& spec, const RewardParams& params,
                                        const ObservationModel& model,
                                        const std::function<double(const Belief&)>& policy,
                                        double rho, const BeliefGrid& grid,
                                        int max_iters = 1000, double tol = 1e-9) {
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("evaluate_policy: rho in [0,1)");
    const IncentiveCoefficients coeffs = coefficients(params, model);
    PolicyEvalResult result;
    std::vector<double> w(grid.n, 0.0), next(grid.n);
    for (int it = 0; it < max_iters; ++it) {
        double diff = 0.0;
        for (int i = 0; i < grid.n; ++i) {
            const Belief pi = Belief::from_p2(grid.point(i));
            next[i] = q_value(spec, coeffs, model, grid, w, pi, policy(pi), rho);
            diff = std::max(diff, std::abs(next[i] - w[i]));
        }
        std::swap(w, next);
        result.iterations = it + 1;
        result.residual = diff;
        if (tol > 0.0 && diff < tol) break;
    }
    result.value = std::move(w);
    return result;
}

/// Always-incentivize policy mu_c(pi) = Delta(eta_{y=2}), clamped to [0,1].
inline std::function<double(const Belief&)> make_consistency_policy(
    const IncentiveCoefficients& coeffs, const ObservationModel& model) {
    return [coeffs, model](const Belief& pi) {
        return std::clamp(incentive_function(coeffs, pi, 2, model), 0.0, 1.0);
    };
}

/// Threshold policy: zero below the threshold, Delta(eta_{y=2}) above.
inline std::function<double(const Belief&)> make_threshold_policy(
    const IncentiveCoefficients& coeffs, const ObservationModel& model, double threshold_p2) {
    return [coeffs, model, threshold_p2](const Belief& pi) {
        if (pi.p2 < threshold_p2) return 0.0;
        return std::clamp(incentive_function(coeffs, pi, 2, model), 0.0, 1.0);
    };
}

/// Uniform bound on the extra discounted cost of the always-incentivize
/// policy relative to the optimal threshold policy:
/// 2 (1-phi_s)/(1-rho) * e^{2 d^2} / (e^{2 d^2} - 1), d = pi_s*(1) - B21.
/// Infinite (flagged by the return value) when d = 0.
inline double consistency_cost_bound(double phi_s, double rho, double pi_star_1, double b21) {
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("consistency_cost_bound: rho in [0,1)");
    const double d = pi_star_1 - b21;
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    const double g = std::exp(2.0 * d * d);
    return 2.0 * (1.0 - phi_s) / (1.0 - rho) * g / (g - 1.0);
}

}  // namespace cif
