#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "cif/belief.hpp"

// The social sensor's side of the model: per-action reward, myopic action
// choice, the fusion center's incentive function Delta, the belief-space
// region partition it induces, and the resulting decision likelihood.

namespace cif {

/// Per-action reward parameters, indexed by action a in {1,2}:
/// r(x,y,a) = delta_a * p - alpha_a I(a != x) - beta_a I(a != y) - gamma_a.
struct RewardParams {
    std::array<double, 2> delta{};
    std::array<double, 2> alpha{};
    std::array<double, 2> beta{};
    std::array<double, 2> gamma{};

    double d(int a) const { return delta[a - 1]; }
    double al(int a) const { return alpha[a - 1]; }
    double be(int a) const { return beta[a - 1]; }
    double ga(int a) const { return gamma[a - 1]; }

    bool in_unit_range() const {
        for (const auto* v : {&delta, &alpha, &beta, &gamma})
            for (double x : *v)
                if (x < 0.0 || x > 1.0) return false;
        return true;
    }

    /// Sufficient ordering for the incentive-function coefficients to be
    /// positive: alpha1 > alpha2 >= beta1 > beta2, delta2 > delta1,
    /// gamma2 > gamma1. Experiments may run with this violated; callers
    /// decide whether it is fatal.
    bool positivity_ok() const {
        return alpha[0] > alpha[1] && alpha[1] >= beta[0] && beta[0] > beta[1] &&
               delta[1] > delta[0] && gamma[1] > gamma[0];
    }
};

/// Coefficients of the incentive function Delta(eta) = l1*eta(1) - l2*eta(2) + l3.
struct IncentiveCoefficients {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
};

/// Belief-space partition for a given incentive: P1 - action 2 optimal,
/// P2 - action follows the observation (social learning), P3 - action 1
/// optimal. P1 and P3 are the herding regions.
enum class Region { P1, P2, P3 };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::P1: return "P1";
        case Region::P2: return "P2";
        default: return "P3";
    }
}

inline IncentiveCoefficients coefficients(const RewardParams& params,
                                          const ObservationModel& model) {
    const double d = params.d(2) - params.d(1);
    if (d == 0.0) throw std::domain_error("coefficients: delta2 == delta1");
    return IncentiveCoefficients{
        (params.al(2) + params.be(2) * model(1, 1) - params.be(1) * model(1, 2)) / d,
        (params.al(1) - params.be(2) * model(2, 1) + params.be(1) * model(2, 2)) / d,
        (params.ga(2) - params.ga(1)) / d};
}

/// Minimal compensation that makes the high action optimal at the private
/// belief reached from (prior, obs). Raw value; clamping to [0,1] is the
/// policy layer's business.
inline double incentive_function(const IncentiveCoefficients& coeffs, const Belief& prior,
                                 int obs, const ObservationModel& model) {
    const Belief eta = private_update(prior, obs, model);
    return coeffs.l1 * eta.p1 - coeffs.l2 * eta.p2 + coeffs.l3;
}

/// Both incentive-function branches at one belief. Under TP2 the y=2
/// posterior dominates the y=1 posterior, so low <= high.
struct IncentivePair {
    double low;   // Delta(eta_{y=2})
    double high;  // Delta(eta_{y=1})
};

/// Rounding slack on the region boundaries. At point-mass beliefs both
/// incentive branches collapse to the same value up to floating-point
/// error, so the boundary test must not hinge on exact equality.
inline constexpr double kRegionBoundaryTol = 1e-12;

inline IncentivePair incentive_pair(const IncentiveCoefficients& coeffs, const Belief& prior,
                                    const ObservationModel& model) {
    return {incentive_function(coeffs, prior, 2, model),
            incentive_function(coeffs, prior, 1, model)};
}

/// Observation-marginalized reward r(x,a), as a 2x2 array indexed [x-1][a-1]:
/// r(x,a) = delta_a p - alpha_a I(a != x) - beta_a P(y != a | x) - gamma_a.
inline std::array<std::array<double, 2>, 2> expected_reward(const RewardParams& params,
                                                            const ObservationModel& model,
                                                            double incentive) {
    std::array<std::array<double, 2>, 2> r{};
    for (int x = 1; x <= 2; ++x)
        for (int a = 1; a <= 2; ++a)
            r[x - 1][a - 1] = params.d(a) * incentive - params.al(a) * (a != x ? 1.0 : 0.0) -
                              params.be(a) * (1.0 - model(x, a)) - params.ga(a);
    return r;
}

/// Supermodularity of the reward: r(1,1) > r(2,1) and r(2,2) > r(1,2) for
/// every incentive. The differences are incentive-independent (delta cancels
/// within a column), so checking once suffices.
inline bool check_supermodular(const RewardParams& params, const ObservationModel& model) {
    const auto r = expected_reward(params, model, 0.0);
    return r[0][0] > r[1][0] && r[1][1] > r[0][1];
}

/// Myopic action arg max_a r_a' eta_y. The argmax reduces to comparing the
/// incentive against Delta(eta_y); ties resolve to action 2 within the same
/// boundary tolerance as classify_region, so that an incentive of exactly
/// Delta(eta_{y=2}) yields a = y (classify_region_by_sign keeps the raw
/// reward comparison as an independent cross-check).
inline int choose_action(const RewardParams& params, const ObservationModel& model,
                         double incentive, const Belief& prior, int obs) {
    const double needed = incentive_function(coefficients(params, model), prior, obs, model);
    return incentive >= needed - kRegionBoundaryTol ? 2 : 1;
}

/// Region from the incentive intervals: [0, low) -> P3, [low, high) -> P2,
/// [high, 1] -> P1. The boundary incentive p == low is kept in P2 (within
/// kRegionBoundaryTol) so that the calibrated zero incentive at e2 still
/// buys informative decisions; this is the convention behind the corner
/// value V(e2) = -phi_s / (1 - rho).
inline Region classify_region(const IncentiveCoefficients& coeffs,
                              const ObservationModel& model, double incentive,
                              const Belief& prior) {
    const IncentivePair dd = incentive_pair(coeffs, prior, model);
    if (incentive < dd.low - kRegionBoundaryTol) return Region::P3;
    if (incentive < dd.high || incentive <= dd.low + kRegionBoundaryTol) return Region::P2;
    return Region::P1;
}

inline Region classify_region(const RewardParams& params, const ObservationModel& model,
                              double incentive, const Belief& prior) {
    return classify_region(coefficients(params, model), model, incentive, prior);
}

/// Same partition computed independently from the sign tests on
/// (r_1 - r_2)' eta_y; used to cross-check the interval version.
inline Region classify_region_by_sign(const RewardParams& params,
                                      const ObservationModel& model, double incentive,
                                      const Belief& prior) {
    const auto r = expected_reward(params, model, incentive);
    const auto diff = [&](int obs) {
        const Belief eta = private_update(prior, obs, model);
        return (r[0][0] - r[0][1]) * eta.p1 + (r[1][0] - r[1][1]) * eta.p2;
    };
    if (diff(2) > 0.0) return Region::P3;
    if (diff(1) > 0.0) return Region::P2;
    return Region::P1;
}

/// Decision likelihood induced by (belief, incentive): unit columns in the
/// herding regions, the observation matrix in the learning region.
inline DecisionLikelihood decision_likelihood(const RewardParams& params,
                                              const ObservationModel& model,
                                              double incentive, const Belief& prior) {
    switch (classify_region(params, model, incentive, prior)) {
        case Region::P3: return DecisionLikelihood({{{1.0, 0.0}, {1.0, 0.0}}});
        case Region::P1: return DecisionLikelihood({{{0.0, 1.0}, {0.0, 1.0}}});
        default: return DecisionLikelihood(model.b);
    }
}

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Recover the unique row-stochastic observation model for which the
/// incentive function is normalized to Delta(e1) = 1 and Delta(e2) = 0.
/// Those two conditions are linear in B11 and B21.
inline ObservationModel calibrate_observation_model(const RewardParams& params) {
    const double d = params.d(2) - params.d(1);
    if (d == 0.0) throw CalibrationError("calibration: delta2 == delta1");
    const double bsum = params.be(1) + params.be(2);
    if (bsum == 0.0) throw CalibrationError("calibration: beta1 + beta2 == 0");
    const double l3 = (params.ga(2) - params.ga(1)) / d;
    // l1 + l3 = 1  =>  alpha2 - beta1 + (beta1+beta2) B11 = d (1 - l3)
    const double b11 = (d * (1.0 - l3) - params.al(2) + params.be(1)) / bsum;
    // l2 = l3      =>  alpha1 + beta1 - (beta1+beta2) B21 = d l3
    const double b21 = (params.al(1) + params.be(1) - d * l3) / bsum;
    const double tol = 1e-9;
    if (b11 < -tol || b11 > 1.0 + tol || b21 < -tol || b21 > 1.0 + tol)
        throw CalibrationError("calibration: solution leaves [0,1]");
    const double c11 = std::clamp(b11, 0.0, 1.0);
    const double c21 = std::clamp(b21, 0.0, 1.0);
    return ObservationModel({{{c11, 1.0 - c11}, {c21, 1.0 - c21}}});
}

/// Residuals of the two calibration identities for a given (params, model)
/// pair; zero when the model actually solves them.
struct CalibrationResiduals {
    double at_e1;  // Delta(e1) - 1 = l1 + l3 - 1
    double at_e2;  // Delta(e2) - 0 = l3 - l2
};

inline CalibrationResiduals calibration_residuals(const RewardParams& params,
                                                  const ObservationModel& model) {
    const IncentiveCoefficients c = coefficients(params, model);
    return {c.l1 + c.l3 - 1.0, c.l3 - c.l2};
}

namespace presets {

/// Reward parameters normalized against the baseline observation channel.
inline RewardParams baseline() {
    return RewardParams{{0.3, 0.95}, {0.288, 0.278}, {0.11, 0.1}, {0.1, 0.414}};
}

/// Reward parameters paired with the squared observation channel.
inline RewardParams channel_squared() {
    return RewardParams{{0.3, 0.95}, {0.3132, 0.3032}, {0.11, 0.1}, {0.1, 0.414}};
}

/// Reward parameters paired with the cubed observation channel.
inline RewardParams channel_cubed() {
    return RewardParams{{0.3, 0.95}, {0.3233, 0.3133}, {0.11, 0.1}, {0.1, 0.414}};
}

}  // namespace presets

}  // namespace cif
