#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

// Two-state belief arithmetic: Bayesian posterior updates, the social
// learning filter, and the stochastic-order predicates used by the
// structural results (TP2, first-order dominance, Blackwell ordering).

namespace cif {

inline constexpr double kBeliefTol = 1e-12;
inline constexpr double kNormalizerFloor = 1e-300;

/// Point on the 2-simplex. The orderings and thresholds in this library
/// are all stated on the second component, so p2 is the canonical
/// coordinate; p1 is kept alongside for interface clarity.
struct Belief {
    double p1 = 1.0;
    double p2 = 0.0;

    Belief() = default;
    Belief(double a, double b) : p1(a), p2(b) {
        if (p1 < -kBeliefTol || p2 < -kBeliefTol ||
            std::abs(p1 + p2 - 1.0) > kBeliefTol) {
            throw std::invalid_argument("Belief: components must be >= 0 and sum to 1");
        }
    }

    static Belief from_p2(double p2) { return Belief(1.0 - p2, p2); }

    double operator()(int i) const { return i == 1 ? p1 : p2; }
};

inline const Belief e1{1.0, 0.0};
inline const Belief e2{0.0, 1.0};

/// 2x2 row-stochastic observation likelihood, b[i-1][j-1] = P(y=j | x=i).
struct ObservationModel {
    std::array<std::array<double, 2>, 2> b{};

    ObservationModel() : b{{{1.0, 0.0}, {0.0, 1.0}}} {}
    explicit ObservationModel(const std::array<std::array<double, 2>, 2>& m) : b(m) {
        for (const auto& row : m) {
            if (std::abs(row[0] + row[1] - 1.0) > kBeliefTol)
                throw std::invalid_argument("ObservationModel: rows must sum to 1");
            if (row[0] < -kBeliefTol || row[1] < -kBeliefTol ||
                row[0] > 1.0 + kBeliefTol || row[1] > 1.0 + kBeliefTol)
                throw std::invalid_argument("ObservationModel: entries must lie in [0,1]");
        }
    }

    double operator()(int x, int y) const { return b[x - 1][y - 1]; }

    double det() const { return b[0][0] * b[1][1] - b[0][1] * b[1][0]; }

    ObservationModel times(const ObservationModel& o) const {
        std::array<std::array<double, 2>, 2> m{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                m[i][j] = b[i][0] * o.b[0][j] + b[i][1] * o.b[1][j];
        return ObservationModel(m);
    }

    ObservationModel power(int n) const {
        ObservationModel acc;  // identity
        for (int i = 0; i < n; ++i) acc = acc.times(*this);
        return acc;
    }
};

/// 2x2 row-stochastic action likelihood, r[i-1][a-1] = P(a | x=i, pi).
/// Rows are either unit vectors (herding) or rows of the observation
/// model (informative decisions).
struct DecisionLikelihood {
    std::array<std::array<double, 2>, 2> r{};

    DecisionLikelihood() : r{{{1.0, 0.0}, {1.0, 0.0}}} {}
    explicit DecisionLikelihood(const std::array<std::array<double, 2>, 2>& m) : r(m) {
        for (const auto& row : m) {
            if (std::abs(row[0] + row[1] - 1.0) > kBeliefTol)
                throw std::invalid_argument("DecisionLikelihood: rows must sum to 1");
        }
    }

    double operator()(int x, int a) const { return r[x - 1][a - 1]; }
};

/// Posterior after fusing one observation with the prior:
/// eta_y = B_y pi / (1' B_y pi).
inline Belief private_update(const Belief& prior, int obs, const ObservationModel& model) {
    const double w1 = model(1, obs) * prior.p1;
    const double w2 = model(2, obs) * prior.p2;
    const double z = w1 + w2;
    if (z < kNormalizerFloor)
        throw std::domain_error("private_update: observation has zero likelihood under prior");
    return Belief(w1 / z, w2 / z);
}

/// Normalizer sigma(pi, a) = 1' R_a pi of the social learning filter.
inline double action_probability(const Belief& prior, int action,
                                 const DecisionLikelihood& likelihood) {
    return likelihood(1, action) * prior.p1 + likelihood(2, action) * prior.p2;
}

/// Social learning filter T(pi, a) = R_a pi / sigma(pi, a). The likelihood
/// depends on the prior itself (computed upstream), which is what freezes
/// the belief once decisions stop carrying observation content.
inline Belief social_filter(const Belief& prior, int action,
                            const DecisionLikelihood& likelihood) {
    const double z = action_probability(prior, action, likelihood);
    if (z < kNormalizerFloor)
        throw std::domain_error("social_filter: action impossible under model");
    return Belief(likelihood(1, action) * prior.p1 / z,
                  likelihood(2, action) * prior.p2 / z);
}

/// First-order stochastic dominance; in two states, a >= b iff a(2) >= b(2).
inline bool fsd_geq(const Belief& a, const Belief& b) { return a.p2 >= b.p2; }

/// Totally positive of order 2: non-negative determinant.
inline bool is_tp2(const ObservationModel& model) { return model.det() >= 0.0; }

/// Blackwell ordering: b1 dominates b2 iff b2 = b1 * Gamma for a stochastic
/// Gamma. Row sums of Gamma are automatic when b1 is invertible, so the
/// substantive check is entry non-negativity (tolerance absorbs the
/// floating-point solve).
inline bool blackwell_geq(const ObservationModel& b1, const ObservationModel& b2,
                          double tol = 1e-9) {
    const double d = b1.det();
    if (d == 0.0) throw std::domain_error("blackwell_geq: first model is singular");
    // Gamma = b1^{-1} b2
    std::array<std::array<double, 2>, 2> inv{
        {{b1.b[1][1] / d, -b1.b[0][1] / d}, {-b1.b[1][0] / d, b1.b[0][0] / d}}};
    for (int i = 0; i < 2; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double g = inv[i][0] * b2.b[0][j] + inv[i][1] * b2.b[1][j];
            if (g < -tol || g > 1.0 + tol) return false;
            row_sum += g;
        }
        if (std::abs(row_sum - 1.0) > tol) return false;
    }
    return true;
}

}  // namespace cif
