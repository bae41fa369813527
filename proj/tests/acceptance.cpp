// Acceptance suite: one check per numbered criterion, each printing a
// single [PASS]/[FAIL] line. Exit status is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cif/cli.hpp"
#include "cif/simulate.hpp"
#include "cif/solver.hpp"

using namespace cif;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

struct Baseline {
    RewardParams params = presets::baseline();
    ObservationModel model = calibrate_observation_model(presets::baseline());
    IncentiveCoefficients coeffs = coefficients(params, model);
};

double solved_threshold(const Baseline& base, double phi_s, double rho,
                        const BeliefGrid& grid) {
    const SolveResult sol =
        value_iterate(FusionCostSpec::linear(phi_s), base.params, base.model, rho, grid);
    const ThresholdReport rep = extract_threshold(sol, grid);
    if (!rep.single_switch) throw std::runtime_error("expected a single-threshold policy");
    return rep.threshold_p2;
}

// -------------------------------------------------------------------------

void criterion_1(const Baseline& base) {
    const BeliefGrid grid(1000);
    const SolveResult sol =
        value_iterate(FusionCostSpec::linear(0.4), base.params, base.model, 0.4, grid);
    const double v_e1 = sol.value.front();
    const double v_e2 = sol.value.back();
    const bool pass = std::abs(v_e2 - (-0.4 / 0.6)) <= 1e-6 && std::abs(v_e1) <= 1e-9;
    report(1, pass, "corner values V(e2) = -phi_s/(1-rho), V(e1) = 0",
           "V(e2)=" + num(v_e2) + " V(e1)=" + num(v_e1));
}

void criterion_2(const Baseline& base) {
    const BeliefGrid grid(1000);
    const SolveResult sol =
        value_iterate(FusionCostSpec::linear(0.4), base.params, base.model, 0.4, grid);
    bool pointwise = true;
    for (int i = 0; i < grid.n; ++i) {
        const Belief pi = Belief::from_p2(grid.point(i));
        const double want =
            sol.policy_region[i] == Region::P2
                ? std::clamp(incentive_function(base.coeffs, pi, 2, base.model), 0.0, 1.0)
                : 0.0;
        if (std::abs(sol.policy[i] - want) > 1e-12) pointwise = false;
    }
    const bool pass = sol.switch_points.size() == 1 && pointwise;
    report(2, pass, "single switch; policy is 0 / Delta(eta_2) pointwise",
           "switches=" + std::to_string(sol.switch_points.size()) +
               (pointwise ? ", policy matches" : ", policy mismatch"));
}

void criterion_3(const Baseline& base) {
    const BeliefGrid grid(1000);
    const double t04 = solved_threshold(base, 0.4, 0.4, grid);
    const double t06 = solved_threshold(base, 0.6, 0.4, grid);
    const bool pass = t06 <= t04 - grid.spacing();
    report(3, pass, "threshold decreases in phi_s by at least one cell",
           "pi*(0.6)=" + num(t06) + " pi*(0.4)=" + num(t04));
}

void criterion_4(const Baseline& base) {
    const BeliefGrid grid(1000);
    const SolveResult s04 =
        value_iterate(FusionCostSpec::linear(0.4), base.params, base.model, 0.4, grid);
    const SolveResult s06 =
        value_iterate(FusionCostSpec::linear(0.4), base.params, base.model, 0.6, grid);
    const double tau = extract_threshold(s04, grid).threshold_p2;
    bool dominated = true;
    for (int i = 0; i < grid.n; ++i)
        if (grid.point(i) >= tau && s06.value[i] > s04.value[i] + 1e-9) dominated = false;
    const bool corners = std::abs(s06.value.back() - (-1.0)) <= 1e-6 &&
                         std::abs(s04.value.back() - (-2.0 / 3.0)) <= 1e-6;
    report(4, corners && dominated, "discount sensitivity at e2 and dominance above pi*",
           "V_0.6(e2)=" + num(s06.value.back()) + " V_0.4(e2)=" + num(s04.value.back()) +
               (dominated ? ", dominated" : ", dominance fails"));
}

void criterion_5() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cif_acceptance_calibrate";
    fs::remove_all(dir);
    ExperimentConfig c;
    c.out_dir = dir.string();
    cli::cmd_calibrate(c);
    std::ifstream in(dir / "calibration.json");
    const auto j = nlohmann::json::parse(in);
    const double b11 = j["b"][0][0].get<double>();
    const double b21 = j["b"][1][0].get<double>();
    const bool pass = std::abs(b11 - 0.8) <= 1e-12 && std::abs(b21 - 0.4) <= 1e-12 &&
                      std::abs(j["residual_at_e1"].get<double>()) < 1e-12 &&
                      std::abs(j["residual_at_e2"].get<double>()) < 1e-12 &&
                      j["a1_tp2"].get<bool>() && j["a2_supermodular"].get<bool>();
    fs::remove_all(dir);
    report(5, pass, "calibration recovers the channel with clean residuals",
           "b11=" + num(b11) + " b21=" + num(b21));
}

void criterion_6(const Baseline& base) {
    int checked = 0, agreed = 0;
    for (int i = 0; i < 200; ++i) {
        const Belief pi = Belief::from_p2(i / 199.0);
        const IncentivePair dd = incentive_pair(base.coeffs, pi, base.model);
        for (int jj = 0; jj < 200; ++jj) {
            const double p = jj / 199.0;
            if (std::abs(p - dd.low) < 1e-9 || std::abs(p - dd.high) < 1e-9) continue;
            ++checked;
            if (classify_region(base.coeffs, base.model, p, pi) ==
                classify_region_by_sign(base.params, base.model, p, pi))
                ++agreed;
        }
    }
    report(6, checked > 0 && agreed == checked,
           "interval and sign region tests agree off the boundaries",
           std::to_string(agreed) + "/" + std::to_string(checked));
}

void criterion_7(const Baseline& base) {
    const BeliefGrid grid(1000);
    const double tau = solved_threshold(base, 0.4, 0.6, grid);
    const FusionCostSpec cost = FusionCostSpec::linear(0.4);
    // Start well above the threshold so the incentive sequence is active and
    // the initial belief is not within one filter step of the switch.
    const Belief prior = Belief::from_p2(std::max(0.9, tau + 0.15));
    std::vector<Trajectory> paths;
    for (int i = 0; i < 100; ++i)
        paths.push_back(simulate_path(base.params, base.model, cost,
                                      PolicySpec::threshold(tau), prior, 500,
                                      path_seed(2001, i)));
    const SubmartingaleStats sub = submartingale_stats(paths);
    const bool increments_ok = sub.min_margin >= 0.0;
    // Cumulative (paid-out) mean incentive up to step k.
    const auto cumulative = [&](int k) {
        double total = 0.0;
        for (const auto& t : paths)
            for (int j = 0; j < k; ++j) total += t.incentives[j];
        return total / paths.size();
    };
    const double c10 = cumulative(10), c500 = cumulative(500);
    const bool pass = increments_ok && c500 > c10;
    report(7, pass, "sub-martingale increments and growing cumulative payout",
           "min(mean+3se)=" + num(sub.min_margin) + " cum10=" + num(c10) +
               " cum500=" + num(c500));
}

void criterion_8(const Baseline& base) {
    const BeliefGrid grid(1000);
    const double tau = solved_threshold(base, 0.4, 0.4, grid);
    const FusionCostSpec cost = FusionCostSpec::linear(0.4);
    std::vector<Trajectory> paths;
    for (int i = 0; i < 500; ++i)
        paths.push_back(simulate_path(base.params, base.model, cost,
                                      PolicySpec::consistency(), Belief::from_p2(0.5), 500,
                                      path_seed(3001, i), 2));
    const ConsistencyStats stats = consistency_stats(paths, 0.1, tau, base.model);
    const double diverged = stats.p_diverged.back();
    bool envelope_ok = true;
    double worst = -1.0;
    for (std::size_t k = 0; k < stats.p_in_low.size(); ++k) {
        const double slack = stats.envelope[k] + 3.0 * stats.se_in_low[k];
        worst = std::max(worst, stats.p_in_low[k] - slack);
        if (stats.p_in_low[k] > slack) envelope_ok = false;
    }
    const bool pass = diverged <= 0.05 && envelope_ok;
    report(8, pass, "consistency under mu_c with the concentration envelope",
           "P(diverged,500)=" + num(diverged) + " max(p - envelope - 3se)=" + num(worst));
}

void criterion_9(const Baseline& base) {
    const FusionCostSpec cost = FusionCostSpec::linear(0.4);
    bool pass = true;
    for (double p2 : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const Trajectory t = simulate_path(base.params, base.model, cost, PolicySpec::zero(),
                                           Belief::from_p2(p2), 50, 4001, 1);
        for (int k = 0; k < 50; ++k) {
            if (t.actions[k] != 1) pass = false;
            if (std::abs(t.beliefs[k + 1].p2 - p2) > 1e-15) pass = false;
        }
    }
    report(9, pass, "zero incentives freeze the public belief (cascade)",
           pass ? "all interior priors frozen, all actions = 1" : "belief moved or action != 1");
}

void criterion_10(const Baseline& base) {
    const BeliefGrid grid(1000);
    const double rho = 0.4, phi_s = 0.4;
    const FusionCostSpec cost = FusionCostSpec::linear(phi_s);
    const SolveResult sol = value_iterate(cost, base.params, base.model, rho, grid);
    const double tau = extract_threshold(sol, grid).threshold_p2;
    const PolicyEvalResult wc =
        evaluate_policy(cost, base.params, base.model,
                        make_consistency_policy(base.coeffs, base.model), rho, grid);
    double max_gap = -1e300, min_gap = 1e300;
    for (int i = 0; i < grid.n; ++i) {
        const double g = wc.value[i] - sol.value[i];
        max_gap = std::max(max_gap, g);
        min_gap = std::min(min_gap, g);
    }
    const double bound = consistency_cost_bound(phi_s, rho, 1.0 - tau, base.model(2, 1));

    int horizon = 1;
    while (std::pow(rho, horizon) * (1.0 + phi_s) / (1.0 - rho) >= 1e-6) ++horizon;
    const CostGapResult mc = empirical_cost_gap(base.params, base.model, cost, rho, tau, 21,
                                                200, horizon, 5001);
    bool mc_ok = true;
    double worst = 0.0;
    for (std::size_t s = 0; s < mc.starts.size(); ++s) {
        const double grid_gap = grid.interpolate(wc.value, mc.starts[s]) -
                                grid.interpolate(sol.value, mc.starts[s]);
        const double err = std::abs(mc.gap[s] - grid_gap);
        const double allow = 3.0 * mc.se[s] + 2.0 / (grid.n - 1) + 1e-5;
        worst = std::max(worst, err - allow);
        if (err > allow) mc_ok = false;
    }
    const bool pass = max_gap <= bound && min_gap >= -1e-9 && mc_ok;
    report(10, pass, "consistency cost gap within the analytic bound",
           "max_gap=" + num(max_gap) + " bound=" + num(bound) + " min_gap=" + num(min_gap) +
               " mc_worst_excess=" + num(worst));
}

void criterion_11(const Baseline& base) {
    const BeliefGrid grid(1000);
    EntropyWeight quad;  // 0.1 - pi(2)^2
    const SolveResult a = value_iterate(FusionCostSpec::entropy(0.25, quad), base.params,
                                        base.model, 0.8, grid);
    const bool multi = a.switch_points.size() >= 2;

    EntropyWeight two;
    two.kind = EntropyWeight::Kind::two_level;  // 0.6 I(<0.75) - 0.35 I(>0.75)
    const SolveResult b = value_iterate(FusionCostSpec::entropy(0.4, two), base.params,
                                        base.model, 0.6, grid);
    double jump = 0.0;
    for (int i = 0; i + 1 < grid.n; ++i) {
        const double p2 = grid.point(i);
        if (p2 < 0.70 || p2 > 0.80) continue;
        jump = std::max(jump, std::abs(b.value[i + 1] - b.value[i]));
    }
    const bool pass = multi && jump >= 0.05;
    report(11, pass, "entropy cost: multi-threshold policy and value jump",
           "switches=" + std::to_string(a.switch_points.size()) + " jump=" + num(jump));
}

void criterion_12(const Baseline& base) {
    const BeliefGrid grid(1001);
    const double rho = 0.4;
    const FusionCostSpec cost = FusionCostSpec::linear(0.4);
    const Belief prior = Belief::from_p2(0.5);
    const int horizon = 6;

    const SolveResult sol = value_iterate(cost, base.params, base.model, rho, grid);
    const std::vector<std::pair<std::string, PolicySpec>> policies{
        {"zero", PolicySpec::zero()},
        {"threshold", PolicySpec::threshold(0.35)},
        {"consistency", PolicySpec::consistency()},
        {"grid", PolicySpec::from_grid(grid, sol.policy)}};

    bool pass = true;
    std::string detail;
    for (const auto& [name, spec] : policies) {
        const double exact =
            brute_force_cost(base.params, base.model, cost, spec, prior, rho, horizon);
        const McEstimate mc = mc_discounted_cost(base.params, base.model, cost, spec, prior,
                                                 rho, 10000, horizon, 6001);
        const auto policy_fn = make_policy(spec, base.params, base.model);
        const PolicyEvalResult trunc = evaluate_policy(cost, base.params, base.model,
                                                       policy_fn, rho, grid, horizon, 0.0);
        const double interp = grid.interpolate(trunc.value, prior.p2);
        const double allow = 3.0 * mc.se + 2.0 / (grid.n - 1);
        const bool ok = std::abs(mc.mean - exact) <= allow && std::abs(interp - exact) <= allow;
        if (!ok) pass = false;
        detail += name + ":" + num(std::max(std::abs(mc.mean - exact),
                                            std::abs(interp - exact))) + " ";
    }
    report(12, pass, "enumeration, Monte Carlo and grid evaluation triangle", detail);
}

void criterion_13(const Baseline& base) {
    const double rho = 0.6, phi_s = 0.4;
    const FusionCostSpec cost = FusionCostSpec::linear(phi_s);
    const cli::ModelSuite suite = cli::model_suite({"b", "b2", "b3"});
    const BeliefGrid grid(1000);

    std::vector<PolicySpec> policies;
    double max_tau = 0.0;
    for (std::size_t m = 0; m < suite.names.size(); ++m) {
        const SolveResult sol =
            value_iterate(cost, suite.params[m], suite.models[m], rho, grid);
        const ThresholdReport rep = extract_threshold(sol, grid);
        policies.push_back(PolicySpec::threshold(rep.threshold_p2));
        max_tau = std::max(max_tau, rep.threshold_p2);
    }
    // Start above every channel's threshold so all three sequences are live.
    const Belief prior = Belief::from_p2(std::min(0.9, max_tau + 0.1));
    const AveragedIncentives avg = averaged_incentives(suite.models, suite.params, policies,
                                                       cost, prior, 100, 500, 7001);
    bool ordered = true;
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        const auto pair_ok = [&](int hi, int lo) {
            const double slack =
                3.0 * std::sqrt(avg.se[hi][k] * avg.se[hi][k] + avg.se[lo][k] * avg.se[lo][k]);
            worst = std::max(worst, avg.mean[lo][k] - avg.mean[hi][k] - slack);
            return avg.mean[hi][k] >= avg.mean[lo][k] - slack;
        };
        if (!pair_ok(2, 1) || !pair_ok(1, 0)) ordered = false;
    }
    // Cumulative payout per curve grows between k=10 and k=500.
    bool growing = true;
    for (int m = 0; m < 3; ++m) {
        double c10 = 0.0, c500 = 0.0;
        for (int k = 0; k < 500; ++k) {
            if (k < 10) c10 += avg.mean[m][k];
            c500 += avg.mean[m][k];
        }
        if (!(c500 > c10)) growing = false;
    }
    report(13, ordered && growing, "channel ordering of averaged incentives",
           std::string(ordered ? "ordered" : "order violated") +
               ", worst_excess=" + num(worst) + (growing ? ", growing" : ", not growing"));
}

}  // namespace

int main() {
    const Baseline base;
    criterion_1(base);
    criterion_2(base);
    criterion_3(base);
    criterion_4(base);
    criterion_5();
    criterion_6(base);
    criterion_7(base);
    criterion_8(base);
    criterion_9(base);
    criterion_10(base);
    criterion_11(base);
    criterion_12(base);
    criterion_13(base);
    if (g_failures == 0)
        std::printf("all 13 acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
