// Acceptance gate: one line per criterion, tolerances pinned in this file.
// Prints PASS/FAIL per criterion and exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "aflab/field3d.hpp"
#include "aflab/monotone.hpp"
#include "aflab/radial_harmonic.hpp"
#include "aflab/radial_metric.hpp"
#include "aflab/suites.hpp"

using namespace aflab;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* slug, bool pass, const std::string& detail) {
    std::printf("%s criterion-%02d %-24s %s\n", pass ? "PASS" : "FAIL", id, slug,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

const std::pair<double, double> kExteriorCases[] = {
    {0.5, 1.0}, {2.0, 1.0}, {-0.5, 1.0}, {1.0, 0.3}};

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> ts;
    const auto count = static_cast<std::size_t>((hi - lo) / step + 0.5);
    for (std::size_t i = 0; i <= count; ++i) ts.push_back(lo + static_cast<double>(i) * step);
    return ts;
}

double closed_L_exterior(double m, double r0, double t) {
    const double T = r0 / (r0 + 0.5 * m);
    const double lin = (1.0 - T) * t + T;
    return lin * lin * (1.0 - t) * (1.0 - t);
}

// --- criterion 1: capacity against the closed form, under one second -------
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& [m, r0] : kExteriorCases) {
        const auto prof = solve_radial(
            RadialConformalMetric::schwarzschild(m, DomainKind::ExteriorOfSphere, r0));
        worst = std::max(worst, std::abs(prof.capacity() - (r0 + 0.5 * m)));
    }
    const double dt = seconds_since(t0);
    report(1, "schwarzschild-capacity", worst <= 1e-9 && dt < 1.0,
           "worst=" + g17(worst) + " tol=1e-9 elapsed=" + g17(dt) + "s budget=1s");
}

// --- criterion 2: L(t) against the closed forms -----------------------------
void criterion_2() {
    const auto ts = grid(0.0, 0.99, 0.01);
    double worst = 0.0;
    for (const auto& [m, r0] : kExteriorCases) {
        const auto prof = solve_radial(
            RadialConformalMetric::schwarzschild(m, DomainKind::ExteriorOfSphere, r0));
        for (double t : ts)
            worst = std::max(worst, std::abs(prof.level(t).L - closed_L_exterior(m, r0, t)));
    }
    double worst_flat = 0.0;
    const auto flat = solve_radial(RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0));
    for (double t : ts)
        worst_flat = std::max(worst_flat, std::abs(flat.level(t).L - (1.0 - t) * (1.0 - t)));
    report(2, "L-oracle", worst <= 1e-8 && worst_flat <= 1e-8,
           "worst=" + g17(worst) + " flat=" + g17(worst_flat) + " tol=1e-8");
}

// --- criterion 3: constancy at the rigidity cases ---------------------------
void criterion_3() {
    const auto ts = grid(0.0, 0.99, 0.01);
    double worst_S = 0.0;
    for (const auto& [m, r0] : kExteriorCases) {
        const auto prof = solve_radial(
            RadialConformalMetric::schwarzschild(m, DomainKind::ExteriorOfSphere, r0));
        const auto curve = monotone_curve(prof, ts);
        for (const CurvePoint& p : curve.points)
            worst_S = std::max(worst_S, std::abs(p.S - curve.bound));
    }
    double worst_Q = 0.0, worst_mc = 0.0;
    for (double m : {1.0, 2.0}) {
        const auto prof = solve_radial(
            RadialConformalMetric::schwarzschild(m, DomainKind::PuncturedSpace, 0.0));
        worst_mc = std::max(worst_mc, std::abs(m - 2.0 * prof.capacity()));
        const auto curve = monotone_curve(prof, grid(0.01, 0.99, 0.01));
        for (const CurvePoint& p : curve.points)
            worst_Q = std::max(worst_Q, std::abs(p.Q));
    }
    report(3, "rigidity-constancy",
           worst_S <= 1e-7 && worst_Q <= 1e-7 && worst_mc <= 1e-9,
           "S=" + g17(worst_S) + " Q=" + g17(worst_Q) + " m-2c=" + g17(worst_mc) +
               " tol=1e-7/1e-9");
}

// --- criterion 4: grid sup of the normalized flux functional ----------------
void criterion_4() {
    struct Pair {
        RadialConformalMetric metric;
        std::vector<double> ts;
    };
    const std::vector<Pair> pairs = {
        {RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0),
         {0.1, 0.3, 0.5}},
        {RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0), {0.2, 0.5, 0.8}},
        {RadialConformalMetric::schwarzschild(-0.5, DomainKind::ExteriorOfSphere, 1.0),
         {0.3, 0.6}},
        {RadialConformalMetric::schwarzschild(1.0, DomainKind::ExteriorOfSphere, 0.3),
         {0.25, 0.55}},
        {RadialConformalMetric::shell_superposition({Shell{1.0, 2.0, 0.0}},
                                                    DomainKind::ExteriorOfSphere, 1.0),
         {0.2, 0.6}},
        {RadialConformalMetric::shell_superposition({Shell{10.0, 10.0, 0.0}},
                                                    DomainKind::ExteriorOfSphere, 1.0),
         {0.7, 0.75, 0.8, 0.85, 0.9}},
        {RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0),
         {0.3, 0.5, 0.75}},
    };
    double worst = 0.0;
    std::size_t total = 0, capacity_branch = 0, mass_branch = 0;
    for (const Pair& pr : pairs) {
        const auto prof = solve_radial(pr.metric);
        for (double t : pr.ts) {
            const auto chk = sup_cross_check(prof.level(t).L, t);
            worst = std::max(worst, std::abs(chk.defect));
            ++total;
            (chk.branch == SBranch::Capacity ? capacity_branch : mass_branch) += 1;
        }
    }
    report(4, "sup-representation",
           worst <= 1e-6 && total == 20 && capacity_branch > 0 && mass_branch > 0,
           "worst=" + g17(worst) + " tol=1e-6 pairs=" + std::to_string(total) + " (cap=" +
               std::to_string(capacity_branch) + " mass=" + std::to_string(mass_branch) + ")");
}

// --- criterion 5: conformal rescaling identities ----------------------------
void criterion_5() {
    const std::vector<RadialConformalMetric> profiles = {
        RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::schwarzschild(-0.5, DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::shell_superposition({Shell{1.0, 2.0, 0.0}},
                                                   DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::shell_superposition({Shell{0.8, 2.5, 1.2}},
                                                   DomainKind::ExteriorOfSphere, 1.0),
    };
    double worst_B = 0.0, worst_mc = 0.0;
    for (const auto& g : profiles) {
        const auto prof = solve_radial(g);
        for (double k : {0.5, 1.0, 2.0, 5.0}) {
            const auto cg = conformal_transform(prof, k, {0.2, 0.5, 0.8});
            worst_B = std::max(worst_B, cg.max_B_dev);
            worst_mc = std::max(worst_mc, std::abs(cg.m_bar_measured - cg.m_bar_expected));
            worst_mc = std::max(worst_mc, std::abs(cg.c_bar_measured - cg.c_bar_expected));
        }
    }
    report(5, "conformal-identities", worst_B <= 1e-8 && worst_mc <= 1e-8,
           "B=" + g17(worst_B) + " mbar/cbar=" + g17(worst_mc) + " tol=1e-8");
}

// --- criteria 6 and 7: fuzz campaigns ---------------------------------------
void criterion_6(const std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg;
    cfg.command = "fuzz";
    cfg.domain = "exterior";
    cfg.seed_lo = 0;
    cfg.seed_hi = 199;
    cfg.tol_mono = 1e-7;
    cfg.tol_bound = 1e-7;
    cfg.out_dir = out;
    const int rc = run(cfg);
    const double dt = seconds_since(t0);
    report(6, "fuzz-exterior", rc == 0 && dt < 60.0,
           "exit=" + std::to_string(rc) + " seeds=200 elapsed=" + g17(dt) + "s budget=60s");
}

void criterion_7(const std::string& out) {
    RunConfig cfg;
    cfg.command = "fuzz";
    cfg.domain = "punctured";
    cfg.seed_lo = 0;
    cfg.seed_hi = 99;
    cfg.tol_mono = 1e-7;
    cfg.tol_bound = 1e-7;
    cfg.out_dir = out;
    const int rc = run(cfg);
    report(7, "fuzz-punctured", rc == 0, "exit=" + std::to_string(rc) + " seeds=100");
}

// --- criterion 8: endpoint limits -------------------------------------------
void criterion_8() {
    const std::vector<RadialConformalMetric> near_one_cases = {
        RadialConformalMetric::schwarzschild(1.0, DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0),
        RadialConformalMetric::shell_superposition({Shell{1.0, 2.0, 0.0}},
                                                   DomainKind::ExteriorOfSphere, 1.0),
    };
    double worst_dev = 0.0;
    for (const auto& g : near_one_cases)
        worst_dev = std::max(worst_dev, near_one_limit(solve_radial(g)).deviation);

    const auto two_ended = solve_radial(
        RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0));
    // The error bar tracks the size of the last extrapolation correction,
    // which for this linear-in-t limit decays like the grid itself: depth 24
    // puts it well under the gate without touching the campaign defaults.
    const auto lim = limit_L_over_t(two_ended, 3, 24);
    const bool zero_zero = lim.kind == LimitKind::Finite && std::abs(lim.value) <= 1e-6 &&
                           lim.error_bar <= 1e-6;
    report(8, "endpoint-limits", worst_dev <= 1e-3 && zero_zero,
           "near-one=" + g17(worst_dev) + " tol=1e-3 two-ended=(" + g17(lim.value) + "," +
               g17(lim.error_bar) + ") tol=1e-6");
}

// --- criterion 9: gauge data and sphere-coefficient reconstruction ----------
void criterion_9() {
    const double m = 2.0;
    const auto prof = solve_radial(
        RadialConformalMetric::schwarzschild(m, DomainKind::PuncturedSpace, 0.0));
    const auto ts = grid(0.05, 0.95, 0.05);
    const auto rep = gauge_ode_reconstruct(
        prof,
        [m](double t) { return m * m / (4.0 * t * t * (1.0 - t) * (1.0 - t)); }, ts);
    double worst_grad = 0.0;
    for (const GaugeSample& s : gauge_profile(prof, ts)) {
        const double expect = (2.0 / m) * s.t * s.t * (1.0 - s.t) * (1.0 - s.t);
        worst_grad = std::max(worst_grad, std::abs(s.grad_norm - expect));
    }
    report(9, "gauge-ode", rep.max_rel_dev <= 1e-6 && worst_grad <= 1e-8,
           "ode-rel=" + g17(rep.max_rel_dev) + " tol=1e-6 grad=" + g17(worst_grad) +
               " tol=1e-8");
}

// --- criterion 10: the 3d solver --------------------------------------------
void criterion_10() {
    const auto t0 = std::chrono::steady_clock::now();

    // Schwarzschild m = 1 on a 96^3 grid with box half-width 16.
    const auto field =
        solve_conformal_laplace(make_schwarzschild_phi(1.0), 1.0, 16.0, 1.0 / 3.0);
    const auto fit = far_field_fit(field);
    const double cap_rel = std::abs(fit.c_hat - 1.5) / 1.5;

    const auto samples = coarea_L(field, grid(0.2, 0.8, 0.05));
    double worst_L = 0.0;
    for (const CoareaSample& s : samples)
        worst_L =
            std::max(worst_L, std::abs(s.L / closed_L_exterior(1.0, 1.0, s.t) - 1.0));

    double flux_mean = 0.0, flux_dev = 0.0;
    const std::vector<double> flux_levels = {0.4, 0.5, 0.6, 0.7, 0.8};
    const auto flux_samples = coarea_L(field, flux_levels);
    for (const CoareaSample& s : flux_samples) flux_mean += s.flux;
    flux_mean /= static_cast<double>(flux_samples.size());
    for (const CoareaSample& s : flux_samples)
        flux_dev = std::max(flux_dev, std::abs(s.flux - flux_mean) / flux_mean);

    // A genuinely non-radial two-shell field in the strict-capacity regime.
    const auto shell_field = solve_conformal_laplace(
        make_shell_phi({{0.5, {0.5, 0.0, 0.0}, 2.2}, {0.5, {-0.4, -0.3, 0.2}, 2.5}}), 1.0,
        8.0, 0.25);
    const auto shell_fit = far_field_fit(shell_field);
    const auto shell_samples = coarea_L(shell_field, grid(0.15, 0.85, 0.05));
    const auto thm = verify_field_theorems(shell_fit, shell_samples, 1e-3);

    const double dt = seconds_since(t0);
    const bool pass = cap_rel <= 0.02 && worst_L <= 0.05 && flux_dev <= 0.01 &&
                      thm.ratio < 2.0 && thm.all_passed && thm.checks.size() == 4 &&
                      dt < 600.0;
    report(10, "solver-3d", pass,
           "cap=" + g17(cap_rel) + " tol=0.02 L=" + g17(worst_L) + " tol=0.05 flux=" +
               g17(flux_dev) + " tol=0.01 shells(ratio=" + g17(thm.ratio) + " checks=" +
               std::to_string(thm.checks.size()) + " pass=" +
               (thm.all_passed ? "yes" : "no") + ") elapsed=" + g17(dt) + "s budget=600s");
}

} // namespace

int main() {
    const auto artifacts = std::filesystem::temp_directory_path() / "aflab-acceptance";
    std::filesystem::remove_all(artifacts);
    std::filesystem::create_directories(artifacts);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6(artifacts.string());
    criterion_7(artifacts.string());
    criterion_8();
    criterion_9();
    criterion_10();

    std::printf("%s acceptance %d/10 criteria failing\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
