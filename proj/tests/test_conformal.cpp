#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aflab/monotone.hpp"
#include "aflab/radial_harmonic.hpp"
#include "aflab/radial_metric.hpp"
#include "aflab/schwarzschild.hpp"

using namespace aflab;

TEST(Conformal, LevelMapAndIdentityCase) {
    EXPECT_NEAR(conformal_s_of_t(0.3, 1.0), 0.3, 1e-16);
    EXPECT_NEAR(conformal_s_of_t(0.0, 3.0), 0.0, 1e-16);
    EXPECT_NEAR(conformal_s_of_t(0.5, 2.0), 2.0 * 0.5 / (2.0 * 0.5 + 0.5), 1e-16);
}

TEST(Conformal, SchwarzschildMassAndCapacityTransform) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0);
    const auto prof = solve_radial(g);
    // k = 2 sends (mass, capacity) = (2, 2) to (0, 1).
    const auto cg = conformal_transform(prof, 2.0, {0.2, 0.5, 0.8});
    EXPECT_NEAR(cg.m_bar_expected, 0.0, 1e-14);
    EXPECT_NEAR(cg.c_bar_expected, 1.0, 1e-14);
    EXPECT_NEAR(cg.m_bar_measured, cg.m_bar_expected, 1e-8);
    EXPECT_NEAR(cg.c_bar_measured, cg.c_bar_expected, 1e-8);
    EXPECT_LT(cg.max_B_dev, 1e-8);
    EXPECT_LT(cg.max_grad_dev, 1e-8);
}

TEST(Conformal, FlatExteriorGainsNegativeMass) {
    const auto g = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    const auto prof = solve_radial(g);
    const auto cg = conformal_transform(prof, 2.0, {0.25, 0.6});
    EXPECT_NEAR(cg.m_bar_expected, -1.0, 1e-14);
    EXPECT_NEAR(cg.m_bar_measured, -1.0, 1e-8);
    EXPECT_NEAR(cg.c_bar_measured, 0.5, 1e-8);
    EXPECT_LT(cg.max_B_dev, 1e-8);
}

TEST(Conformal, SmallKContracts) {
    const auto g = RadialConformalMetric::shell_superposition(
        {Shell{1.0, 2.0, 0.0}}, DomainKind::ExteriorOfSphere, 1.0);
    const auto prof = solve_radial(g);
    const auto cg = conformal_transform(prof, 0.5, {0.3, 0.7});
    // k = 1/2: m_bar = m - 2(1 - 2) c = m + 2c, c_bar = 2c.
    EXPECT_NEAR(cg.m_bar_expected, 2.0 + 2.0 * 1.8, 1e-9);
    EXPECT_NEAR(cg.c_bar_expected, 3.6, 1e-9);
    EXPECT_NEAR(cg.m_bar_measured, cg.m_bar_expected, 1e-8);
    EXPECT_NEAR(cg.c_bar_measured, cg.c_bar_expected, 1e-8);
    EXPECT_LT(cg.max_B_dev, 1e-8);
    EXPECT_LT(cg.max_grad_dev, 1e-8);
}

TEST(Conformal, RejectsBadArguments) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    EXPECT_THROW(conformal_transform(prof, 2.0, {0.5}), DomainError);

    const auto ge = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    const auto pe = solve_radial(ge);
    EXPECT_THROW(conformal_transform(pe, 0.0, {0.5}), DomainError);
    EXPECT_THROW(conformal_transform(pe, -1.0, {0.5}), DomainError);
}

TEST(TShift, SchwarzschildShiftsToFlat) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    const auto chk = t_shift_check(prof, 0.25, 0.5);
    EXPECT_NEAR(chk.s, (1.0 - 0.25 / 0.5) / 0.75, 1e-14);
    // Q vanishes identically, so both sides of the identity vanish.
    EXPECT_NEAR(chk.lhs, 0.0, 1e-8);
    EXPECT_NEAR(chk.rhs, 0.0, 1e-8);
    EXPECT_LT(chk.dev, 1e-8);
    // u^4 g is flat here: the shifted mass vanishes.
    EXPECT_NEAR(chk.m_shift_expected, 0.0, 1e-11);
    EXPECT_NEAR(chk.m_shift_measured, 0.0, 1e-9);
    EXPECT_NEAR(chk.c_shift, 0.25 / 0.75 * 1.0, 1e-11);
}

TEST(TShift, CoredShellIdentity) {
    // A point core plus a thick shell: genuinely curved punctured data.
    const auto g = RadialConformalMetric::shell_superposition(
        {Shell{1.0, 0.0, 0.0}, Shell{0.5, 2.0, 1.0}}, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    for (double T : {0.1, 0.3}) {
        for (double t : {0.4, 0.7, 0.9}) {
            const auto chk = t_shift_check(prof, T, t);
            EXPECT_LT(chk.dev, 1e-8);
        }
    }
    const auto chk = t_shift_check(prof, 0.2, 0.6);
    EXPECT_NEAR(chk.m_shift_measured, chk.m_shift_expected, 1e-8);
    EXPECT_THROW(t_shift_check(prof, 0.0, 0.5), DomainError);
    EXPECT_THROW(t_shift_check(prof, 0.5, 0.5), DomainError);
}

TEST(TShift, ExteriorRejected) {
    const auto g = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    const auto prof = solve_radial(g);
    EXPECT_THROW(t_shift_check(prof, 0.25, 0.5), DomainError);
}

TEST(Gauge, TwoEndedSchwarzschildProfileMatchesClosedForms) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    const SchwarzschildSpec spec(2.0, 0.0);
    std::vector<double> ts;
    for (double t = 0.05; t < 0.951; t += 0.05) ts.push_back(t);
    const auto samples = gauge_profile(prof, ts);
    ASSERT_EQ(samples.size(), ts.size());
    for (const GaugeSample& s : samples) {
        EXPECT_NEAR(s.grad_norm, spec.grad_norm_two_ended(s.t), 1e-8);
        EXPECT_NEAR(s.sphere_a, spec.sphere_coefficient_two_ended(s.t),
                    1e-9 * spec.sphere_coefficient_two_ended(s.t));
        EXPECT_NEAR(s.h, spec.h_two_ended(s.t), 1e-9);
    }
}

TEST(Gauge, HVanishesAtTheHorizon) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    const auto samples = gauge_profile(prof, {0.5});
    EXPECT_NEAR(samples.front().h, 0.0, 1e-10);
    EXPECT_NEAR(samples.front().r, 1.0, 1e-10);  // horizon sphere r = m/2
}

TEST(Gauge, OdeReconstructsSphereCoefficient) {
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    const auto prof = solve_radial(g);
    const SchwarzschildSpec spec(2.0, 0.0);
    std::vector<double> ts;
    for (double t = 0.05; t < 0.951; t += 0.05) ts.push_back(t);
    const auto rep = gauge_ode_reconstruct(
        prof, [&](double t) { return spec.sphere_coefficient_two_ended(t); }, ts);
    EXPECT_LT(rep.max_rel_dev, 1e-6);
    // The anchor value a(1/2) = 4 m^2.
    const auto anchored = gauge_ode_reconstruct(
        prof, [&](double t) { return spec.sphere_coefficient_two_ended(t); }, {0.5});
    EXPECT_NEAR(anchored.a_numeric.front(), 16.0, 1e-8);
}

TEST(Gauge, OdeReconstructsExteriorCoefficient) {
    const SchwarzschildSpec spec(2.0, 1.0);
    const auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0);
    const auto prof = solve_radial(g);
    std::vector<double> ts;
    for (double t = 0.1; t < 0.91; t += 0.1) ts.push_back(t);
    const auto rep = gauge_ode_reconstruct(
        prof, [&](double s) { return gauge_metric_closed_exterior(spec, s).second; }, ts);
    EXPECT_LT(rep.max_rel_dev, 1e-6);
}
