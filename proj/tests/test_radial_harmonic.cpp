#include "aflab/radial_harmonic.hpp"

#include <cmath>
#include <gtest/gtest.h>

using namespace aflab;

TEST(RadialHarmonic, FlatExteriorClosedForm) {
    auto g = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 2.0);
    auto prof = solve_radial(g);
    EXPECT_NEAR(prof.capacity(), 2.0, 1e-12);
    for (double r : {2.0, 2.5, 4.0, 10.0, 1e3, 1e7})
        EXPECT_NEAR(prof.u(r), 1.0 - 2.0 / r, 1e-12) << r;
    for (double t : {0.1, 0.5, 0.9, 0.99}) {
        EXPECT_NEAR(prof.level_radius(t), 2.0 / (1.0 - t), 1e-9 / (1.0 - t)) << t;
        EXPECT_NEAR(prof.level(t).L, (1.0 - t) * (1.0 - t), 1e-12) << t;
    }
}

TEST(RadialHarmonic, SchwarzschildCapacityCases) {
    struct Case {
        double m, r0, cap;
    };
    for (auto [m, r0, cap] : {Case{0.5, 1.0, 1.25}, Case{2.0, 1.0, 2.0},
                              Case{-0.5, 1.0, 0.75}, Case{1.0, 0.3, 0.8}}) {
        auto g = RadialConformalMetric::schwarzschild(m, DomainKind::ExteriorOfSphere, r0);
        auto prof = solve_radial(g);
        EXPECT_NEAR(prof.capacity(), cap, 1e-11) << m << " " << r0;
    }
}

TEST(RadialHarmonic, SchwarzschildPotentialAndLevels) {
    auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0);
    auto prof = solve_radial(g);
    for (double r : {1.0, 1.7, 3.0, 12.0, 400.0})
        EXPECT_NEAR(prof.u(r), (r - 1.0) / (r + 1.0), 2e-13) << r;
    for (double t : {0.25, 0.5, 0.75}) {
        const double rt = (1.0 + t) / (1.0 - t);
        EXPECT_NEAR(prof.level_radius(t), rt, 1e-10) << t;
    }
    auto s = prof.level(0.5);
    EXPECT_NEAR(s.L, 0.140625, 1e-12);
    EXPECT_NEAR(s.area, 4.0 * M_PI * 256.0 / 9.0, 1e-9);
    EXPECT_NEAR(s.flux, 2.0, 1e-12);
}

TEST(RadialHarmonic, TwoEndedSchwarzschild) {
    auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    auto prof = solve_radial(g);
    EXPECT_NEAR(prof.capacity(), 1.0, 1e-12);
    for (double r : {0.01, 0.5, 1.0, 2.0, 50.0})
        EXPECT_NEAR(prof.u(r), r / (r + 1.0), 2e-13) << r;
    for (double t : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(prof.level(t).L, t * t * (1.0 - t) * (1.0 - t), 1e-12) << t;
        EXPECT_NEAR(prof.level_radius(t), t / (1.0 - t), 1e-9) << t;
    }
}

TEST(RadialHarmonic, ShellCapacityClosedForm) {
    // One thin shell a = 1 at s = 2 outside r0 = 1:
    // I = (1/1.5^2)(1 - 1/2) + 1/3 = 5/9, capacity 9/5.
    auto g = RadialConformalMetric::shell_superposition({{1.0, 2.0, 0.0}},
                                                        DomainKind::ExteriorOfSphere, 1.0);
    auto prof = solve_radial(g);
    EXPECT_NEAR(prof.capacity(), 1.8, 1e-12);
    EXPECT_NEAR(g.adm_mass() / prof.capacity(), 10.0 / 9.0, 1e-12);
}

TEST(RadialHarmonic, PotentialDerivativeMatchesFiniteDifference) {
    auto g = random_admissible(42, 3, 1.5, {0.5, 6.0}, DomainKind::ExteriorOfSphere);
    auto prof = solve_radial(g);
    for (double r : {1.9 * g.inner_radius(), 7.3, 29.0}) {
        const double h = 1e-5 * r;
        const double fd = (prof.u(r + h) - prof.u(r - h)) / (2.0 * h);
        EXPECT_NEAR(prof.du_dr(r), fd, 1e-7 * std::abs(fd) + 1e-13) << r;
    }
}

TEST(RadialHarmonic, LevelInversionIsTight) {
    auto g = random_admissible(7, 4, 2.0, {0.5, 10.0}, DomainKind::PuncturedSpace);
    auto prof = solve_radial(g);
    for (double t : {0.001, 0.02, 0.37, 0.5, 0.83, 0.99, 0.999}) {
        const double r = prof.level_radius(t);
        EXPECT_NEAR(prof.u(r), t, 5e-12) << t;
    }
}

TEST(RadialHarmonic, SweepMatchesPointwiseCalls) {
    auto g = random_admissible(99, 2, 1.0, {0.5, 4.0}, DomainKind::ExteriorOfSphere);
    auto prof = solve_radial(g);
    std::vector<double> ts;
    for (int i = 1; i < 40; ++i) ts.push_back(i / 40.0);
    auto rows = prof.sweep(ts);
    ASSERT_EQ(rows.size(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        EXPECT_NEAR(rows[i].r, prof.level_radius(ts[i]), 1e-9 * rows[i].r) << ts[i];
        EXPECT_NEAR(rows[i].flux, prof.capacity(), 1e-10) << ts[i];
        if (i > 0) {
            EXPECT_GT(rows[i].r, rows[i - 1].r);
        }
    }
}

TEST(RadialHarmonic, NoNormalizationWithoutCore) {
    auto flat = RadialConformalMetric::flat(DomainKind::PuncturedSpace, 0.0);
    EXPECT_THROW(solve_radial(flat), NoNormalization);
    auto shell = RadialConformalMetric::shell_superposition({{1.0, 2.0, 0.0}},
                                                            DomainKind::PuncturedSpace, 0.0);
    EXPECT_THROW(solve_radial(shell), NoNormalization);
}

TEST(RadialHarmonic, LevelArgumentsValidated) {
    auto g = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    auto prof = solve_radial(g);
    // t = 0 is the boundary sphere on exterior domains.
    EXPECT_DOUBLE_EQ(prof.level_radius(0.0), 1.0);
    EXPECT_NEAR(prof.level(0.0).L, 1.0, 1e-12);
    EXPECT_THROW(prof.level_radius(1.0), OutOfRange);
    EXPECT_THROW(prof.level_radius(-0.2), OutOfRange);
    EXPECT_THROW(prof.u(0.5), OutOfDomain);

    // Punctured domains have no boundary sphere; t = 0 stays invalid.
    auto gp = RadialConformalMetric::schwarzschild(2.0, DomainKind::PuncturedSpace, 0.0);
    auto pp = solve_radial(gp);
    EXPECT_THROW(pp.level_radius(0.0), OutOfRange);
}

TEST(RadialHarmonic, CoredPuncturedNearTheEnds) {
    auto g = RadialConformalMetric::shell_superposition({{1.0, 0.0, 0.0}, {0.5, 3.0, 0.0}},
                                                        DomainKind::PuncturedSpace, 0.0);
    auto prof = solve_radial(g);
    // Near the puncture u ~ capacity * r / a0^2, up to O(r^2) profile terms.
    const double c = prof.capacity();
    EXPECT_NEAR(prof.u(1e-8), c * 1e-8, 1e-15);
    EXPECT_NEAR(prof.u(1e8), 1.0 - c / 1e8, 1e-13);
    const double r_small = prof.level_radius(1e-7);
    EXPECT_NEAR(c * r_small, 1e-7, 1e-12);
}
