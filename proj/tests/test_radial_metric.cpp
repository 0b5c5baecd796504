#include "aflab/radial_metric.hpp"

#include <cmath>
#include <gtest/gtest.h>

using namespace aflab;

namespace {

std::vector<double> log_radii(double lo, double hi, std::size_t per_decade) {
    std::vector<double> out;
    const double step = std::log(10.0) / static_cast<double>(per_decade);
    for (double x = std::log(lo); x <= std::log(hi) + 1e-12; x += step)
        out.push_back(std::exp(x));
    return out;
}

} // namespace

TEST(RadialMetric, FlatBasics) {
    auto g = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 2.0);
    EXPECT_EQ(g.phi(3.0), 1.0);
    EXPECT_EQ(g.dphi(3.0), 0.0);
    EXPECT_EQ(g.rphi(5.0), 5.0);
    EXPECT_EQ(g.adm_mass(), 0.0);
    EXPECT_THROW(g.phi(1.0), OutOfDomain);
}

TEST(RadialMetric, SchwarzschildValues) {
    auto g = RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 1.0);
    EXPECT_DOUBLE_EQ(g.phi(2.0), 1.5);
    EXPECT_DOUBLE_EQ(g.dphi(2.0), -0.25);
    EXPECT_DOUBLE_EQ(g.rphi(2.0), 3.0);
    EXPECT_DOUBLE_EQ(g.adm_mass(), 2.0);
    EXPECT_DOUBLE_EQ(g.tail_coefficient(), 1.0);
}

TEST(RadialMetric, NegativeMassAllowedOutsideItsSingularity) {
    auto g = RadialConformalMetric::schwarzschild(-0.5, DomainKind::ExteriorOfSphere, 1.0);
    EXPECT_DOUBLE_EQ(g.phi(1.0), 0.75);
    EXPECT_THROW(
        RadialConformalMetric::schwarzschild(-3.0, DomainKind::ExteriorOfSphere, 1.0),
        DomainError);
    EXPECT_THROW(
        RadialConformalMetric::schwarzschild(-0.5, DomainKind::PuncturedSpace, 0.0),
        DomainError);
}

TEST(RadialMetric, ThinShellPotential) {
    auto g = RadialConformalMetric::shell_superposition({{1.0, 2.0, 0.0}},
                                                        DomainKind::ExteriorOfSphere, 0.5);
    EXPECT_DOUBLE_EQ(g.phi(1.0), 1.5);       // inside: 1 + 1/s
    EXPECT_DOUBLE_EQ(g.phi(3.0), 1.0 + 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(g.dphi(1.0), 0.0);
    EXPECT_DOUBLE_EQ(g.dphi(4.0), -1.0 / 16.0);
    EXPECT_DOUBLE_EQ(g.adm_mass(), 2.0);
    auto bps = g.integration_breakpoints();
    ASSERT_EQ(bps.size(), 1u);
    EXPECT_DOUBLE_EQ(bps[0], 2.0);
}

TEST(RadialMetric, ThickShellPotential) {
    // a = 1, s = 2, w = 1: support [1.5, 2.5], D = 2.5^3 - 1.5^3 = 12.25.
    auto g = RadialConformalMetric::shell_superposition({{1.0, 2.0, 1.0}},
                                                        DomainKind::ExteriorOfSphere, 0.5);
    EXPECT_NEAR(g.phi(3.0), 1.0 + 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(g.phi(2.5), 1.4, 1e-15);
    EXPECT_NEAR(g.phi(2.0), 1.0 + 0.464285714285714286, 1e-15);
    EXPECT_NEAR(g.phi(1.0), 1.0 + 0.489795918367346939, 1e-15);
    EXPECT_NEAR(g.phi(1.5), 1.0 + 0.489795918367346939, 1e-15);
    EXPECT_NEAR(g.dphi(2.0), -4.625 / 49.0, 1e-15);
    EXPECT_DOUBLE_EQ(g.dphi(1.2), 0.0);
    // Continuity across the band edges.
    EXPECT_NEAR(g.phi(1.5 - 1e-9), g.phi(1.5 + 1e-9), 1e-8);
    EXPECT_NEAR(g.phi(2.5 - 1e-9), g.phi(2.5 + 1e-9), 1e-8);
    auto bps = g.integration_breakpoints();
    ASSERT_EQ(bps.size(), 2u);
    EXPECT_DOUBLE_EQ(bps[0], 1.5);
    EXPECT_DOUBLE_EQ(bps[1], 2.5);
}

TEST(RadialMetric, PointCore) {
    auto g = RadialConformalMetric::shell_superposition({{1.5, 0.0, 0.0}},
                                                        DomainKind::PuncturedSpace, 0.0);
    EXPECT_DOUBLE_EQ(g.phi(1.0), 2.5);
    EXPECT_DOUBLE_EQ(g.rphi(0.0), 1.5);
    EXPECT_DOUBLE_EQ(g.rphi(2.0), 2.0 + 1.5);
    EXPECT_TRUE(g.has_integrable_core());
    EXPECT_DOUBLE_EQ(g.adm_mass(), 3.0);
}

TEST(RadialMetric, PuncturedFlatHasNoIntegrableCore) {
    auto g = RadialConformalMetric::flat(DomainKind::PuncturedSpace, 0.0);
    EXPECT_FALSE(g.has_integrable_core());
    auto h = RadialConformalMetric::shell_superposition({{1.0, 2.0, 0.0}},
                                                        DomainKind::PuncturedSpace, 0.0);
    EXPECT_FALSE(h.has_integrable_core()); // bounded phi near 0
}

TEST(RadialMetric, DomainValidation) {
    EXPECT_THROW(RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 0.0), DomainError);
    EXPECT_THROW(RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, -1.0), DomainError);
    EXPECT_THROW(RadialConformalMetric::flat(DomainKind::PuncturedSpace, 1.0), DomainError);
    EXPECT_THROW(RadialConformalMetric::shell_superposition({{-1.0, 1.0, 0.0}},
                                                            DomainKind::ExteriorOfSphere, 1.0),
                 DomainError);
    EXPECT_THROW(RadialConformalMetric::shell_superposition({{1.0, 1.0, 3.0}},
                                                            DomainKind::ExteriorOfSphere, 1.0),
                 DomainError);
}

TEST(RadialMetric, CurvatureSignHoldsForAdmissibleProfiles) {
    auto flat = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    EXPECT_TRUE(scalar_curvature_check(flat).pass);

    auto sch = RadialConformalMetric::schwarzschild(2.0, DomainKind::ExteriorOfSphere, 0.5);
    EXPECT_TRUE(scalar_curvature_check(sch).pass);

    auto shells = RadialConformalMetric::shell_superposition(
        {{0.7, 1.3, 0.0}, {0.4, 4.0, 2.0}, {0.2, 0.0, 0.0}}, DomainKind::PuncturedSpace, 0.0);
    EXPECT_TRUE(scalar_curvature_check(shells).pass);
}

TEST(RadialMetric, CurvatureCheckFlagsConvexBump) {
    // phi with a Gaussian bump makes (r phi)'' > 0 on the bump shoulders.
    std::vector<double> rs, vs;
    for (double r = 0.5; r <= 40.0; r += 0.01) {
        rs.push_back(r);
        vs.push_back(1.0 + 1.0 / r + 0.3 * std::exp(-(r - 5.0) * (r - 5.0)));
    }
    auto g = RadialConformalMetric::tabulated(rs, vs, DomainKind::ExteriorOfSphere, 0.5);
    auto rep = scalar_curvature_check(g, 20.0);
    EXPECT_FALSE(rep.pass);
    EXPECT_GT(rep.max_second_difference, 0.1);
    EXPECT_NEAR(rep.location_r, 5.0, 2.0);
}

TEST(RadialMetric, TabulatedReproducesSmoothProfile) {
    auto rs = log_radii(0.5, 2e4, 2048);
    std::vector<double> vs;
    vs.reserve(rs.size());
    for (double r : rs) vs.push_back(1.0 + 1.0 / r);
    auto g = RadialConformalMetric::tabulated(rs, vs, DomainKind::ExteriorOfSphere, 0.5);

    for (double r : {0.61, 1.07, 3.9, 48.0, 950.0}) {
        EXPECT_NEAR(g.phi(r), 1.0 + 1.0 / r, 1e-10) << r;
        EXPECT_NEAR(g.dphi(r), -1.0 / (r * r), 1e-7) << r;
    }
    // Beyond the table the tail model continues the fit.
    EXPECT_NEAR(g.phi(1e6), 1.0 + 1e-6, 1e-12);
    EXPECT_NEAR(g.adm_mass(), 2.0, 1e-8);
}

TEST(RadialMetric, TabulatedTailWithQuadraticCorrection) {
    auto rs = log_radii(1.0, 1e4, 512);
    std::vector<double> vs;
    for (double r : rs) vs.push_back(1.0 + 1.0 / r + 3.0 / (r * r));
    auto g = RadialConformalMetric::tabulated(rs, vs, DomainKind::ExteriorOfSphere, 1.0);
    EXPECT_NEAR(g.adm_mass(), 2.0, 1e-7);
}

TEST(RadialMetric, RandomAdmissibleIsDeterministicAndAdmissible) {
    for (std::uint64_t seed : {1ull, 7ull, 1234567ull}) {
        auto a = random_admissible(seed, 3, 2.0, {0.5, 8.0}, DomainKind::ExteriorOfSphere);
        auto b = random_admissible(seed, 3, 2.0, {0.5, 8.0}, DomainKind::ExteriorOfSphere);
        EXPECT_TRUE(a == b);
        EXPECT_TRUE(scalar_curvature_check(a).pass) << seed;
        EXPECT_GE(a.inner_radius(), 0.25);
        EXPECT_LE(a.inner_radius(), 2.0);
        EXPECT_LE(a.adm_mass(), 2.0 + 1e-12);

        auto p = random_admissible(seed, 3, 2.0, {0.5, 8.0}, DomainKind::PuncturedSpace);
        EXPECT_TRUE(p.has_integrable_core()) << seed;
        EXPECT_TRUE(scalar_curvature_check(p).pass) << seed;
    }
}

TEST(RadialMetric, JsonRoundTrip) {
    std::vector<RadialConformalMetric> cases;
    cases.push_back(RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 0.7));
    cases.push_back(RadialConformalMetric::schwarzschild(1.25, DomainKind::ExteriorOfSphere, 0.3));
    cases.push_back(RadialConformalMetric::shell_superposition(
        {{0.5, 1.0, 0.25}, {0.125, 0.0, 0.0}}, DomainKind::PuncturedSpace, 0.0));
    cases.push_back(RadialConformalMetric::tabulated({1.0, 2.0, 3.0, 4.0, 5.0},
                                                     {2.0, 1.5, 1.333, 1.25, 1.2},
                                                     DomainKind::ExteriorOfSphere, 1.0, 1.0,
                                                     {3.0}));
    for (const auto& g : cases) {
        auto j = g.to_json();
        auto back = RadialConformalMetric::from_json(j);
        EXPECT_TRUE(back == g);
    }
    EXPECT_THROW(RadialConformalMetric::from_json(nlohmann::json{{"kind", "flat"}}), ConfigError);
}
