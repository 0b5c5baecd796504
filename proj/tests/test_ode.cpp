#include "aflab/ode.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace aflab;

TEST(Ode, ExponentialForward) {
    const auto f = [](double, double y) { return y; };
    std::vector<double> ts = {0.5, 1.0, 2.0, 3.0};
    const auto ys = integrate_ode(f, 0.0, 1.0, ts);
    ASSERT_EQ(ys.size(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        EXPECT_NEAR(ys[i], std::exp(ts[i]), 1e-9 * std::exp(ts[i]));
}

TEST(Ode, GaussianBothDirections) {
    const auto f = [](double t, double y) { return -2.0 * t * y; };
    std::vector<double> fwd = {0.5, 1.0, 1.5};
    std::vector<double> bwd = {-0.5, -1.0, -2.0};
    const auto yf = integrate_ode(f, 0.0, 1.0, fwd);
    const auto yb = integrate_ode(f, 0.0, 1.0, bwd);
    for (std::size_t i = 0; i < fwd.size(); ++i)
        EXPECT_NEAR(yf[i], std::exp(-fwd[i] * fwd[i]), 1e-10);
    for (std::size_t i = 0; i < bwd.size(); ++i)
        EXPECT_NEAR(yb[i], std::exp(-bwd[i] * bwd[i]), 1e-10);
}

TEST(Ode, SteepLinearRateStaysAccurate) {
    // y' = (-2/t + 2/(1-t)) y over (0,1), y = C / (t (1-t))^2.
    const auto f = [](double t, double y) { return (-2.0 / t + 2.0 / (1.0 - t)) * y; };
    const double y0 = 1.0 / std::pow(0.5 * 0.5, 2);
    std::vector<double> ts;
    for (double t = 0.55; t < 0.951; t += 0.05) ts.push_back(t);
    const auto ys = integrate_ode(f, 0.5, y0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double expect = 1.0 / std::pow(ts[i] * (1.0 - ts[i]), 2);
        EXPECT_NEAR(ys[i], expect, 1e-8 * expect);
    }
}

TEST(Ode, RejectsNonMonotoneSamples) {
    const auto f = [](double, double y) { return y; };
    EXPECT_THROW(integrate_ode(f, 0.0, 1.0, {0.5, 0.25}), StepFailure);
    EXPECT_THROW(integrate_ode(f, 0.0, 1.0, {0.0}), StepFailure);
    EXPECT_TRUE(integrate_ode(f, 0.0, 1.0, {}).empty());
}

TEST(Ode, BlowupReportsStepFailure) {
    const auto f = [](double, double y) { return y * y; };
    // Solution 1/(1-t) blows up at t = 1; asking for samples beyond must fail.
    EXPECT_THROW(integrate_ode(f, 0.0, 1.0, {0.9, 1.1}), StepFailure);
}
