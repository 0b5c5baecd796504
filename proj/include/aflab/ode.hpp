#pragma once

// Scalar adaptive Dormand-Prince 5(4) integrator. Small and deterministic;
// enough for the first-order gauge reconstruction ODEs used here.

#include <cmath>
#include <cstddef>
#include <vector>

#include "aflab/errors.hpp"

namespace aflab {

struct OdeOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    std::size_t max_steps = 500000;
};

/// Integrate y' = f(t, y) from (t0, y0) and report y at each entry of
/// sample_ts. The samples must move strictly monotonically away from t0
/// (either direction). Throws StepFailure if the step size underflows or
/// the step budget is exhausted.
template <class F>
std::vector<double> integrate_ode(const F& f, double t0, double y0,
                                  const std::vector<double>& sample_ts,
                                  const OdeOptions& opt = OdeOptions{}) {
    if (sample_ts.empty()) return {};
    const double dir = sample_ts.front() > t0 ? 1.0 : -1.0;
    double prev = t0;
    for (double s : sample_ts) {
        if (!((s - prev) * dir > 0.0))
            throw StepFailure("sample times must move strictly monotonically away from the start");
        prev = s;
    }

    // Dormand-Prince coefficients.
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    std::vector<double> out;
    out.reserve(sample_ts.size());

    double t = t0;
    double y = y0;
    double h_free = dir * std::max(1e-8, std::abs(sample_ts.back() - t0) / 100.0);
    std::size_t steps = 0;

    for (double target : sample_ts) {
        while ((target - t) * dir > 0.0) {
            if (++steps > opt.max_steps) throw StepFailure("step budget exhausted");
            double h = h_free;
            bool clamped = false;
            if (std::abs(h) > std::abs(target - t)) {
                h = target - t;
                clamped = true;
            }
            if (!(std::abs(h_free) > std::abs(t) * 1e-15 + 1e-300))
                throw StepFailure("step size underflow");

            const double k1 = f(t, y);
            const double k2 = f(t + c2 * h, y + h * a21 * k1);
            const double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double k6 =
                f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double k7 = f(t + h, y5);
            const double err_raw =
                h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y), std::abs(y5));
            const double err = std::abs(err_raw) / scale;

            const bool accept = err <= 1.0 || std::abs(h) <= std::abs(t) * 4e-15 + 4e-300;
            if (accept) {
                t = clamped ? target : t + h;  // land on targets exactly
                y = y5;
            }
            double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            if (factor < 0.2) factor = 0.2;
            if (factor > 5.0) factor = 5.0;
            if (accept && clamped)
                h_free *= factor > 1.0 ? 1.0 : factor;  // keep the free step, never grow off a clamp
            else
                h_free = h * factor;
            if (!std::isfinite(y)) throw StepFailure("solution became non-finite");
        }
        out.push_back(y);
    }
    return out;
}

}  // namespace aflab
