#pragma once

// Closed forms for the Schwarzschild family, used as oracles by the tests
// and by the reporting front end. Everything here is algebraic; no solver
// is involved, so these values are trustworthy to machine precision.

#include <cmath>
#include <utility>

#include "aflab/errors.hpp"

namespace aflab {

/// A Schwarzschild-type profile phi = 1 + m/(2r). r0 > 0 selects the
/// exterior of the sphere r = r0; r0 == 0 selects the full punctured
/// space (the "two-ended" case), which requires m > 0.
struct SchwarzschildSpec {
    double m = 1.0;
    double r0 = 1.0;

    SchwarzschildSpec(double mass, double inner_radius) : m(mass), r0(inner_radius) {
        if (!std::isfinite(m) || !std::isfinite(r0) || r0 < 0.0)
            throw DomainError("schwarzschild spec needs finite m and r0 >= 0");
        if (r0 == 0.0) {
            if (!(m > 0.0)) throw DomainError("two-ended schwarzschild needs m > 0");
        } else {
            if (!(1.0 + m / (2.0 * r0) > 0.0))
                throw DomainError("schwarzschild profile must stay positive on the domain");
        }
    }

    bool two_ended() const { return r0 == 0.0; }

    double capacity() const { return two_ended() ? 0.5 * m : r0 + 0.5 * m; }

    /// m / capacity - 2, the sharp bound for S and Q. Equals -2T below.
    double ratio_minus_2() const { return m / capacity() - 2.0; }

    /// Horizon parameter T = (1 + m/(2 r0))^{-1}; the two-ended case has T = 0.
    double horizon_T() const { return two_ended() ? 0.0 : 1.0 / (1.0 + m / (2.0 * r0)); }

    double u(double r) const {
        if (two_ended()) {
            if (!(r > 0.0)) throw OutOfDomain("two-ended potential needs r > 0");
            return r / (r + 0.5 * m);
        }
        if (!(r >= r0)) throw OutOfDomain("exterior potential needs r >= r0");
        return (r - r0) / (r + 0.5 * m);
    }

    double level_radius(double t) const {
        if (two_ended()) {
            if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
            return t * 0.5 * m / (1.0 - t);
        }
        if (!(t >= 0.0 && t < 1.0)) throw OutOfRange("level value must lie in [0, 1)");
        return (r0 + t * 0.5 * m) / (1.0 - t);
    }

    /// L(t) = (1/4pi) * integral of |grad u|^2 over the level set u = t.
    double L(double t) const {
        if (two_ended()) {
            if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
            return t * t * (1.0 - t) * (1.0 - t);
        }
        if (!(t >= 0.0 && t < 1.0)) throw OutOfRange("level value must lie in [0, 1)");
        const double beta = 0.5 * m / r0;
        const double q = (1.0 + beta * t) / (1.0 + beta);
        return q * q * (1.0 - t) * (1.0 - t);
    }

    /// Same quantity through the gauge normal form: with T the horizon
    /// parameter, L(t) = ((1-T) t + T)^2 (1-t)^2. Algebraically identical
    /// to L(); kept as a second, independently coded route for cross checks.
    double L_gauge(double t) const {
        const double T = horizon_T();
        if (two_ended()) {
            if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
        } else if (!(t >= 0.0 && t < 1.0)) {
            throw OutOfRange("level value must lie in [0, 1)");
        }
        const double w = (1.0 - T) * t + T;
        return w * w * (1.0 - t) * (1.0 - t);
    }

    /// Two-ended |grad u|_g on the level u = t.
    double grad_norm_two_ended(double t) const {
        if (!two_ended()) throw DomainError("closed-form gradient is for the two-ended case");
        if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
        return (2.0 / m) * t * t * (1.0 - t) * (1.0 - t);
    }

    /// Two-ended sphere area coefficient a(t) with area = 4 pi a(t).
    double sphere_coefficient_two_ended(double t) const {
        if (!two_ended()) throw DomainError("closed-form coefficient is for the two-ended case");
        if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
        const double d = t * (1.0 - t);
        return m * m / (4.0 * d * d);
    }

    /// d/dt of log a(t) scaled by |grad u| / 2: the mean-curvature-type
    /// coefficient h(t) = -(2/m) t (1-t) (1-2t) in the two-ended case.
    double h_two_ended(double t) const {
        if (!two_ended()) throw DomainError("closed-form h is for the two-ended case");
        if (!(t > 0.0 && t < 1.0)) throw OutOfRange("level value must lie in (0, 1)");
        return -(2.0 / m) * t * (1.0 - t) * (1.0 - 2.0 * t);
    }
};

/// Coefficients (radial, sphere) of the metric written in the potential
/// gauge: g = radial * dt^2 + sphere * (round sphere metric), evaluated for
/// the two-ended normal form. m > 0 lives on t in (0,1); m < 0 continues
/// to t in (1, inf).
inline std::pair<double, double> gauge_metric_closed(double m, double t) {
    if (!std::isfinite(m) || m == 0.0) throw DomainError("gauge normal form needs m != 0");
    if (m > 0.0) {
        if (!(t > 0.0 && t < 1.0)) throw DomainError("for m > 0 the gauge coordinate lies in (0, 1)");
    } else {
        if (!(t > 1.0) || !std::isfinite(t)) throw DomainError("for m < 0 the gauge coordinate lies in (1, inf)");
    }
    const double d = t * (1.0 - t);
    const double sphere = m * m / (4.0 * d * d);
    const double radial = sphere / (d * d);
    return {radial, sphere};
}

/// Exterior variant: substituting t = (1-T) s + T into the two-ended normal
/// form gives the exterior metric in its own potential coordinate s.
inline std::pair<double, double> gauge_metric_closed_exterior(const SchwarzschildSpec& spec, double s) {
    if (spec.two_ended()) throw DomainError("exterior gauge form needs r0 > 0");
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("exterior gauge coordinate lies in [0, 1)");
    const double T = spec.horizon_T();
    const double w = (1.0 - T) * s + T;
    const double d = w * (1.0 - s);
    const double omT2 = (1.0 - T) * (1.0 - T);
    const double sphere = spec.m * spec.m / (4.0 * omT2 * d * d);
    const double radial = sphere / (d * d);
    return {radial, sphere};
}

}  // namespace aflab
