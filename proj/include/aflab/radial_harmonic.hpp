#pragma once

// Normalized harmonic potential on a radial conformal metric.
//
// A g-harmonic radial function satisfies the first integral
//     r^2 phi(r)^2 u'(r) = const,
// so with u = 0 on the inner boundary (or puncture) and u -> 1 at infinity,
//     u(r) = I(r) / I(inf),   I(r) = integral of ds / (s phi(s))^2,
// and the boundary capacity is 1 / I(inf).  The integrand is written through
// r*phi so the puncture of a cored profile is a regular endpoint, and the
// outer tail is integrated in the inverted variable p = 1/r where the
// integrand extends smoothly to p = 0 with value 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "aflab/errors.hpp"
#include "aflab/quadrature.hpp"
#include "aflab/radial_metric.hpp"

namespace aflab {

struct LevelSample {
    double t = 0.0;    // level value
    double r = 0.0;    // level radius
    double L = 0.0;    // capacity^2 / ((r phi)^2 phi^2)
    double area = 0.0; // 4 pi (r phi)^2 phi^2
    double flux = 0.0; // area * |grad u|_g / (4 pi); equals the capacity
};

struct SolveOptions {
    double quad_tol = 1e-12;  // absolute tolerance, rescaled by a rough first pass
    double level_tol = 5e-13; // |u(r_t) - t| target for level-set inversion
    std::size_t max_panels = 40000;
};

namespace detail {

// Panel-indexed antiderivative: exact prefix sums over the adaptive panels
// plus one local rule application for the partial panel.
struct CumulativeIntegral {
    std::vector<Panel> panels; // sorted, tiling [a, b]
    std::vector<double> prefix;

    void build(std::vector<Panel> p) {
        panels = std::move(p);
        prefix.assign(panels.size() + 1, 0.0);
        for (std::size_t i = 0; i < panels.size(); ++i)
            prefix[i + 1] = prefix[i] + panels[i].value;
    }

    double total() const { return prefix.empty() ? 0.0 : prefix.back(); }
    double lo() const { return panels.front().a; }
    double hi() const { return panels.back().b; }

    template <class F>
    double eval(double x, F&& f) const {
        if (x <= panels.front().a) return 0.0;
        if (x >= panels.back().b) return total();
        std::size_t klo = 0, khi = panels.size() - 1;
        while (klo < khi) {
            const std::size_t mid = (klo + khi + 1) / 2;
            if (panels[mid].a <= x)
                klo = mid;
            else
                khi = mid - 1;
        }
        double v, e;
        gk15(f, panels[klo].a, x, v, e);
        return prefix[klo] + v;
    }
};

} // namespace detail

class HarmonicProfile {
public:
    const RadialConformalMetric& metric() const { return metric_; }
    double capacity() const { return capacity_; }
    double total_integral() const { return total_; }
    double base_radius() const { return r_base_; }
    double split_radius() const { return r_split_; }

    double u(double r) const {
        if (!(r >= r_base_) || !std::isfinite(r))
            throw OutOfDomain("radius outside the solved domain");
        if (r <= r_split_)
            return capacity_ * main_.eval(r, [this](double s) { return integrand(s); });
        return 1.0 - capacity_ * tail_.eval(1.0 / r, [this](double p) { return tail_integrand(p); });
    }

    double du_dr(double r) const {
        if (!(r > 0.0) || !std::isfinite(r))
            throw OutOfDomain("radius outside the solved domain");
        return capacity_ * integrand(r);
    }

    /// |grad u|_g = u'(r) / phi^2.
    double grad_norm(double r) const {
        const double p = metric_.phi(r);
        return du_dr(r) / (p * p);
    }

    double level_radius(double t) const {
        double hint = std::numeric_limits<double>::quiet_NaN();
        return level_radius_hinted(t, hint);
    }

    LevelSample level(double t) const {
        LevelSample out;
        out.t = t;
        out.r = level_radius(t);
        fill_geometry(out);
        return out;
    }

    /// Geometry of the metric sphere through radius r, labelled by t = u(r).
    LevelSample at_radius(double r) const {
        LevelSample out;
        out.t = u(r);
        out.r = r;
        fill_geometry(out);
        return out;
    }

    std::vector<LevelSample> sweep(const std::vector<double>& ts) const {
        std::vector<LevelSample> out;
        out.reserve(ts.size());
        double hint = std::numeric_limits<double>::quiet_NaN();
        double prev_t = -1.0;
        for (double t : ts) {
            LevelSample s;
            s.t = t;
            if (!(t > prev_t)) hint = std::numeric_limits<double>::quiet_NaN();
            s.r = level_radius_hinted(t, hint);
            hint = s.r;
            prev_t = t;
            fill_geometry(s);
            out.push_back(s);
        }
        return out;
    }

    friend HarmonicProfile solve_radial(const RadialConformalMetric& g, SolveOptions opt);

private:
    RadialConformalMetric metric_ = RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, 1.0);
    double r_base_ = 1.0;
    double r_split_ = 100.0;
    double capacity_ = 1.0;
    double total_ = 1.0;
    double level_tol_ = 5e-13;
    detail::CumulativeIntegral main_, tail_;

    explicit HarmonicProfile(RadialConformalMetric g) : metric_(std::move(g)) {}

    double integrand(double s) const {
        const double rp = metric_.rphi(s);
        return 1.0 / (rp * rp);
    }

    double tail_integrand(double p) const {
        if (p == 0.0) return 1.0;
        const double ph = metric_.phi(1.0 / p);
        return 1.0 / (ph * ph);
    }

    void fill_geometry(LevelSample& s) const {
        const double rp = metric_.rphi(s.r);
        const double ph = metric_.phi(s.r);
        const double rp2p2 = rp * rp * ph * ph;
        s.L = capacity_ * capacity_ / rp2p2;
        s.area = 4.0 * M_PI * rp2p2;
        s.flux = s.area * grad_norm(s.r) / (4.0 * M_PI);
    }

    double level_radius_hinted(double t, double hint) const {
        // The boundary sphere itself is the t = 0 level when the domain has one.
        if (t == 0.0 && metric_.domain() == DomainKind::ExteriorOfSphere)
            return r_base_;
        if (!(t > 0.0 && t < 1.0))
            throw OutOfRange("level value must lie in (0, 1)");

        // Bracket.
        double lo = r_base_, hi = r_split_;
        double u_hi = u(hi);
        while (u_hi < t) {
            lo = hi;
            hi *= 4.0;
            if (hi > 1e300) throw NoConvergence("level bracket escaped to infinity");
            u_hi = u(hi);
        }

        double x;
        if (std::isfinite(hint) && hint > lo && hint < hi)
            x = hint;
        else
            x = 0.5 * (lo + hi);

        double fx = u(x) - t;
        for (int it = 0; it < 200; ++it) {
            if (std::abs(fx) <= level_tol_) return polish(x, fx, lo, hi, t);
            if (fx < 0.0)
                lo = x;
            else
                hi = x;
            const double slope = du_dr(x);
            double xn = slope > 0.0 ? x - fx / slope : std::numeric_limits<double>::quiet_NaN();
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (xn == x) break;
            x = xn;
            fx = u(x) - t;
            if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi))
                break;
        }
        if (std::abs(fx) <= 1e4 * level_tol_) return polish(x, fx, lo, hi, t);
        throw NoConvergence("level-set inversion stalled");
    }

    // A couple of extra Newton steps past the acceptance tolerance. The
    // quadratic tail of the iteration drives |u - t| to rounding level,
    // which matters wherever downstream quantities divide by (1-t)^2.
    double polish(double x, double fx, double lo, double hi, double t) const {
        for (int p = 0; p < 2 && fx != 0.0; ++p) {
            const double slope = du_dr(x);
            if (!(slope > 0.0)) break;
            const double xn = x - fx / slope;
            if (!(xn > lo && xn < hi) || xn == x) break;
            const double fn = u(xn) - t;
            if (std::abs(fn) >= std::abs(fx)) break;
            x = xn;
            fx = fn;
        }
        return x;
    }
};

inline HarmonicProfile solve_radial(const RadialConformalMetric& g, SolveOptions opt = {}) {
    if (g.domain() == DomainKind::PuncturedSpace && !g.has_integrable_core())
        throw NoNormalization("potential cannot reach 0 at the puncture");

    HarmonicProfile prof(g);
    prof.level_tol_ = opt.level_tol;
    prof.r_base_ = g.domain() == DomainKind::ExteriorOfSphere ? g.inner_radius() : 0.0;

    double split = std::max(100.0, 10.0 * std::abs(g.tail_coefficient()));
    split = std::max(split, 10.0 * std::max(prof.r_base_, 1.0));
    for (double b : g.integration_breakpoints()) split = std::max(split, 3.0 * b);
    prof.r_split_ = split;

    auto f = [&prof](double s) { return prof.integrand(s); };
    auto gtail = [&prof](double p) { return prof.tail_integrand(p); };
    const std::vector<double> breaks = g.integration_breakpoints();

    // Rough pass to set the absolute scale, then a certified pass.
    QuadOptions rough{1e-6, opt.max_panels, false};
    const double i_rough = integrate(f, prof.r_base_, split, rough, breaks).value +
                           integrate(gtail, 0.0, 1.0 / split, rough).value;
    QuadOptions fine{0.5 * opt.quad_tol * std::max(1.0, std::abs(i_rough)), opt.max_panels, true};

    QuadResult main_q = integrate(f, prof.r_base_, split, fine, breaks);
    QuadResult tail_q = integrate(gtail, 0.0, 1.0 / split, fine);
    if (!main_q.converged || !tail_q.converged)
        throw NoConvergence("capacity integral did not reach the requested tolerance");

    prof.main_.build(std::move(main_q.panels));
    prof.tail_.build(std::move(tail_q.panels));
    prof.total_ = prof.main_.total() + prof.tail_.total();
    if (!(prof.total_ > 0.0) || !std::isfinite(prof.total_))
        throw NoNormalization("capacity integral is not positive and finite");
    prof.capacity_ = 1.0 / prof.total_;
    return prof;
}

} // namespace aflab
