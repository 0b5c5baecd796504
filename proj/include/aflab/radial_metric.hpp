#pragma once

// Radial conformally flat 3-metrics g = phi(r)^4 g0 with nonnegative scalar
// curvature.  Nonnegativity is equivalent to superharmonicity of phi, which
// for radial profiles reduces to concavity of r*phi(r); every constructor
// below preserves that sign condition.
//
// Profile kinds:
//   Flat                 phi = 1
//   Schwarzschild        phi = 1 + m/(2r)
//   ShellSuperposition   phi = 1 + sum_i a_i V_i(r), V_i a unit shell potential
//   Tabulated            shape-preserving cubic through sampled (r, phi) data
//
// A shell with radius s > 0 and width w = 0 contributes min(1/r, 1/s); width
// w > 0 spreads the same weight uniformly over [s - w/2, s + w/2].  Radius
// s = 0 denotes a point core a/r, which is how punctured-space profiles
// acquire the 1/r blowup they need at the origin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "aflab/errors.hpp"

namespace aflab {

enum class DomainKind { ExteriorOfSphere, PuncturedSpace };

enum class ProfileKind { Flat, Schwarzschild, ShellSuperposition, Tabulated };

struct Shell {
    double weight = 0.0; // a_i >= 0
    double radius = 0.0; // s_i >= 0, 0 means point core
    double width = 0.0;  // w_i >= 0 mollification band

    bool operator==(const Shell&) const = default;
};

namespace detail {

// Potential of a unit-weight shell, normalized to 1/r outside.
struct ShellPotential {
    double s_in = 0.0;
    double s_out = 0.0;

    static ShellPotential make(const Shell& sh) {
        ShellPotential p;
        if (sh.radius == 0.0 || sh.width == 0.0) {
            p.s_in = p.s_out = sh.radius;
        } else {
            p.s_in = std::max(sh.radius - 0.5 * sh.width, 0.0);
            p.s_out = sh.radius + 0.5 * sh.width;
        }
        return p;
    }

    double value(double r) const {
        if (r >= s_out) return s_out == 0.0 ? (r > 0.0 ? 1.0 / r : 0.0) : 1.0 / r;
        if (s_in == s_out) return 1.0 / s_out; // thin shell, r < s
        if (r <= s_in) {
            const double D = cube(s_out) - cube(s_in);
            return 1.0 / s_out +
                   (0.5 * (s_out * s_out - s_in * s_in) + cube(s_in) * (1.0 / s_out - 1.0 / s_in)) / D;
        }
        const double D = cube(s_out) - cube(s_in);
        return 1.0 / s_out + (0.5 * (s_out * s_out - r * r) + cube(s_in) * (1.0 / s_out - 1.0 / r)) / D;
    }

    // r * value(r), finite as r -> 0 even for a point core.
    double r_times_value(double r) const {
        if (r >= s_out) return 1.0;
        return r * value(r);
    }

    double derivative(double r) const {
        if (r >= s_out) return -1.0 / (r * r);
        if (s_in == s_out) return 0.0;
        if (r <= s_in) return 0.0;
        const double D = cube(s_out) - cube(s_in);
        return -(cube(r) - cube(s_in)) / (D * r * r);
    }

    static double cube(double x) { return x * x * x; }
};

inline double uniform01(std::mt19937_64& rng) {
    // Portable: top 53 bits -> [0, 1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Shape-limited cubic Hermite interpolant.  Node slopes come from the local
// four-point Lagrange derivative (third-order accurate) and are then pulled
// into the Fritsch-Carlson region, so smooth monotone data keeps near
// fourth-order accuracy while kinked data cannot overshoot.  Segment
// boundaries listed in `splits` break the slope stencils, which keeps the
// interpolant one-sided across shell kinks.
class LimitedCubic {
public:
    LimitedCubic() = default;

    LimitedCubic(std::vector<double> x, std::vector<double> y,
                 const std::vector<double>& splits)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw ConfigError("tabulated profile needs at least two samples");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw ConfigError("tabulated radii must be strictly increasing");

        std::vector<std::size_t> seg_starts{0};
        for (double sx : splits) {
            auto it = std::lower_bound(x_.begin(), x_.end(), sx);
            if (it == x_.begin() || it == x_.end()) continue;
            if (*it == sx) seg_starts.push_back(static_cast<std::size_t>(it - x_.begin()));
        }
        seg_starts.push_back(n - 1);
        std::sort(seg_starts.begin(), seg_starts.end());
        seg_starts.erase(std::unique(seg_starts.begin(), seg_starts.end()), seg_starts.end());

        // Slopes are stored per interval end so a kink node can carry a
        // different one-sided slope on each side.
        dl_.assign(n - 1, 0.0);
        dr_.assign(n - 1, 0.0);
        for (std::size_t si = 0; si + 1 < seg_starts.size(); ++si)
            fill_slopes(seg_starts[si], seg_starts[si + 1]);
    }

    bool empty() const { return x_.empty(); }
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

    double value(double x) const { return eval(x, false); }
    double derivative(double x) const { return eval(x, true); }

private:
    std::vector<double> x_, y_, dl_, dr_;

    static double lagrange_slope(const double* xs, const double* ys, int m, double xq) {
        // Derivative at xq of the degree-(m-1) interpolant through m points.
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            double denom = 1.0;
            for (int j = 0; j < m; ++j)
                if (j != i) denom *= xs[i] - xs[j];
            double dsum = 0.0;
            for (int k = 0; k < m; ++k) {
                if (k == i) continue;
                double prod = 1.0;
                for (int j = 0; j < m; ++j)
                    if (j != i && j != k) prod *= xq - xs[j];
                dsum += prod;
            }
            acc += ys[i] * dsum / denom;
        }
        return acc;
    }

    void fill_slopes(std::size_t lo, std::size_t hi) {
        const std::size_t cnt = hi - lo + 1;
        std::vector<double> d(cnt, 0.0);
        if (cnt == 2) {
            d[0] = d[1] = (y_[hi] - y_[lo]) / (x_[hi] - x_[lo]);
        } else {
            const std::size_t m = std::min<std::size_t>(4, cnt);
            for (std::size_t i = lo; i <= hi; ++i) {
                std::size_t w0;
                if (i <= lo + 1)
                    w0 = lo;
                else if (i + 2 >= hi)
                    w0 = hi - (m - 1);
                else
                    w0 = i - 1;
                d[i - lo] = lagrange_slope(&x_[w0], &y_[w0], static_cast<int>(m), x_[i]);
            }
            // Fritsch-Carlson limiting against adjacent secants.
            for (std::size_t i = lo; i <= hi; ++i) {
                const bool has_l = i > lo, has_r = i < hi;
                const double sl = has_l ? (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]) : 0.0;
                const double sr = has_r ? (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) : 0.0;
                double& di = d[i - lo];
                if (has_l && has_r) {
                    if (sl * sr <= 0.0) {
                        di = 0.0;
                    } else if (di * sl <= 0.0) {
                        di = 0.0;
                    } else {
                        const double cap = 3.0 * std::min(std::abs(sl), std::abs(sr));
                        di = std::copysign(std::min(std::abs(di), cap), sl);
                    }
                } else {
                    const double sec = has_l ? sl : sr;
                    if (di * sec <= 0.0)
                        di = 0.0;
                    else
                        di = std::copysign(std::min(std::abs(di), 3.0 * std::abs(sec)), sec);
                }
            }
        }
        for (std::size_t i = lo; i < hi; ++i) {
            dl_[i] = d[i - lo];
            dr_[i] = d[i + 1 - lo];
        }
    }

    double eval(double x, bool want_derivative) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i];
        const double s = (x - x_[i]) / h;
        const double y0 = y_[i], y1 = y_[i + 1], d0 = dl_[i] * h, d1 = dr_[i] * h;
        if (!want_derivative) {
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 +
                   (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1;
        }
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * d0 +
                (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * d1) / h;
    }
};

} // namespace detail

struct CurvatureReport {
    bool pass = false;
    double max_second_difference = 0.0; // max over the grid of the centered D2 of r*phi
    double location_r = 0.0;
    double tolerance = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    std::size_t nodes = 0;
};

class RadialConformalMetric {
public:
    struct FlatProfile {
        bool operator==(const FlatProfile&) const = default;
    };
    struct SchwarzschildProfile {
        double mass = 0.0;
        bool operator==(const SchwarzschildProfile&) const = default;
    };
    struct ShellProfile {
        std::vector<Shell> shells;
        bool operator==(const ShellProfile&) const = default;
    };
    struct TabulatedProfile {
        std::vector<double> radii;
        std::vector<double> values;
        std::vector<double> kinks;   // radii where the sampled data has slope breaks
        double decay_order = 1.0;    // recorded tail decay hypothesis, not enforced
        bool operator==(const TabulatedProfile&) const = default;
    };

    static RadialConformalMetric flat(DomainKind domain, double r0) {
        return RadialConformalMetric(FlatProfile{}, domain, r0);
    }

    static RadialConformalMetric schwarzschild(double mass, DomainKind domain, double r0) {
        return RadialConformalMetric(SchwarzschildProfile{mass}, domain, r0);
    }

    static RadialConformalMetric shell_superposition(std::vector<Shell> shells,
                                                     DomainKind domain, double r0) {
        return RadialConformalMetric(ShellProfile{std::move(shells)}, domain, r0);
    }

    static RadialConformalMetric tabulated(std::vector<double> radii, std::vector<double> values,
                                           DomainKind domain, double r0,
                                           double decay_order = 1.0,
                                           std::vector<double> kinks = {}) {
        return RadialConformalMetric(
            TabulatedProfile{std::move(radii), std::move(values), std::move(kinks), decay_order},
            domain, r0);
    }

    DomainKind domain() const { return domain_; }
    double inner_radius() const { return r0_; }
    ProfileKind kind() const { return static_cast<ProfileKind>(profile_.index()); }

    const ShellProfile& shells() const { return std::get<ShellProfile>(profile_); }
    const TabulatedProfile& tabulated_data() const { return std::get<TabulatedProfile>(profile_); }
    double schwarzschild_mass() const { return std::get<SchwarzschildProfile>(profile_).mass; }

    double phi(double r) const {
        check_radius(r);
        return phi_unchecked(r);
    }

    double dphi(double r) const {
        check_radius(r);
        return dphi_unchecked(r);
    }

    /// r * phi(r); stays finite at the puncture for cored profiles.
    double rphi(double r) const {
        check_radius(r, true);
        return rphi_unchecked(r);
    }

    /// ADM mass: closed form for named kinds, Richardson-extrapolated tail
    /// limit of 2 r (phi - 1) for tabulated data.
    double adm_mass() const { return adm_mass_; }

    /// Leading tail coefficient, phi ~ 1 + tail_coefficient()/r.
    double tail_coefficient() const { return 0.5 * adm_mass_; }

    /// Whether 1/(r phi)^2 is integrable at the puncture (punctured domains only).
    bool has_integrable_core() const { return integrable_core_; }

    /// Radii where the profile loses smoothness, used to seed quadrature panels.
    std::vector<double> integration_breakpoints() const {
        std::vector<double> out;
        if (kind() == ProfileKind::ShellSuperposition) {
            for (const auto& sh : shells().shells) {
                const auto p = detail::ShellPotential::make(sh);
                if (p.s_in > 0.0) out.push_back(p.s_in);
                if (p.s_out > 0.0 && p.s_out != p.s_in) out.push_back(p.s_out);
            }
        } else if (kind() == ProfileKind::Tabulated) {
            out = curve_.xs(); // every node: the interpolant is only C1 there
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    nlohmann::json to_json() const;
    static RadialConformalMetric from_json(const nlohmann::json& j);

    bool operator==(const RadialConformalMetric& o) const {
        return domain_ == o.domain_ && r0_ == o.r0_ && profile_ == o.profile_;
    }

private:
    using ProfileVariant =
        std::variant<FlatProfile, SchwarzschildProfile, ShellProfile, TabulatedProfile>;

    ProfileVariant profile_;
    DomainKind domain_ = DomainKind::ExteriorOfSphere;
    double r0_ = 1.0;
    double adm_mass_ = 0.0;
    bool integrable_core_ = false;
    std::vector<detail::ShellPotential> potentials_;
    detail::LimitedCubic curve_;
    double tail_A_ = 0.0, tail_B_ = 0.0; // evaluation model beyond the last table node
    double core_cm1_ = 0.0, core_c0_ = 0.0; // phi ~ cm1/r + c0 below the first node

    RadialConformalMetric(ProfileVariant profile, DomainKind domain, double r0)
        : profile_(std::move(profile)), domain_(domain), r0_(r0) {
        if (domain_ == DomainKind::ExteriorOfSphere) {
            if (!(r0_ > 0.0))
                throw DomainError("exterior domain requires r0 > 0");
        } else {
            if (r0_ != 0.0)
                throw DomainError("punctured domain requires r0 = 0");
        }
        validate_and_finish();
    }

    void validate_and_finish();
    void check_radius(double r, bool allow_zero = false) const {
        if (domain_ == DomainKind::ExteriorOfSphere) {
            if (!(r >= r0_))
                throw OutOfDomain("radius below the inner boundary");
        } else {
            if (allow_zero ? !(r >= 0.0) : !(r > 0.0))
                throw OutOfDomain("radius outside the punctured domain");
        }
        if (!std::isfinite(r))
            throw OutOfDomain("nonfinite radius");
    }

    double phi_unchecked(double r) const {
        switch (kind()) {
            case ProfileKind::Flat:
                return 1.0;
            case ProfileKind::Schwarzschild:
                return 1.0 + 0.5 * schwarzschild_mass() / r;
            case ProfileKind::ShellSuperposition: {
                double v = 1.0;
                const auto& sh = shells().shells;
                for (std::size_t i = 0; i < sh.size(); ++i)
                    v += sh[i].weight * potentials_[i].value(r);
                return v;
            }
            case ProfileKind::Tabulated:
                return tabulated_phi(r);
        }
        return 1.0;
    }

    double dphi_unchecked(double r) const {
        switch (kind()) {
            case ProfileKind::Flat:
                return 0.0;
            case ProfileKind::Schwarzschild:
                return -0.5 * schwarzschild_mass() / (r * r);
            case ProfileKind::ShellSuperposition: {
                double v = 0.0;
                const auto& sh = shells().shells;
                for (std::size_t i = 0; i < sh.size(); ++i)
                    v += sh[i].weight * potentials_[i].derivative(r);
                return v;
            }
            case ProfileKind::Tabulated: {
                if (r > curve_.x_back())
                    return -tail_A_ / (r * r) - 2.0 * tail_B_ / (r * r * r);
                if (r < curve_.x_front())
                    return -core_cm1_ / (r * r);
                return curve_.derivative(r);
            }
        }
        return 0.0;
    }

    double rphi_unchecked(double r) const {
        switch (kind()) {
            case ProfileKind::Flat:
                return r;
            case ProfileKind::Schwarzschild:
                return r + 0.5 * schwarzschild_mass();
            case ProfileKind::ShellSuperposition: {
                double v = r;
                const auto& sh = shells().shells;
                for (std::size_t i = 0; i < sh.size(); ++i)
                    v += sh[i].weight * potentials_[i].r_times_value(r);
                return v;
            }
            case ProfileKind::Tabulated:
                if (r < curve_.x_front())
                    return core_cm1_ + core_c0_ * r;
                return r * tabulated_phi(r);
        }
        return r;
    }

    double tabulated_phi(double r) const {
        if (r > curve_.x_back())
            return 1.0 + tail_A_ / r + tail_B_ / (r * r);
        if (r < curve_.x_front())
            return core_cm1_ / r + core_c0_;
        return curve_.value(r);
    }

    double tabulated_adm_mass() const;
};

inline void RadialConformalMetric::validate_and_finish() {
    switch (kind()) {
        case ProfileKind::Flat:
            adm_mass_ = 0.0;
            integrable_core_ = false;
            if (domain_ == DomainKind::PuncturedSpace)
                integrable_core_ = false; // 1/(r phi)^2 = 1/r^2 diverges at 0
            break;

        case ProfileKind::Schwarzschild: {
            const double m = schwarzschild_mass();
            if (!std::isfinite(m))
                throw DomainError("nonfinite mass");
            if (domain_ == DomainKind::ExteriorOfSphere) {
                if (!(1.0 + 0.5 * m / r0_ > 0.0))
                    throw DomainError("phi(r0) <= 0: need 1 + m/(2 r0) > 0");
            } else {
                if (!(m > 0.0))
                    throw DomainError("punctured profile requires m > 0");
            }
            adm_mass_ = m;
            integrable_core_ = m > 0.0;
            break;
        }

        case ProfileKind::ShellSuperposition: {
            double total = 0.0;
            bool cored = false;
            for (const auto& sh : shells().shells) {
                if (!(sh.weight >= 0.0) || !std::isfinite(sh.weight))
                    throw DomainError("shell weight must be >= 0");
                if (!(sh.radius >= 0.0) || !std::isfinite(sh.radius))
                    throw DomainError("shell radius must be >= 0");
                if (!(sh.width >= 0.0) || !std::isfinite(sh.width))
                    throw DomainError("shell width must be >= 0");
                if (sh.radius == 0.0 && sh.width != 0.0)
                    throw DomainError("point core cannot be mollified");
                if (sh.width > 2.0 * sh.radius)
                    throw DomainError("shell width exceeds twice the radius");
                total += sh.weight;
                if (sh.radius == 0.0 && sh.weight > 0.0) cored = true;
                potentials_.push_back(detail::ShellPotential::make(sh));
            }
            adm_mass_ = 2.0 * total;
            integrable_core_ = cored;
            break;
        }

        case ProfileKind::Tabulated: {
            auto& tab = std::get<TabulatedProfile>(profile_);
            if (tab.radii.size() < 4)
                throw ConfigError("tabulated profile needs at least four samples");
            curve_ = detail::LimitedCubic(tab.radii, tab.values, tab.kinks);
            for (double v : tab.values)
                if (!(v > 0.0) || !std::isfinite(v))
                    throw DomainError("tabulated phi must be positive and finite");
            if (domain_ == DomainKind::ExteriorOfSphere) {
                if (curve_.x_front() > r0_ * (1.0 + 1e-12))
                    throw ConfigError("tabulated samples must start at or below r0");
            } else {
                if (!(curve_.x_front() > 0.0))
                    throw ConfigError("punctured table must start above r = 0");
            }

            // Tail model 1 + A/r + B/r^2 through the last two nodes.
            {
                const auto& xs = curve_.xs();
                const auto& ys = curve_.ys();
                const std::size_t n = xs.size();
                const double r1 = xs[n - 2], r2 = xs[n - 1];
                const double f1 = ys[n - 2] - 1.0, f2 = ys[n - 1] - 1.0;
                const double det = 1.0 / r1 * 1.0 / (r2 * r2) - 1.0 / r2 * 1.0 / (r1 * r1);
                if (det != 0.0) {
                    tail_A_ = (f1 / (r2 * r2) - f2 / (r1 * r1)) / det;
                    tail_B_ = (f2 / r1 - f1 / r2) / det;
                }
            }
            // Core model cm1/r + c0 through the first two nodes.
            {
                const auto& xs = curve_.xs();
                const auto& ys = curve_.ys();
                const double r1 = xs[0], r2 = xs[1];
                core_cm1_ = (ys[0] - ys[1]) / (1.0 / r1 - 1.0 / r2);
                core_c0_ = ys[0] - core_cm1_ / r1;
            }
            integrable_core_ = core_cm1_ > 0.0;
            adm_mass_ = tabulated_adm_mass();
            break;
        }
    }
}

inline double RadialConformalMetric::tabulated_adm_mass() const {
    // Richardson extrapolation of f(r) = r (phi(r) - 1) sampled at radii
    // r_k = r_last / 2^k; with phi = 1 + A/r + B/r^2 + ... this converges to
    // A at second order in 1/r.
    const double r_last = curve_.x_back();
    const int levels = 5;
    std::vector<double> f;
    for (int k = 0; k < levels; ++k) {
        const double r = r_last * std::pow(0.5, k);
        if (r < curve_.x_front()) break;
        f.push_back(r * (curve_.value(r) - 1.0));
    }
    if (f.size() < 3)
        throw TailNotConvergent("table too short for a tail limit");
    // Order so the step h_k = 1/r shrinks along the sequence, then extrapolate.
    std::reverse(f.begin(), f.end());
    std::vector<double> row = f;
    for (std::size_t k = 1; k < f.size(); ++k) {
        const double fac = std::pow(2.0, static_cast<double>(k));
        for (std::size_t i = 0; i + k < f.size(); ++i)
            row[i] = row[i + 1] + (row[i + 1] - row[i]) / (fac - 1.0);
    }
    const double estimate = row[0];
    if (!std::isfinite(estimate))
        throw TailNotConvergent("tail extrapolation produced a nonfinite value");
    return 2.0 * estimate;
}

/// Distributional curvature sign check: samples r*phi on a uniform grid and
/// reports the largest centered second difference (divided by h^2).  The
/// profile passes when that estimate never exceeds `tol`.
inline CurvatureReport scalar_curvature_check(const RadialConformalMetric& g,
                                              double r_max = 0.0, std::size_t nodes = 4096,
                                              std::optional<double> tol = std::nullopt) {
    CurvatureReport rep;
    const bool tabulated = g.kind() == ProfileKind::Tabulated;
    rep.tolerance = tol.value_or(tabulated ? 1e-6 : 1e-10);
    rep.nodes = std::max<std::size_t>(nodes, 1000);

    double lo = g.domain() == DomainKind::ExteriorOfSphere ? g.inner_radius() : 1e-4;
    double hi = r_max;
    if (hi <= lo) {
        hi = std::max(100.0 * std::max(lo, 1.0), 10.0 * std::abs(g.tail_coefficient()));
        for (double b : g.integration_breakpoints()) hi = std::max(hi, 3.0 * b);
    }
    rep.r_min = lo;
    rep.r_max = hi;

    const double h = (hi - lo) / static_cast<double>(rep.nodes - 1);
    double worst = -std::numeric_limits<double>::infinity();
    double worst_r = lo;
    double fm = g.rphi(lo), f0 = g.rphi(lo + h);
    for (std::size_t i = 1; i + 1 < rep.nodes; ++i) {
        const double r = lo + static_cast<double>(i) * h;
        const double fp = g.rphi(r + h);
        const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
        if (d2 > worst) {
            worst = d2;
            worst_r = r;
        }
        fm = f0;
        f0 = fp;
    }
    rep.max_second_difference = worst;
    rep.location_r = worst_r;
    rep.pass = worst <= rep.tolerance;
    return rep;
}

/// Deterministic generator of admissible profiles: nonnegative shell weights
/// summing to at most mass_budget/2, log-uniform shell radii, occasional
/// mollification.  Punctured draws prepend a point core so the potential
/// normalizes.  The exterior inner radius is drawn from [0.25, 2].
inline RadialConformalMetric random_admissible(std::uint64_t seed, std::size_t shell_count,
                                               double mass_budget,
                                               std::pair<double, double> radius_range,
                                               DomainKind domain) {
    if (!(mass_budget >= 0.0))
        throw DomainError("mass budget must be >= 0");
    if (!(radius_range.first > 0.0) || !(radius_range.second > radius_range.first))
        throw DomainError("invalid shell radius range");

    std::mt19937_64 rng(seed);
    auto u01 = [&rng]() { return detail::uniform01(rng); };

    std::vector<Shell> shells;
    const double lln = std::log(radius_range.first);
    const double lhn = std::log(radius_range.second);

    double core_weight = 0.0;
    double budget = 0.5 * mass_budget;
    if (domain == DomainKind::PuncturedSpace && budget > 0.0) {
        core_weight = budget * (0.15 + 0.55 * u01());
        budget -= core_weight;
        shells.push_back(Shell{core_weight, 0.0, 0.0});
    }

    std::vector<double> raw(shell_count);
    double raw_sum = 0.0;
    for (auto& w : raw) {
        w = u01();
        raw_sum += w;
    }
    const double scale = raw_sum > 0.0 ? budget * (0.25 + 0.75 * u01()) / raw_sum : 0.0;
    for (std::size_t i = 0; i < shell_count; ++i) {
        Shell sh;
        sh.weight = raw[i] * scale;
        sh.radius = std::exp(lln + (lhn - lln) * u01());
        if (u01() < 0.25)
            sh.width = sh.radius * (0.1 + 0.4 * u01());
        shells.push_back(sh);
    }

    if (domain == DomainKind::PuncturedSpace)
        return RadialConformalMetric::shell_superposition(std::move(shells), domain, 0.0);
    const double r0 = 0.25 * std::exp(std::log(8.0) * u01()); // log-uniform on [0.25, 2]
    return RadialConformalMetric::shell_superposition(std::move(shells), domain, r0);
}

// ---------------------------------------------------------------------------
// Serialization.  Doubles round-trip exactly: the JSON writer emits shortest
// representations that parse back to the same bits.

inline nlohmann::json RadialConformalMetric::to_json() const {
    nlohmann::json j;
    j["domain"] = domain_ == DomainKind::ExteriorOfSphere ? "exterior" : "punctured";
    j["r0"] = r0_;
    switch (kind()) {
        case ProfileKind::Flat:
            j["kind"] = "flat";
            break;
        case ProfileKind::Schwarzschild:
            j["kind"] = "schwarzschild";
            j["mass"] = schwarzschild_mass();
            break;
        case ProfileKind::ShellSuperposition: {
            j["kind"] = "shells";
            auto arr = nlohmann::json::array();
            for (const auto& sh : shells().shells)
                arr.push_back({{"a", sh.weight}, {"s", sh.radius}, {"w", sh.width}});
            j["shells"] = std::move(arr);
            break;
        }
        case ProfileKind::Tabulated: {
            const auto& tab = tabulated_data();
            j["kind"] = "tabulated";
            j["radii"] = tab.radii;
            j["values"] = tab.values;
            j["kinks"] = tab.kinks;
            j["decay_order"] = tab.decay_order;
            break;
        }
    }
    return j;
}

inline RadialConformalMetric RadialConformalMetric::from_json(const nlohmann::json& j) {
    try {
        const std::string dom = j.at("domain").get<std::string>();
        DomainKind domain;
        if (dom == "exterior")
            domain = DomainKind::ExteriorOfSphere;
        else if (dom == "punctured")
            domain = DomainKind::PuncturedSpace;
        else
            throw ConfigError("unknown domain: " + dom);
        const double r0 = j.at("r0").get<double>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "flat")
            return flat(domain, r0);
        if (kind == "schwarzschild")
            return schwarzschild(j.at("mass").get<double>(), domain, r0);
        if (kind == "shells") {
            std::vector<Shell> shells;
            for (const auto& e : j.at("shells"))
                shells.push_back(Shell{e.at("a").get<double>(), e.at("s").get<double>(),
                                       e.at("w").get<double>()});
            return shell_superposition(std::move(shells), domain, r0);
        }
        if (kind == "tabulated")
            return tabulated(j.at("radii").get<std::vector<double>>(),
                             j.at("values").get<std::vector<double>>(), domain, r0,
                             j.value("decay_order", 1.0),
                             j.value("kinks", std::vector<double>{}));
        throw ConfigError("unknown profile kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed metric config: ") + e.what());
    }
}

} // namespace aflab
