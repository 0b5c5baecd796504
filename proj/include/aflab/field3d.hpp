#pragma once

// Truncated-exterior 3D solver for the conformal-harmonic equation
// div(phi^2 grad u) = 0, the flat-coordinate form of Delta_g u = 0 for
// g = phi^4 g_0. Cell-centered finite volumes on a cube with an excised
// coordinate ball: Dirichlet u = 0 on the sphere through cut edges,
// Robin du/dn = (1 - u)/|x| on the box matched to the monopole tail.
// Everything is serial and deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "aflab/errors.hpp"
#include "aflab/monotone.hpp"

namespace aflab {

struct PhiField3 {
    std::function<double(double, double, double)> value;
    // ADM mass when the field carries an analytic tail; NaN means "fit it".
    double known_mass = std::numeric_limits<double>::quiet_NaN();
};

inline PhiField3 make_flat_phi() {
    return {[](double, double, double) { return 1.0; }, 0.0};
}

inline PhiField3 make_schwarzschild_phi(double m) {
    return {[m](double x, double y, double z) {
                return 1.0 + 0.5 * m / std::sqrt(x * x + y * y + z * z);
            },
            m};
}

/// A mollified point source: weight * min(1/|x - center|, 1/mollify).
/// Harmonic outside the mollification sphere and constant inside, hence
/// superharmonic; superpositions keep the scalar curvature nonnegative.
struct OffCenterShell {
    double weight = 1.0;
    std::array<double, 3> center = {0.0, 0.0, 0.0};
    double mollify = 0.5;
};

inline PhiField3 make_shell_phi(std::vector<OffCenterShell> shells) {
    double mass = 0.0;
    for (const auto& s : shells) {
        if (!(s.weight >= 0.0) || !(s.mollify > 0.0))
            throw DomainError("shell weights must be nonnegative and mollification positive");
        mass += 2.0 * s.weight;
    }
    return {[shells = std::move(shells)](double x, double y, double z) {
                double v = 1.0;
                for (const auto& s : shells) {
                    const double dx = x - s.center[0], dy = y - s.center[1], dz = z - s.center[2];
                    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                    v += s.weight * std::min(d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity(),
                                             1.0 / s.mollify);
                }
                return v;
            },
            mass};
}

struct Solve3DOptions {
    double rel_tol = 1e-10;
    std::size_t max_iterations = 50000;
};

class ScalarField3D {
  public:
    std::int64_t n() const { return n_; }
    double h() const { return h_; }
    double r0() const { return r0_; }
    double box_half() const { return box_half_; }
    double known_mass() const { return known_mass_; }
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }
    double u_min() const { return u_min_; }
    double u_max() const { return u_max_; }
    const std::vector<double>& phi() const { return phi_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<std::uint8_t>& active() const { return active_; }

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return static_cast<std::size_t>((k * n_ + j) * n_ + i);  // x-fastest
    }
    double coord(std::int64_t i) const {
        return -box_half_ + (static_cast<double>(i) + 0.5) * h_;
    }

    /// Total Robin boundary flux / 4pi; equals the capacity up to
    /// discretization and truncation error by discrete flux conservation.
    double boundary_flux_capacity() const { return boundary_flux_; }

    friend ScalarField3D solve_conformal_laplace(const PhiField3& phi_field, double r0,
                                                 double box_half, double h,
                                                 const Solve3DOptions& opt);
    friend ScalarField3D load_snapshot(const std::string& path);
    friend void save_snapshot(const ScalarField3D& field, const std::string& path);

    /// Flat-coordinate gradient at a node by centered differences, with
    /// non-uniform stencils against the cut boundary (value 0 at the sphere)
    /// and one-sided differences at the box. Returns false for nodes with no
    /// usable stencil on some axis.
    bool gradient(std::int64_t i, std::int64_t j, std::int64_t k, std::array<double, 3>& g) const {
        const std::int64_t ids[3] = {i, j, k};
        const std::int64_t strides[3] = {1, n_, n_ * n_};
        const std::size_t at = index(i, j, k);
        if (!active_[at]) return false;
        for (int axis = 0; axis < 3; ++axis) {
            const std::int64_t id = ids[axis];
            const std::size_t plus = at + static_cast<std::size_t>(strides[axis]);
            const std::size_t minus = at - static_cast<std::size_t>(strides[axis]);
            const bool has_plus = id + 1 < n_;
            const bool has_minus = id >= 1;
            const bool act_plus = has_plus && active_[plus];
            const bool act_minus = has_minus && active_[minus];
            const double u0 = u_[at];
            if (act_plus && act_minus) {
                const auto st = static_cast<std::size_t>(strides[axis]);
                const bool wide_plus = id + 2 < n_ && active_[plus + st];
                const bool wide_minus = id >= 2 && active_[minus - st];
                if (wide_plus && wide_minus) {
                    // Fourth-order centered stencil away from boundaries.
                    g[axis] = (-u_[plus + st] + 8.0 * u_[plus] - 8.0 * u_[minus] +
                               u_[minus - st]) /
                              (12.0 * h_);
                } else {
                    g[axis] = (u_[plus] - u_[minus]) / (2.0 * h_);
                }
            } else if (act_plus || act_minus) {
                // The missing side is either the cut sphere (value 0 at
                // distance theta h) or the box face (one-sided fallback).
                const bool cut_minus = has_minus && !act_minus;
                const bool cut_plus = has_plus && !act_plus;
                if (cut_plus || cut_minus) {
                    const double theta = cut_theta(i, j, k, axis, cut_plus ? +1 : -1);
                    const double a = theta * h_;  // to the boundary, value 0
                    const auto st = static_cast<std::size_t>(strides[axis]);
                    const std::size_t live = cut_plus ? minus : plus;
                    const bool wide = cut_plus ? (id >= 2 && active_[live - st])
                                               : (id + 2 < n_ && active_[live + st]);
                    const double u1 = u_[live];
                    double d;  // oriented toward the live side
                    if (wide) {
                        // Cubic through the boundary point and three nodes;
                        // the boundary value is zero so its term drops.
                        const double u2 = u_[cut_plus ? live - st : live + st];
                        d = u0 * (2.0 * h_ - 3.0 * a) / (2.0 * h_ * a) +
                            u1 * 2.0 * a / (h_ * (h_ + a)) -
                            u2 * a / (2.0 * h_ * (2.0 * h_ + a));
                    } else {
                        d = (h_ * h_ * u0 - a * a * (u0 - u1)) / (a * h_ * (a + h_));
                    }
                    g[axis] = cut_plus ? -d : d;
                } else {
                    g[axis] = act_plus ? (u_[plus] - u0) / h_ : (u0 - u_[minus]) / h_;
                }
            } else {
                return false;
            }
        }
        return true;
    }

    /// Fraction of the edge from the active node (i,j,k) toward its inactive
    /// neighbor along axis*dir that lies outside the excised sphere. The
    /// neighbor sits inside the ball, so the active node's coordinate is past
    /// the near root of the sphere along this line and the crossing is the
    /// root facing it. Clamped away from zero to keep the matrix bounded.
    double cut_theta(std::int64_t i, std::int64_t j, std::int64_t k, int axis, int dir) const {
        double p[3] = {coord(i), coord(j), coord(k)};
        const double s0 = p[axis];
        const double rest2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - s0 * s0;
        const double inside = r0_ * r0_ - rest2;
        if (inside <= 0.0) return 1.0;  // edge grazes past the sphere
        const double root = std::sqrt(inside);
        const double tau = dir > 0 ? (-root - s0) / h_ : (s0 - root) / h_;
        return std::clamp(tau, 0.01, 1.0);
    }

  private:
    std::int64_t n_ = 0;
    double h_ = 0.0;
    double r0_ = 0.0;
    double box_half_ = 0.0;
    double known_mass_ = std::numeric_limits<double>::quiet_NaN();
    double residual_ = 0.0;
    std::size_t iterations_ = 0;
    double u_min_ = 0.0;
    double u_max_ = 0.0;
    double boundary_flux_ = 0.0;
    std::vector<double> phi_, u_;
    std::vector<std::uint8_t> active_;
};

inline ScalarField3D solve_conformal_laplace(const PhiField3& phi_field, double r0,
                                             double box_half, double h,
                                             const Solve3DOptions& opt = Solve3DOptions{}) {
    if (!(box_half > 0.0) || !(h > 0.0)) throw DomainError("box and spacing must be positive");
    const double n_real = 2.0 * box_half / h;
    const auto n = static_cast<std::int64_t>(std::llround(n_real));
    if (n < 8 || std::abs(n_real - static_cast<double>(n)) > 1e-9)
        throw DomainError("grid spacing must divide the box into at least 8 cells");
    if (!(r0 >= 2.0 * h)) throw BadExcision("excised ball must span at least two cells");
    if (!(r0 < 0.5 * box_half)) throw DomainError("excised ball too large for the box");

    ScalarField3D f;
    f.n_ = n;
    f.h_ = h;
    f.r0_ = r0;
    f.box_half_ = box_half;
    f.known_mass_ = phi_field.known_mass;

    const auto total = static_cast<std::size_t>(n * n * n);
    f.phi_.resize(total);
    f.active_.resize(total);
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                const double x = f.coord(i), y = f.coord(j), z = f.coord(k);
                const double ph = phi_field.value(x, y, z);
                if (!(ph > 0.0) || !std::isfinite(ph))
                    throw DomainError("phi must be positive and finite on the grid");
                f.phi_[at] = ph;
                f.active_[at] = x * x + y * y + z * z > r0 * r0 ? 1 : 0;
            }

    // Assembly: couplings along the positive axes, diagonal, right-hand side.
    const double mhalf = std::isfinite(phi_field.known_mass) ? 0.5 * phi_field.known_mass : 0.0;
    std::vector<double> diag(total, 0.0), rhs(total, 0.0);
    std::array<std::vector<double>, 3> T;
    for (auto& v : T) v.assign(total, 0.0);
    const std::int64_t strides[3] = {1, n, n * n};

    const auto phi2 = [&f](std::size_t at) { return f.phi_[at] * f.phi_[at]; };

    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (!f.active_[at]) {
                    diag[at] = 1.0;  // inert identity row
                    continue;
                }
                const std::int64_t ids[3] = {i, j, k};
                for (int axis = 0; axis < 3; ++axis) {
                    // Interior coupling is assembled once per edge, at the
                    // lower node; the upper node assembles nothing for it.
                    if (ids[axis] + 1 < n) {
                        const auto nb = at + static_cast<std::size_t>(strides[axis]);
                        if (f.active_[nb]) {
                            // Harmonic-mean face coefficient.
                            const double a = phi2(at), b = phi2(nb);
                            const double t = h * 2.0 * a * b / (a + b);
                            T[static_cast<std::size_t>(axis)][at] = t;
                            diag[at] += t;
                            diag[nb] += t;
                        }
                    }
                    // Cut edges against the excised ball: the inactive node is
                    // inert, so each cut lives entirely on the active node's
                    // row. Dirichlet value 0 at distance theta h.
                    for (int dir : {-1, +1}) {
                        const std::int64_t nb_id = ids[axis] + dir;
                        if (nb_id < 0 || nb_id >= n) {
                            // Box face: Robin flux matched to the far field.
                            // With the normal projection and the mass shift
                            // the face condition is exactly transparent to
                            // 1 - c/(|x| + m/2) for every c, so truncation
                            // error only enters at the next tail order.
                            double p[3] = {f.coord(i), f.coord(j), f.coord(k)};
                            p[axis] += 0.5 * dir * h;
                            const double rho =
                                std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
                            const double gamma =
                                std::abs(p[axis]) * (rho + mhalf) / (rho * rho * rho);
                            const double beta = gamma / phi2(at);
                            const double w = h * h * gamma / (1.0 + 0.5 * beta * h);
                            diag[at] += w;
                            rhs[at] += w;
                            continue;
                        }
                        const auto nb = dir > 0 ? at + static_cast<std::size_t>(strides[axis])
                                                : at - static_cast<std::size_t>(strides[axis]);
                        if (!f.active_[nb]) {
                            const double theta = f.cut_theta(i, j, k, axis, dir);
                            const double pm =
                                f.phi_[at] + 0.5 * theta * (f.phi_[nb] - f.phi_[at]);
                            diag[at] += h * pm * pm / theta;
                        }
                    }
                }
            }

    // Jacobi-preconditioned conjugate gradients, serial and deterministic.
    std::vector<double>& u = f.u_;
    u.assign(total, 0.0);
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (!f.active_[at]) continue;
                const double x = f.coord(i), y = f.coord(j), z = f.coord(k);
                const double rho = std::sqrt(x * x + y * y + z * z);
                u[at] = std::clamp(1.0 - r0 / rho, 0.0, 1.0);
            }

    const auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t at = 0; at < total; ++at) y[at] = diag[at] * x[at];
        for (int axis = 0; axis < 3; ++axis) {
            const auto s = static_cast<std::size_t>(strides[axis]);
            const auto& t = T[static_cast<std::size_t>(axis)];
            for (std::size_t at = 0; at + s < total; ++at) {
                const double c = t[at];
                if (c != 0.0) {
                    y[at] -= c * x[at + s];
                    y[at + s] -= c * x[at];
                }
            }
        }
    };

    std::vector<double> r(total), z(total), p(total), q(total);
    matvec(u, r);
    double bnorm2 = 0.0;
    for (std::size_t at = 0; at < total; ++at) {
        r[at] = rhs[at] - r[at];
        bnorm2 += rhs[at] * rhs[at];
    }
    const double stop2 = bnorm2 * opt.rel_tol * opt.rel_tol;
    double rz = 0.0;
    for (std::size_t at = 0; at < total; ++at) {
        z[at] = r[at] / diag[at];
        rz += r[at] * z[at];
    }
    p = z;
    double rnorm2 = 0.0;
    for (std::size_t at = 0; at < total; ++at) rnorm2 += r[at] * r[at];

    std::size_t it = 0;
    while (rnorm2 > stop2) {
        if (++it > opt.max_iterations) throw NoConvergence("conjugate gradients stalled");
        matvec(p, q);
        double pq = 0.0;
        for (std::size_t at = 0; at < total; ++at) pq += p[at] * q[at];
        const double alpha = rz / pq;
        for (std::size_t at = 0; at < total; ++at) {
            u[at] += alpha * p[at];
            r[at] -= alpha * q[at];
        }
        double rz_next = 0.0;
        rnorm2 = 0.0;
        for (std::size_t at = 0; at < total; ++at) {
            z[at] = r[at] / diag[at];
            rz_next += r[at] * z[at];
            rnorm2 += r[at] * r[at];
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t at = 0; at < total; ++at) p[at] = z[at] + beta * p[at];
    }
    f.iterations_ = it;
    f.residual_ = std::sqrt(rnorm2 / (bnorm2 > 0.0 ? bnorm2 : 1.0));

    // Discrete maximum principle, with rounding slack.
    f.u_min_ = std::numeric_limits<double>::infinity();
    f.u_max_ = -std::numeric_limits<double>::infinity();
    for (std::size_t at = 0; at < total; ++at) {
        if (!f.active_[at]) continue;
        f.u_min_ = std::min(f.u_min_, u[at]);
        f.u_max_ = std::max(f.u_max_, u[at]);
    }
    if (f.u_min_ < -1e-12 || f.u_max_ > 1.0 + 1e-12)
        throw std::logic_error("discrete maximum principle violated");

    // Total Robin flux: sum of w (1 - u) over boundary faces, over 4 pi.
    double flux = 0.0;
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (!f.active_[at]) continue;
                const std::int64_t ids[3] = {i, j, k};
                for (int axis = 0; axis < 3; ++axis)
                    for (int dir : {-1, +1}) {
                        if ((dir < 0 && ids[axis] == 0) || (dir > 0 && ids[axis] == n - 1)) {
                            double pt[3] = {f.coord(i), f.coord(j), f.coord(k)};
                            pt[axis] += 0.5 * dir * h;
                            const double rho =
                                std::sqrt(pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]);
                            const double gamma =
                                std::abs(pt[axis]) * (rho + mhalf) / (rho * rho * rho);
                            const double beta = gamma / phi2(at);
                            const double w = h * h * gamma / (1.0 + 0.5 * beta * h);
                            flux += w * (1.0 - u[at]);
                        }
                    }
            }
    f.boundary_flux_ = flux / kFourPi;
    return f;
}

// ---------------------------------------------------------------------------
// Far-field extraction.

struct FarFieldFit {
    double c_hat = 0.0;      // fitted capacity
    double band = 0.0;       // spread between the two extraction shells
    double m_hat = 0.0;      // mass: analytic tail when known, else fitted
    bool m_is_analytic = false;
    std::array<double, 2> shell_radii = {0.0, 0.0};
};

namespace detail3d {

// Joint least squares of y against {1/(rho+q), 1/(rho+q)^2}; returns the
// first coefficient. Shifting the basis by q = m/2 makes the leading term
// exact through the second tail order, which otherwise biases the
// coefficient at reachable box sizes.
struct TailFit {
    double q = 0.0;
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    std::size_t count = 0;
    void add(double rho, double y) {
        const double x1 = 1.0 / (rho + q), x2 = x1 * x1;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
        ++count;
    }
    double coefficient() const {
        const double det = s11 * s22 - s12 * s12;
        if (count < 8 || !(std::abs(det) > 1e-300)) throw FitUnstable("tail fit degenerate");
        return (b1 * s22 - b2 * s12) / det;
    }
    // Single-term slope, used for the per-shell stability band.
    double single() const { return b1 / s11; }
};

template <typename Fn>
void sweep_shells(const ScalarField3D& f, Fn&& visit) {
    const double R = f.box_half();
    const std::int64_t n = f.n();
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (!f.active()[at]) continue;
                const double x = f.coord(i), y = f.coord(j), z = f.coord(k);
                const double rho = std::sqrt(x * x + y * y + z * z);
                const bool in1 = rho >= 0.45 * R && rho <= 0.55 * R;
                const bool in2 = rho >= 0.70 * R && rho <= 0.80 * R;
                if (in1 || in2) visit(at, rho, in1);
            }
}

}  // namespace detail3d

inline FarFieldFit far_field_fit(const ScalarField3D& f) {
    const double R = f.box_half();
    FarFieldFit out;
    out.shell_radii = {0.5 * R, 0.75 * R};

    // The mass comes first: it shifts the basis for the capacity fit.
    if (std::isfinite(f.known_mass())) {
        out.m_hat = f.known_mass();
        out.m_is_analytic = true;
    } else {
        detail3d::TailFit m_joint, m_shell1, m_shell2;
        detail3d::sweep_shells(f, [&](std::size_t at, double rho, bool in1) {
            const double mv = f.phi()[at] - 1.0;
            m_joint.add(rho, mv);
            (in1 ? m_shell1 : m_shell2).add(rho, mv);
        });
        out.m_hat = 2.0 * m_joint.coefficient();
        const double mb = 2.0 * std::abs(m_shell1.single() - m_shell2.single());
        if (!(mb <= 0.05 * std::max(1.0, std::abs(out.m_hat))))
            throw FitUnstable("extraction shells disagree on the mass");
    }

    const double q = std::max(0.0, 0.5 * out.m_hat);
    detail3d::TailFit joint{q}, shell1{q}, shell2{q};
    detail3d::sweep_shells(f, [&](std::size_t at, double rho, bool in1) {
        const double yv = 1.0 - f.u()[at];
        joint.add(rho, yv);
        (in1 ? shell1 : shell2).add(rho, yv);
    });
    out.c_hat = joint.coefficient();
    out.band = std::abs(shell1.single() - shell2.single());
    if (!(out.band <= 0.05 * std::abs(out.c_hat)))
        throw FitUnstable("extraction shells disagree on the capacity");
    return out;
}

// ---------------------------------------------------------------------------
// Coarea estimators for L(t) and the level flux.

struct CoareaSample {
    double t = 0.0;
    double L = 0.0;
    double L_sigma = 0.0;     // slope uncertainty of the window fit
    double flux = 0.0;        // (1/4pi) g-flux through the level
    double area = 0.0;        // level-set area in the conformal metric
    double area_flat = 0.0;   // level-set area in flat coordinates
    double window = 0.0;      // half-width actually used for the slope fit
    bool non_regular = false; // window touched near-critical gradients
};

struct CoareaOptions {
    std::size_t bins = 400;
    double window = 0.02;          // minimum half-width of the slope window in t
    double window_max = 0.12;      // cap for the adaptive widening
    double gradient_floor = 1e-8;  // |grad u| below this flags the bin
};

inline std::vector<CoareaSample> coarea_L(const ScalarField3D& f, const std::vector<double>& ts,
                                          const CoareaOptions& opt = CoareaOptions{}) {
    for (double t : ts)
        if (!(t >= 0.1 && t <= 0.9))
            throw OutOfRange("coarea levels must lie in [0.1, 0.9]");

    const std::size_t nb = opt.bins;
    std::vector<double> w3(nb, 0.0), w2(nb, 0.0), w1(nb, 0.0), w4(nb, 0.0), gsum(nb, 0.0);
    std::vector<double> gcount(nb, 0.0);
    std::vector<std::uint8_t> low_grad(nb, 0);
    const double h3 = f.h() * f.h() * f.h();
    const std::int64_t n = f.n();
    const auto total = static_cast<std::size_t>(n * n * n);

    // Levels above the smallest boundary value leak through the box, so their
    // shells are truncated and the histogram undercounts them.
    double u_exit = 1.0;
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                if (i > 0 && i + 1 < n && j > 0 && j + 1 < n && k > 0 && k + 1 < n) continue;
                const std::size_t at = f.index(i, j, k);
                if (f.active()[at]) u_exit = std::min(u_exit, f.u()[at]);
            }

    // Pass one: gradient magnitudes at the nodes, plus the per-bin gradient
    // statistics that drive the window adaptation.
    std::vector<double> gmag(total, -1.0);  // negative marks "no stencil"
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (!f.active()[at]) continue;
                std::array<double, 3> g;
                if (!f.gradient(i, j, k, g)) continue;
                const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                gmag[at] = gn;
                auto bin = static_cast<std::size_t>(f.u()[at] * static_cast<double>(nb));
                if (bin >= nb) bin = nb - 1;
                if (gn < opt.gradient_floor) {
                    low_grad[bin] = 1;
                    continue;
                }
                gsum[bin] += gn;
                gcount[bin] += 1.0;
            }

    // Interpolation tables. Inside the excision the nodes carry ghost values
    // extending u linearly across the cut (u ~ slope times signed distance),
    // so trilinear interpolation between mixed corners lands level sets at
    // the sphere instead of smearing them against the Dirichlet zeros.
    std::vector<double> iu(total, 0.0), ig(total, 0.0);
    const std::int64_t strides[3] = {1, n, n * n};
    for (std::int64_t k = 0; k < n; ++k)
        for (std::int64_t j = 0; j < n; ++j)
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t at = f.index(i, j, k);
                if (f.active()[at]) {
                    iu[at] = f.u()[at];
                    ig[at] = std::max(gmag[at], 0.0);
                    continue;
                }
                const double px = f.coord(i), py = f.coord(j), pz = f.coord(k);
                const double rho = std::sqrt(px * px + py * py + pz * pz);
                const std::int64_t ids[3] = {i, j, k};
                double lsum = 0.0;
                int lcount = 0;
                for (int axis = 0; axis < 3; ++axis)
                    for (int dir = -1; dir <= 1; dir += 2) {
                        const std::int64_t id = ids[axis] + dir;
                        if (id < 0 || id >= n) continue;
                        const std::size_t nb_at =
                            dir > 0 ? at + static_cast<std::size_t>(strides[axis])
                                    : at - static_cast<std::size_t>(strides[axis]);
                        if (!f.active()[nb_at]) continue;
                        double q[3] = {px, py, pz};
                        q[axis] += dir * f.h();
                        const double rn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
                        const double depth = rn - f.r0();
                        if (depth > 0.05 * f.h()) {
                            // Secant slope lifted to the sphere; the rn/r0
                            // factor is exact for 1/rho tails.
                            lsum += f.u()[nb_at] / depth * (rn / f.r0());
                            ++lcount;
                        }
                    }
                const double lam = lcount > 0 ? std::max(0.0, lsum / lcount) : 0.0;
                iu[at] = lam * (rho - f.r0());
                ig[at] = lam;
            }

    // Pass two: dual cubes spanned by node octets, subdivided 4 x 4 x 4.
    // Every subcell deposits its exact volume at its interpolated level with
    // its interpolated integrand, under a hard inside-the-sphere test. Point
    // deposits at this density stay well below the bin width, so the
    // histogram resolves the steep near-excision region without aliasing.
    constexpr int S = 4;
    const double sub_vol = h3 / (S * S * S);
    const auto trilerp = [](const double v[8], double fx, double fy, double fz) {
        const double c00 = v[0] + (v[1] - v[0]) * fx;
        const double c10 = v[2] + (v[3] - v[2]) * fx;
        const double c01 = v[4] + (v[5] - v[4]) * fx;
        const double c11 = v[6] + (v[7] - v[6]) * fx;
        const double c0 = c00 + (c10 - c00) * fy;
        const double c1 = c01 + (c11 - c01) * fy;
        return c0 + (c1 - c0) * fz;
    };
    const double r0sq = f.r0() * f.r0();
    for (std::int64_t k = 0; k + 1 < n; ++k)
        for (std::int64_t j = 0; j + 1 < n; ++j)
            for (std::int64_t i = 0; i + 1 < n; ++i) {
                const std::size_t c000 = f.index(i, j, k);
                const std::size_t corner[8] = {
                    c000,
                    c000 + 1,
                    c000 + static_cast<std::size_t>(n),
                    c000 + static_cast<std::size_t>(n) + 1,
                    c000 + static_cast<std::size_t>(n * n),
                    c000 + static_cast<std::size_t>(n * n) + 1,
                    c000 + static_cast<std::size_t>(n * n + n),
                    c000 + static_cast<std::size_t>(n * n + n) + 1};
                bool any_active = false;
                for (const std::size_t c : corner) any_active |= f.active()[c] != 0;
                // The sphere is convex: a cube with no active corner is inside.
                if (!any_active) continue;
                double uc[8], gc[8], pc[8];
                for (int c = 0; c < 8; ++c) {
                    uc[c] = iu[corner[c]];
                    gc[c] = ig[corner[c]];
                    pc[c] = f.phi()[corner[c]];
                }
                const double x0 = f.coord(i), y0 = f.coord(j), z0 = f.coord(k);
                for (int sz = 0; sz < S; ++sz) {
                    const double fz = (sz + 0.5) / S;
                    const double zs = z0 + fz * f.h();
                    for (int sy = 0; sy < S; ++sy) {
                        const double fy = (sy + 0.5) / S;
                        const double ys = y0 + fy * f.h();
                        for (int sx = 0; sx < S; ++sx) {
                            const double fx = (sx + 0.5) / S;
                            const double xs = x0 + fx * f.h();
                            if (xs * xs + ys * ys + zs * zs <= r0sq) continue;
                            const double us = trilerp(uc, fx, fy, fz);
                            if (us <= 0.0 || us >= 1.0) continue;
                            const auto b = static_cast<std::size_t>(us * static_cast<double>(nb));
                            const double gs = trilerp(gc, fx, fy, fz);
                            if (gs < opt.gradient_floor) {
                                low_grad[b] = 1;
                                continue;
                            }
                            const double ps = trilerp(pc, fx, fy, fz);
                            const double p2 = ps * ps;
                            w3[b] += gs * gs * gs * sub_vol;
                            w2[b] += p2 * gs * gs * sub_vol;
                            w1[b] += gs * sub_vol;
                            w4[b] += p2 * p2 * gs * sub_vol;
                        }
                    }
                }
            }

    // Cumulative sums at bin edges; L, flux and the areas are window
    // least-squares slopes of the cumulants, over 4 pi where appropriate.
    std::vector<double> c3(nb + 1, 0.0), c2(nb + 1, 0.0), c1(nb + 1, 0.0), c4(nb + 1, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        c3[b + 1] = c3[b] + w3[b];
        c2[b + 1] = c2[b] + w2[b];
        c1[b + 1] = c1[b] + w1[b];
        c4[b + 1] = c4[b] + w4[b];
    }

    std::vector<CoareaSample> out;
    out.reserve(ts.size());
    const double db = 1.0 / static_cast<double>(nb);
    for (double t : ts) {
        CoareaSample s;
        s.t = t;
        // One grid cell spans about h * |grad u| in u near the level; widen
        // the window so the slope fit always pools several cells of depth.
        double gs = 0.0, gc = 0.0;
        const auto glo = static_cast<std::size_t>(std::max(0.0, (t - 0.05) / db));
        const auto ghi = std::min(nb, static_cast<std::size_t>((t + 0.05) / db) + 1);
        for (std::size_t b = glo; b < ghi; ++b) {
            gs += gsum[b];
            gc += gcount[b];
        }
        const double g_est = gc > 0.0 ? gs / gc : 0.0;
        s.window = std::clamp(1.5 * f.h() * g_est, opt.window, opt.window_max);
        const auto lo = static_cast<std::size_t>(std::max(0.0, (t - s.window) / db));
        auto hi = static_cast<std::size_t>((t + s.window) / db) + 1;
        if (hi > nb) hi = nb;
        // Fit c(t) ~ a + slope * t over edges lo..hi.
        double sx = 0, sxx = 0;
        const auto m = static_cast<double>(hi - lo + 1);
        for (std::size_t e = lo; e <= hi; ++e) {
            const double x = static_cast<double>(e) * db;
            sx += x;
            sxx += x * x;
        }
        const double det = m * sxx - sx * sx;
        const auto fit = [&](const std::vector<double>& c, double* sigma) {
            double sy = 0, sxy = 0;
            for (std::size_t e = lo; e <= hi; ++e) {
                sy += c[e];
                sxy += static_cast<double>(e) * db * c[e];
            }
            const double slope = (m * sxy - sx * sy) / det;
            if (sigma) {
                // Residual-based slope standard error.
                double rss = 0.0;
                const double a = (sy - slope * sx) / m;
                for (std::size_t e = lo; e <= hi; ++e) {
                    const double resid = c[e] - (a + slope * static_cast<double>(e) * db);
                    rss += resid * resid;
                }
                *sigma = std::sqrt(rss / std::max(1.0, m - 2.0) * m / det);
            }
            return slope;
        };
        double sig3 = 0.0;
        s.L = fit(c3, &sig3) / kFourPi;
        s.L_sigma = sig3 / kFourPi;
        s.flux = fit(c2, nullptr) / kFourPi;
        s.area_flat = fit(c1, nullptr);
        s.area = fit(c4, nullptr);
        if (!(c3[hi] > c3[lo])) s.non_regular = true;  // window saw no cells
        if (t + s.window >= u_exit) s.non_regular = true;  // shell leaves the box
        for (std::size_t b = lo; b < hi && b < nb; ++b)
            if (low_grad[b]) s.non_regular = true;
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Snapshot I/O: dims (3 x int64), h, r0, R_box (3 x f64), then phi and u
// x-fastest, all little-endian.

inline void save_snapshot(const ScalarField3D& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw ConfigError("cannot open snapshot file for writing");
    const std::int64_t dims[3] = {f.n_, f.n_, f.n_};
    const double header[3] = {f.h_, f.r0_, f.box_half_};
    bool ok = std::fwrite(dims, sizeof dims, 1, fp) == 1 &&
              std::fwrite(header, sizeof header, 1, fp) == 1 &&
              std::fwrite(f.phi_.data(), sizeof(double), f.phi_.size(), fp) == f.phi_.size() &&
              std::fwrite(f.u_.data(), sizeof(double), f.u_.size(), fp) == f.u_.size();
    ok = std::fclose(fp) == 0 && ok;
    if (!ok) throw ConfigError("snapshot write failed");
}

inline ScalarField3D load_snapshot(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw ConfigError("cannot open snapshot file");
    ScalarField3D f;
    std::int64_t dims[3] = {0, 0, 0};
    double header[3] = {0, 0, 0};
    bool ok = std::fread(dims, sizeof dims, 1, fp) == 1 &&
              std::fread(header, sizeof header, 1, fp) == 1;
    if (ok && (dims[0] != dims[1] || dims[0] != dims[2] || dims[0] < 8)) ok = false;
    if (ok) {
        f.n_ = dims[0];
        f.h_ = header[0];
        f.r0_ = header[1];
        f.box_half_ = header[2];
        const auto total = static_cast<std::size_t>(f.n_ * f.n_ * f.n_);
        f.phi_.resize(total);
        f.u_.resize(total);
        ok = std::fread(f.phi_.data(), sizeof(double), total, fp) == total &&
             std::fread(f.u_.data(), sizeof(double), total, fp) == total;
        if (ok) {
            f.active_.resize(total);
            for (std::int64_t k = 0; k < f.n_; ++k)
                for (std::int64_t j = 0; j < f.n_; ++j)
                    for (std::int64_t i = 0; i < f.n_; ++i) {
                        const double x = f.coord(i), y = f.coord(j), z = f.coord(k);
                        f.active_[f.index(i, j, k)] =
                            x * x + y * y + z * z > f.r0_ * f.r0_ ? 1 : 0;
                    }
            f.u_min_ = std::numeric_limits<double>::infinity();
            f.u_max_ = -std::numeric_limits<double>::infinity();
            for (std::size_t at = 0; at < total; ++at) {
                if (!f.active_[at]) continue;
                f.u_min_ = std::min(f.u_min_, f.u_[at]);
                f.u_max_ = std::max(f.u_max_, f.u_[at]);
            }
        }
    }
    std::fclose(fp);
    if (!ok) throw ConfigError("snapshot read failed or malformed");
    return f;
}

// ---------------------------------------------------------------------------
// Theorem checks on 3D estimator output.

struct FieldCheck {
    std::string name;
    bool passed = true;
    double worst = 0.0;  // most negative slack seen
};

struct FieldTheoremReport {
    bool all_passed = true;
    double ratio = 0.0;        // m_hat / c_hat
    std::size_t used = 0;      // samples that entered the checks
    std::size_t skipped = 0;   // non-regular samples set aside
    std::vector<FieldCheck> checks;
};

/// Monotonicity and bound for S, plus the strict-capacity inequalities when
/// m_hat / c_hat < 2, all with tolerances combining the coarea uncertainty
/// |dS/dL| * sigma_L with the base estimator allowance. Non-regular samples
/// carry no evidence and are set aside.
inline FieldTheoremReport verify_field_theorems(const FarFieldFit& fit,
                                                const std::vector<CoareaSample>& all_samples,
                                                double base_tol = 1e-3) {
    FieldTheoremReport rep;
    rep.ratio = fit.m_hat / fit.c_hat;
    const double bound = rep.ratio - 2.0;

    std::vector<CoareaSample> samples;
    for (const CoareaSample& s : all_samples) {
        if (s.non_regular) {
            ++rep.skipped;
        } else {
            samples.push_back(s);
            ++rep.used;
        }
    }

    std::vector<double> svals, stols;
    for (const CoareaSample& s : samples) {
        const SValue sv = S_of(s.L, s.t);
        const double omt = 1.0 - s.t;
        const double ds_dl = sv.branch == SBranch::Capacity
                                 ? 1.0 / (std::sqrt(s.L) * omt * omt)
                                 : 1.0 / (s.t * omt * omt * omt);
        svals.push_back(sv.value);
        stols.push_back(ds_dl * s.L_sigma + base_tol);
    }

    FieldCheck mono{"S-monotone", true, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double slack = svals[i + 1] - svals[i] + stols[i] + stols[i + 1];
        mono.worst = std::min(mono.worst, slack);
        if (slack < 0.0) mono.passed = false;
    }
    rep.checks.push_back(mono);

    FieldCheck bnd{"S-bound", true, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double slack = bound + stols[i] - svals[i];
        bnd.worst = std::min(bnd.worst, slack);
        if (slack < 0.0) bnd.passed = false;
    }
    rep.checks.push_back(bnd);

    if (rep.ratio < 2.0) {
        FieldCheck cap{"L-capacity-branch", true, std::numeric_limits<double>::infinity()};
        FieldCheck low{"sqrtL-lower-bound", true, std::numeric_limits<double>::infinity()};
        for (const CoareaSample& s : samples) {
            const double omt = 1.0 - s.t;
            const double split = s.t * s.t * omt * omt;
            const double slack_L = s.L - split + s.L_sigma + base_tol * std::sqrt(s.L) * omt * omt;
            cap.worst = std::min(cap.worst, slack_L);
            if (slack_L < 0.0) cap.passed = false;

            const double lhs = std::sqrt(s.L) / omt;
            const double rhs = 1.0 - 0.5 * rep.ratio * omt;
            const double tol_sqrt = s.L_sigma / (2.0 * std::sqrt(s.L) * omt) + base_tol;
            const double slack = lhs - rhs + tol_sqrt;
            low.worst = std::min(low.worst, slack);
            if (slack < 0.0) low.passed = false;
        }
        rep.checks.push_back(cap);
        rep.checks.push_back(low);
    }

    for (const FieldCheck& c : rep.checks) rep.all_passed = rep.all_passed && c.passed;
    return rep;
}

}  // namespace aflab
