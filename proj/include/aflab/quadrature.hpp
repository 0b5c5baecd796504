#pragma once

// Globally adaptive Gauss-Kronrod 7-15 quadrature.
//
// Panels are kept in a max-heap keyed by the local error estimate and the
// worst panel is bisected until the accumulated estimate drops below the
// requested absolute tolerance.  Ties are broken by insertion order so a
// given integrand always produces the same panel decomposition.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "aflab/errors.hpp"

namespace aflab {

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double resabs = 0.0; // local integral of |f|, sets the rounding floor
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;       // accumulated error estimate
    bool converged = false;
    std::size_t panel_count = 0;
    std::vector<Panel> panels; // sorted by left endpoint, filled when requested
};

namespace detail {

// Kronrod abscissae for the 15-point rule on [-1, 1] (positive half).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// Embedded 7-point Gauss weights (match xgk[1], xgk[3], xgk[5], xgk[7]).
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error,
                 double* resabs_out = nullptr) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);

    const double fc = f(c);
    double result_gauss = kWg[3] * fc;
    double result_kronrod = kWgk[7] * fc;
    double resabs = std::abs(result_kronrod);

    double fv[15];
    for (int j = 0; j < 7; ++j) {
        const double dx = hw * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        result_kronrod += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1)
            result_gauss += kWg[j / 2] * (f1 + f2);
    }

    const double mean = 0.5 * result_kronrod;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));

    value = result_kronrod * hw;
    resabs *= std::abs(hw);
    resasc *= std::abs(hw);

    double err = std::abs((result_kronrod - result_gauss) * hw);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / eps50)
        err = std::max(err, eps50 * resabs);
    error = err;
    if (resabs_out) *resabs_out = resabs;
}

struct HeapEntry {
    double error;
    std::uint64_t seq;
    std::size_t index;
    bool operator<(const HeapEntry& o) const {
        if (error != o.error) return error < o.error;
        return seq < o.seq; // older panels pop first on exact ties
    }
};

} // namespace detail

struct QuadOptions {
    double abs_tol = 1e-12;
    std::size_t max_panels = 40000;
    bool keep_panels = false;
    // Error estimates cannot drop below ~50 eps per unit of integral(|f|), so
    // convergence is also granted at this relative rounding floor.
    double roundoff_rel = 5e-14;
};

/// Integrate f over [a, b].  `breakpoints` lists interior abscissae where the
/// integrand loses smoothness; each becomes an initial panel boundary.
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadOptions& opt,
                     const std::vector<double>& breakpoints = {}) {
    QuadResult out;
    if (!(b > a)) {
        out.converged = true;
        return out;
    }

    std::vector<double> edges;
    edges.push_back(a);
    for (double x : breakpoints)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Panel> panels;
    panels.reserve(edges.size() + 64);
    std::priority_queue<detail::HeapEntry> heap;
    std::uint64_t seq = 0;

    double total = 0.0, total_err = 0.0, total_resabs = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p{edges[i], edges[i + 1], 0.0, 0.0, 0.0};
        detail::gk15(f, p.a, p.b, p.value, p.error, &p.resabs);
        total += p.value;
        total_err += p.error;
        total_resabs += p.resabs;
        heap.push({p.error, seq++, panels.size()});
        panels.push_back(p);
    }

    auto threshold = [&] { return std::max(opt.abs_tol, opt.roundoff_rel * total_resabs); };

    while (total_err > threshold() && panels.size() < opt.max_panels && !heap.empty()) {
        const auto top = heap.top();
        heap.pop();
        Panel& worst = panels[top.index];
        if (worst.error != top.error) continue; // stale entry
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) continue; // cannot split further

        Panel left{worst.a, mid, 0.0, 0.0, 0.0};
        Panel right{mid, worst.b, 0.0, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error, &left.resabs);
        detail::gk15(f, right.a, right.b, right.value, right.error, &right.resabs);

        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_resabs += left.resabs + right.resabs - worst.resabs;

        worst = left;
        heap.push({left.error, seq++, top.index});
        heap.push({right.error, seq++, panels.size()});
        panels.push_back(right);
    }

    out.value = total;
    out.error = total_err;
    out.converged = total_err <= threshold();
    out.panel_count = panels.size();
    if (opt.keep_panels) {
        std::sort(panels.begin(), panels.end(),
                  [](const Panel& x, const Panel& y) { return x.a < y.a; });
        out.panels = std::move(panels);
    }
    return out;
}

/// Integrate f over [a, infinity) for a > 0 via the substitution r = 1/p,
/// which maps the tail onto the finite interval (0, 1/a].
template <class F>
QuadResult integrate_to_infinity(const F& f, double a, const QuadOptions& opt) {
    if (!(a > 0.0))
        throw DomainError("integrate_to_infinity requires a > 0");
    auto g = [&f](double p) {
        const double r = 1.0 / p;
        return f(r) * r * r;
    };
    return integrate(g, 0.0, 1.0 / a, opt);
}

} // namespace aflab
