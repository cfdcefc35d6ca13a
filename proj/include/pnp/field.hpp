#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pnp/grid.hpp"

namespace pnp {

/// A scalar function sampled at the grid nodes.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0)
        : grid(std::move(g)), values(grid->nodes.size(), fill) {}
    Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid->nodes.size())
            throw std::invalid_argument("Field: value count must match node count");
    }

    static Field sample(GridPtr g, const std::function<double(double)>& f) {
        Field out(g);
        for (size_t i = 0; i < g->nodes.size(); ++i) out.values[i] = f(g->nodes[i]);
        return out;
    }

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
    double front() const { return values.front(); }
    double back() const { return values.back(); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Composite trapezoid rule on the (nonuniform) grid, accumulated left to
/// right so that cumulative_integral reproduces it bitwise at x = 1.
inline double trapezoid(const Field& f) {
    const auto& h = f.grid->cell_widths;
    double acc = 0.0;
    for (size_t i = 0; i < h.size(); ++i)
        acc += 0.5 * h[i] * (f.values[i] + f.values[i + 1]);
    return acc;
}

/// F(x) = int_{-1}^{x} f, node by node with the same cell sums as trapezoid().
inline Field cumulative_integral(const Field& f) {
    const auto& h = f.grid->cell_widths;
    Field out(f.grid);
    double acc = 0.0;
    out.values[0] = 0.0;
    for (size_t i = 0; i < h.size(); ++i) {
        acc += 0.5 * h[i] * (f.values[i] + f.values[i + 1]);
        out.values[i + 1] = acc;
    }
    return out;
}

/// Nodal derivative: three-point second-order stencils with exact weights
/// from the local spacings; one-sided at the endpoints.
inline Field derivative(const Field& f) {
    const auto& x = f.grid->nodes;
    const auto& v = f.values;
    const int n = f.size();
    if (n < 3) throw std::invalid_argument("derivative: need at least 3 nodes");
    Field out(f.grid);
    for (int i = 1; i + 1 < n; ++i) {
        const double a = x[i] - x[i - 1];
        const double b = x[i + 1] - x[i];
        out.values[i] = -b / (a * (a + b)) * v[i - 1]
                      + (b - a) / (a * b) * v[i]
                      + a / (b * (a + b)) * v[i + 1];
    }
    {
        const double a = x[1] - x[0], b = x[2] - x[1];
        out.values[0] = -(2.0 * a + b) / (a * (a + b)) * v[0]
                      + (a + b) / (a * b) * v[1]
                      - a / (b * (a + b)) * v[2];
    }
    {
        const double a = x[n - 1] - x[n - 2], b = x[n - 2] - x[n - 3];
        out.values[n - 1] = (2.0 * a + b) / (a * (a + b)) * v[n - 1]
                          - (a + b) / (a * b) * v[n - 2]
                          + a / (b * (a + b)) * v[n - 3];
    }
    return out;
}

/// Estimate of the composite-trapezoid error for integrating f on its grid,
/// sum of h^3 |f''| / 12 with f'' from face-slope differences. Used to size
/// the discretization slack of inequality checks.
inline double quad_error_estimate(const Field& f) {
    const auto& h = f.grid->cell_widths;
    const auto& sigma = f.grid->dual_widths;
    const int nc = static_cast<int>(h.size());
    std::vector<double> fpp(f.size(), 0.0);
    for (int i = 1; i < nc; ++i) {
        const double sr = (f.values[i + 1] - f.values[i]) / h[i];
        const double sl = (f.values[i] - f.values[i - 1]) / h[i - 1];
        fpp[i] = std::abs(sr - sl) / sigma[i];
    }
    fpp[0] = fpp[1];
    fpp[nc] = fpp[nc - 1];
    double e = 0.0;
    for (int i = 0; i < nc; ++i)
        e += h[i] * h[i] * h[i] * std::max(fpp[i], fpp[i + 1]) / 12.0;
    return e;
}

/// Least-squares line fit y ~ intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need two or more samples");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) { sx += xs[i]; sy += ys[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return out;
}

}  // namespace pnp
