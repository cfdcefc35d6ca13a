#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnp {

/// A mirror-symmetric mesh of [-1,1], graded toward both endpoints so the
/// O(sqrt(eps)/M) boundary layers are resolved. Immutable after construction.
///
/// Layout of each half: a geometrically stretched zone of width `W` against
/// the boundary (k cells whose widths follow a fixed exponential map, first
/// cell ~ layer_width/33 and refining like 1/n), then a uniform interior.
/// Nodes satisfy nodes[j] == -nodes[N-j] exactly.
struct Grid {
    std::vector<double> nodes;        // x_0 = -1 < ... < x_N = 1
    std::vector<double> cell_widths;  // h_i = x_{i+1} - x_i
    std::vector<double> dual_widths;  // trapezoid weight of each node
    double layer_width = 0.0;         // sqrt(eps)/M, informational

    int n_cells() const { return static_cast<int>(cell_widths.size()); }
    int n_nodes() const { return static_cast<int>(nodes.size()); }
    double min_boundary_cell() const {
        return std::min(cell_widths.front(), cell_widths.back());
    }
    int nodes_in_layer() const {
        // nodes within distance layer_width of x = 1 (mirror-symmetric count)
        int c = 0;
        for (double x : nodes)
            if (x >= 1.0 - layer_width) ++c;
        return c;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

namespace detail {

/// First-cell width of the exponential zone map s(t) = W*expm1(a*t)/expm1(a)
/// sampled at t = j/k.
inline double zone_first_cell(double W, double a, int k) {
    return W * std::expm1(a / k) / std::expm1(a);
}

inline double solve_zone_stretch(double W, int k, double h0) {
    // zone_first_cell is decreasing in a; bracket then bisect.
    double lo = 1e-8, hi = 1.0;
    while (zone_first_cell(W, hi, k) > h0 && hi < 500.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (zone_first_cell(W, mid, k) > h0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Build the symmetric layer-graded mesh.
///
/// Throws std::invalid_argument if n_cells is odd or < 32, or if the grid
/// cannot place at least 12 nodes inside each boundary interval of width
/// sqrt(epsilon)/M (unresolved layer).
inline GridPtr make_grid(int n_cells, double epsilon, double M) {
    if (n_cells < 32 || n_cells % 2 != 0)
        throw std::invalid_argument("make_grid: n_cells must be even and >= 32");
    if (!(epsilon > 0.0) || !(M > 0.0))
        throw std::invalid_argument("make_grid: epsilon and M must be positive");

    const double L = std::sqrt(epsilon) / M;
    const int n_half = n_cells / 2;
    const int k = n_half / 2;       // graded-zone cells per half
    const int m = n_half - k;       // uniform interior cells per half
    const double W = std::min(12.0 * L, 0.5);
    const double h0 = std::min({L / 10.0, 2.0 / n_cells,
                                (L / 33.0) * (256.0 / n_cells)});

    // Right-half nodes ascending on [0, 1].
    std::vector<double> right(static_cast<size_t>(n_half) + 1);
    if (h0 >= (W / k) * (1.0 - 1e-12)) {
        // grading degenerates (layer wide relative to the mesh): uniform half
        for (int i = 0; i <= n_half; ++i)
            right[i] = static_cast<double>(i) / n_half;
        right[n_half] = 1.0;
    } else {
        const double a = detail::solve_zone_stretch(W, k, h0);
        const double xw = 1.0 - W;
        for (int i = 0; i <= m; ++i)
            right[i] = xw * static_cast<double>(i) / m;
        right[m] = xw;
        const double denom = std::expm1(a);
        for (int j = 1; j <= k; ++j) {
            // offset from the boundary of node (m + j), counted inward
            const double s = W * std::expm1(a * static_cast<double>(k - j) / k) / denom;
            right[m + j] = 1.0 - s;
        }
        right[n_half] = 1.0;
    }

    auto g = std::make_shared<Grid>();
    g->layer_width = L;
    g->nodes.resize(static_cast<size_t>(n_cells) + 1);
    for (int i = 0; i <= n_half; ++i) {
        g->nodes[n_half + i] = right[i];
        g->nodes[n_half - i] = -right[i];
    }
    g->nodes[n_half] = 0.0;

    g->cell_widths.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        g->cell_widths[i] = g->nodes[i + 1] - g->nodes[i];
        if (!(g->cell_widths[i] > 0.0))
            throw std::logic_error("make_grid: nodes not strictly increasing");
    }
    g->dual_widths.assign(static_cast<size_t>(n_cells) + 1, 0.0);
    for (int i = 0; i < n_cells; ++i) {
        g->dual_widths[i] += 0.5 * g->cell_widths[i];
        g->dual_widths[i + 1] += 0.5 * g->cell_widths[i];
    }

    if (g->nodes_in_layer() < 12)
        throw std::invalid_argument(
            "make_grid: unresolved layer: cannot place 12 nodes within sqrt(eps)/M = " +
            std::to_string(L) + " of the boundary with n_cells = " + std::to_string(n_cells));
    return g;
}

}  // namespace pnp
