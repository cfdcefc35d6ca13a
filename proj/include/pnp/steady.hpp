#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnp/field.hpp"
#include "pnp/params.hpp"
#include "pnp/poisson.hpp"
#include "pnp/tridiag.hpp"

namespace pnp {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The boundary-layer equilibrium of the PNP system: the potential psi solving
/// the charge-conserving Poisson-Boltzmann equation with Robin conditions, and
/// the induced densities n0 = m0 e^psi / Z+, p0 = m0 e^{-psi} / Z-.
struct SteadyState {
    Params params;
    GridPtr grid;
    Field psi;
    Field psi_x;      // Robin-consistent nodal gradient of the discrete model
    Field n0, p0, delta0, eta0;
    double Zplus = 0.0, Zminus = 0.0;
    double grad_minus = 0.0, grad_plus = 0.0;  // psi_x at x = -1, +1
    double residual_inf = 0.0;
    int newton_iterations = 0;
};

struct TheoremAReport {
    double oddness_defect = 0.0;
    bool monotonicity_ok = false;
    bool convexity_ok = false;
    bool interior_bound_ok = false;
    double interior_bound_worst_margin = 0.0;  // min over nodes of bound - |psi|
    double psi_boundary = 0.0;                 // psi(1)
    double scaled_gradient = 0.0;              // sqrt(eps) * psi_x(1)
    double psi_star_pred = 0.0;                // root of the limit equation with alpha = m0
    double first_integral_defect = 0.0;
};

struct EstimateItem {
    std::string name;
    double lhs = 0.0, rhs = 0.0, slack = 0.0;
    bool pass = false;
    double margin() const { return rhs + slack - lhs; }
};

struct EstimateReport {
    std::vector<EstimateItem> items;
    bool all_pass = true;
};

/// Unique root psi* in (0, phi0] of phi0 - t = gamma*sqrt(alpha)*(e^{t/2}-e^{-t/2}).
inline double solve_psi_star(double gamma, double alpha, double phi0) {
    if (!(phi0 >= 0.0) || !(alpha > 0.0) || !(gamma >= 0.0) ||
        !std::isfinite(gamma) || !std::isfinite(alpha) || !std::isfinite(phi0))
        throw std::invalid_argument("solve_psi_star: bad arguments");
    if (phi0 == 0.0) return 0.0;
    const double c = gamma * std::sqrt(alpha);
    auto g = [&](double t) { return phi0 - t - c * (std::exp(0.5 * t) - std::exp(-0.5 * t)); };
    if (g(phi0) >= 0.0) return phi0;  // gamma == 0 (or numerically so)
    double lo = 0.0, hi = phi0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

struct PbWorkspace {
    Field expp, expm;      // e^psi, e^-psi
    double Zp = 0.0, Zm = 0.0;
    Field rho;             // m0 e^psi/Zp - m0 e^-psi/Zm

    void update(const Field& psi, double m0) {
        const int n = psi.size();
        if (expp.size() != n) {
            expp = Field(psi.grid);
            expm = Field(psi.grid);
            rho = Field(psi.grid);
        }
        for (int i = 0; i < n; ++i) {
            expp.values[i] = std::exp(psi.values[i]);
            expm.values[i] = std::exp(-psi.values[i]);
        }
        Zp = trapezoid(expp);
        Zm = trapezoid(expm);
        for (int i = 0; i < n; ++i)
            rho.values[i] = m0 * expp.values[i] / Zp - m0 * expm.values[i] / Zm;
    }
};

/// sigma-scaled residual of the compact PB scheme.
inline std::vector<double> pb_residual(const Field& psi, const PbWorkspace& w,
                                       const Tridiagonal& A, const Params& p) {
    std::vector<double> R = A.apply(psi.values);
    const std::vector<double> rhs =
        poisson_matrix_rhs(w.rho, p.epsilon, p.gamma_eps, p.phi0_plus, p.phi0_minus);
    for (size_t i = 0; i < R.size(); ++i) R[i] -= rhs[i];
    return R;
}

inline double scaled_inf(const std::vector<double>& R, const GridPtr& g) {
    double worst = 0.0;
    for (size_t i = 0; i < R.size(); ++i)
        worst = std::max(worst, std::abs(R[i]) / g->dual_widths[i]);
    return worst;
}

/// One Newton (or lagged-Z Picard) pass; returns sigma-scaled residual norm
/// after the update. with_z_correction=false freezes Z+- (pure tridiagonal).
inline double pb_newton_step(Field& psi, PbWorkspace& w, const Tridiagonal& A,
                             const Params& p, bool with_z_correction) {
    const int n = psi.size();
    const auto& h = psi.grid->cell_widths;
    const auto& wq = psi.grid->dual_widths;

    std::vector<double> R = pb_residual(psi, w, A, p);
    const double r0 = scaled_inf(R, psi.grid);
    if (!std::isfinite(r0))
        throw SolveError("solve_pb: NaN in residual (exp overflow; psi escaped its bounds)");

    // rho'_j and the mass-weighted application of the (1/4,1/2,1/4) row weights
    std::vector<double> rprime(n), up(n), um(n), vp(n), vm(n);
    for (int i = 0; i < n; ++i) {
        rprime[i] = p.m0 * w.expp.values[i] / w.Zp + p.m0 * w.expm.values[i] / w.Zm;
        up[i] = p.m0 * w.expp.values[i] / (w.Zp * w.Zp);
        um[i] = p.m0 * w.expm.values[i] / (w.Zm * w.Zm);
        vp[i] = wq[i] * w.expp.values[i];
        vm[i] = wq[i] * w.expm.values[i];
    }
    auto mass_apply = [&](const std::vector<double>& z) {
        std::vector<double> y(n, 0.0);
        y[0] = h[0] * (z[0] + z[1]) / 4.0;
        for (int i = 1; i + 1 < n; ++i)
            y[i] = (h[i - 1] * z[i - 1] + (h[i - 1] + h[i]) * z[i] + h[i] * z[i + 1]) / 4.0;
        y[n - 1] = h[n - 2] * (z[n - 2] + z[n - 1]) / 4.0;
        return y;
    };

    // J = A - Mass*diag(rho') + (Mass u+) v+^T + (Mass u-) v-^T
    Tridiagonal T = A;
    T.diag[0] -= (h[0] / 4.0) * rprime[0];
    T.upper[0] -= (h[0] / 4.0) * rprime[1];
    for (int i = 1; i + 1 < n; ++i) {
        T.lower[i] -= (h[i - 1] / 4.0) * rprime[i - 1];
        T.diag[i] -= ((h[i - 1] + h[i]) / 4.0) * rprime[i];
        T.upper[i] -= (h[i] / 4.0) * rprime[i + 1];
    }
    T.lower[n - 1] -= (h[n - 2] / 4.0) * rprime[n - 2];
    T.diag[n - 1] -= (h[n - 2] / 4.0) * rprime[n - 1];

    std::vector<double> negR(n);
    for (int i = 0; i < n; ++i) negR[i] = -R[i];

    std::vector<double> step;
    if (with_z_correction) {
        step = solve_rank2_corrected(T, mass_apply(up), vp, mass_apply(um), vm, negR);
    } else {
        step = T.solve(negR);
    }

    // damped update: backtrack if the residual does not decrease
    const Field psi_old = psi;
    double lambda = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
        for (int i = 0; i < n; ++i) psi.values[i] = psi_old.values[i] + lambda * step[i];
        w.update(psi, p.m0);
        const double r1 = scaled_inf(pb_residual(psi, w, A, p), psi.grid);
        if (std::isfinite(r1) && (r1 < r0 || r1 < 1e-15)) return r1;
        lambda *= 0.5;
    }
    // keep the smallest-lambda iterate; caller decides whether this is failure
    return scaled_inf(pb_residual(psi, w, A, p), psi.grid);
}

inline Field envelope_guess(const GridPtr& grid, const Params& p, double M) {
    const double s = M / std::sqrt(p.epsilon);
    return Field::sample(grid, [&](double x) {
        return p.phi0_plus * std::exp(-s * (1.0 - x)) +
               p.phi0_minus * std::exp(-s * (1.0 + x));
    });
}

inline bool pb_newton_solve(Field& psi, PbWorkspace& w, const Tridiagonal& A,
                            const Params& p, double tol, int max_iter,
                            int& iterations) {
    double res = scaled_inf(pb_residual(psi, w, A, p), psi.grid);
    for (int it = 0; it < max_iter; ++it) {
        if (res <= tol) return true;
        res = pb_newton_step(psi, w, A, p, true);
        ++iterations;
    }
    return res <= tol;
}

}  // namespace detail

/// Solve the charge-conserving Poisson-Boltzmann problem on the given grid.
///
/// Newton on the compact scheme; the Jacobian is tridiagonal plus a rank-2
/// correction from the normalization integrals, handled by two auxiliary
/// tridiagonal solves and a 2x2 system. Falls back to a lagged-Z fixed point
/// and to continuation in epsilon if plain Newton stalls.
inline SteadyState solve_pb(const Params& params, GridPtr grid, double tol = 1e-13,
                            int max_iter = 60) {
    params.validate();
    if (!(tol >= 1e-14 && tol <= 1e-6))
        throw std::invalid_argument("solve_pb: tol must lie in [1e-14, 1e-6]");
    const DerivedConstants dc(params);
    if (grid->layer_width <= 0.0)
        throw std::invalid_argument("solve_pb: invalid grid");

    const Tridiagonal A = assemble_poisson_matrix(grid, params.epsilon, params.gamma_eps);
    detail::PbWorkspace w;
    int iterations = 0;

    Field psi = detail::envelope_guess(grid, params, dc.M);
    w.update(psi, params.m0);
    bool ok = detail::pb_newton_solve(psi, w, A, params, tol, max_iter, iterations);

    if (!ok) {
        // lagged-Z fixed point from the envelope, then retry Newton
        psi = detail::envelope_guess(grid, params, dc.M);
        w.update(psi, params.m0);
        for (int sweep = 0; sweep < 25 && !ok; ++sweep) {
            detail::pb_newton_step(psi, w, A, params, false);
            ok = detail::scaled_inf(detail::pb_residual(psi, w, A, params), grid) <= tol;
        }
        if (!ok) ok = detail::pb_newton_solve(psi, w, A, params, tol, max_iter, iterations);
    }

    if (!ok && params.epsilon < 1e-4) {
        // continuation: decreasing-epsilon sequence reusing psi as the guess
        std::vector<double> seq;
        for (double e = 1e-3; e > params.epsilon * 1.0001; e *= 0.25) seq.push_back(e);
        seq.push_back(params.epsilon);
        Params q = params;
        q.epsilon = seq.front();
        psi = detail::envelope_guess(grid, q, dc.M);
        for (double e : seq) {
            q.epsilon = e;
            const Tridiagonal Ae = assemble_poisson_matrix(grid, e, params.gamma_eps);
            w.update(psi, params.m0);
            ok = detail::pb_newton_solve(psi, w, Ae, q, tol, max_iter, iterations);
            if (!ok) break;
        }
    }

    if (!ok)
        throw SolveError("solve_pb: Newton failed to reach tol " + std::to_string(tol) +
                         " within " + std::to_string(max_iter) +
                         " iterations (bad guess or unresolved layer?)");

    SteadyState ss;
    ss.params = params;
    ss.grid = grid;
    ss.psi = psi;
    w.update(psi, params.m0);
    ss.Zplus = w.Zp;
    ss.Zminus = w.Zm;
    const int n = psi.size();
    ss.n0 = Field(grid);
    ss.p0 = Field(grid);
    ss.delta0 = Field(grid);
    ss.eta0 = Field(grid);
    for (int i = 0; i < n; ++i) {
        ss.n0.values[i] = params.m0 * w.expp.values[i] / w.Zp;
        ss.p0.values[i] = params.m0 * w.expm.values[i] / w.Zm;
        ss.delta0.values[i] = ss.n0.values[i] - ss.p0.values[i];
        ss.eta0.values[i] = ss.n0.values[i] + ss.p0.values[i];
    }
    ss.grad_minus = (psi.values[0] - params.phi0_minus) / params.gamma_eps;
    ss.grad_plus = (params.phi0_plus - psi.values[n - 1]) / params.gamma_eps;
    ss.psi_x = Field(grid);
    const Field Dcum = cumulative_integral(ss.delta0);
    for (int i = 0; i < n; ++i)
        ss.psi_x.values[i] = ss.grad_minus + Dcum.values[i] / params.epsilon;
    ss.residual_inf = detail::scaled_inf(detail::pb_residual(psi, w, A, params), grid);
    ss.newton_iterations = iterations;
    return ss;
}

/// Evaluate the qualitative and quantitative conclusions of the boundary-layer
/// theorem on a computed steady state (report only; never throws).
inline TheoremAReport check_theorem_a(const SteadyState& ss) {
    const DerivedConstants dc(ss.params);
    const auto& x = ss.grid->nodes;
    const auto& h = ss.grid->cell_widths;
    const auto& v = ss.psi.values;
    const int n = ss.psi.size();
    const double sqeps = std::sqrt(ss.params.epsilon);

    TheoremAReport rep;
    for (int i = 0; i < n; ++i)
        rep.oddness_defect = std::max(rep.oddness_defect, std::abs(v[i] + v[n - 1 - i]));

    const double scale = std::max(1.0, max_abs(ss.psi));
    rep.monotonicity_ok = true;
    for (int i = 0; i + 1 < n; ++i)
        if (v[i + 1] < v[i] - 1e-12 * scale) rep.monotonicity_ok = false;

    rep.convexity_ok = true;
    for (int i = 1; i + 1 < n; ++i) {
        const double d2 = (v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1];
        const double slack = 1e-11 * scale / std::min(h[i], h[i - 1]);
        if (x[i] > 0.0 && d2 < -slack) rep.convexity_ok = false;
        if (x[i] < 0.0 && d2 > slack) rep.convexity_ok = false;
    }

    rep.interior_bound_ok = true;
    rep.interior_bound_worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double bound = ss.params.phi0_plus *
            (std::exp(-dc.M * (1.0 + x[i]) / sqeps) + std::exp(-dc.M * (1.0 - x[i]) / sqeps));
        const double margin = bound + 1e-9 - std::abs(v[i]);
        rep.interior_bound_worst_margin = std::min(rep.interior_bound_worst_margin, margin);
        if (margin < 0.0) rep.interior_bound_ok = false;
    }

    rep.psi_boundary = v[n - 1];
    rep.scaled_gradient = sqeps * ss.grad_plus;
    rep.psi_star_pred =
        solve_psi_star(ss.params.gamma_eps / sqeps, ss.params.m0, ss.params.phi0_plus);

    // first integral: (eps/2) psi_x^2 - (m0/Z+)(e^psi + e^-psi) constant in x
    const int mid = (n - 1) / 2;
    auto fi = [&](int i) {
        const double g = ss.psi_x.values[i];
        return 0.5 * ss.params.epsilon * g * g -
               (ss.params.m0 / ss.Zplus) * (std::exp(v[i]) + std::exp(-v[i]));
    };
    const double c0 = fi(mid);
    for (int i = 0; i < n; ++i)
        rep.first_integral_defect = std::max(rep.first_integral_defect, std::abs(fi(i) - c0));
    return rep;
}

/// Numerical audit of the steady-state estimate chain: normalization-integral
/// bound, pointwise and L1 bounds of eta0 - m0, the gradient bound at x = 0,
/// and the L2 gradient bound.
inline EstimateReport check_steady_estimates(const SteadyState& ss) {
    const Params& p = ss.params;
    const DerivedConstants dc(p);
    const double sqeps = std::sqrt(p.epsilon);
    const double kpm = dc.K0 * p.phi0_plus / dc.M;  // K0 phi0(1) / M
    const int n = ss.psi.size();

    EstimateReport rep;
    auto add = [&rep](const std::string& name, double lhs, double rhs, double slack) {
        EstimateItem it;
        it.name = name;
        it.lhs = lhs;
        it.rhs = rhs;
        it.slack = slack;
        it.pass = lhs <= rhs + slack;
        rep.items.push_back(it);
        rep.all_pass = rep.all_pass && it.pass;
    };

    Field expp(ss.grid), expm(ss.grid), absdev(ss.grid), grad2(ss.grid);
    for (int i = 0; i < n; ++i) {
        expp.values[i] = std::exp(ss.psi.values[i]);
        expm.values[i] = std::exp(-ss.psi.values[i]);
        absdev.values[i] = std::abs(ss.eta0.values[i] - p.m0);
        grad2.values[i] = ss.psi_x.values[i] * ss.psi_x.values[i];
    }

    const double rhs_z = 2.0 + kpm * sqeps;
    add("int_exp_psi_plus", trapezoid(expp), rhs_z, 1e-9 + 10.0 * quad_error_estimate(expp));
    add("int_exp_psi_minus", trapezoid(expm), rhs_z, 1e-9 + 10.0 * quad_error_estimate(expm));

    double point_lhs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dev = ss.eta0.values[i] - p.m0;
        point_lhs = std::max(point_lhs, std::abs(dev - std::abs(dev)));
    }
    add("eta0_pointwise", point_lhs, p.m0 * kpm * sqeps, 1e-9);

    add("eta0_l1", trapezoid(absdev), 2.0 * p.m0 * kpm * sqeps,
        1e-9 + 10.0 * quad_error_estimate(absdev));

    const int mid = (n - 1) / 2;
    const double grad0_rhs = 2.0 * p.phi0_plus *
        (std::exp(-1.5 * dc.M / sqeps) + std::exp(-0.5 * dc.M / sqeps));
    add("psi_x_zero", ss.psi_x.values[mid], grad0_rhs, 1e-9);

    add("grad_l2", trapezoid(grad2), 3.0 * p.m0 * dc.K0 * p.phi0_plus / (dc.M * sqeps),
        1e-9 + 10.0 * quad_error_estimate(grad2));
    return rep;
}

struct SweepPoint {
    double eps = 0.0, gamma = 0.0;
    double psi1 = 0.0;            // psi(1)
    double grad1 = 0.0;           // psi_x(1)
    double scaled_grad1 = 0.0;    // sqrt(eps) psi_x(1)
};

struct SweepReport {
    std::vector<SweepPoint> points;
    double slope = 0.0;             // d log|psi_x(1)| / d log eps, expect -1/2
    double slope_r_squared = 0.0;
    double psi1_extrapolated = 0.0; // Richardson in sqrt(eps)
    double alpha_fit = 0.0;         // limit coefficient of the boundary estimate
    double psi_star_predicted = 0.0;
    bool psi1_monotone = false;
    bool psi1_below_phi0 = false;
};

/// Solve the PB problem along a decreasing epsilon list and quantify the
/// boundary blow-up of psi_x(1) and the limits of psi(1), sqrt(eps) psi_x(1).
inline SweepReport boundary_asymptotics_sweep(
    const Params& base, const std::vector<double>& eps_list,
    const std::function<double(double)>& gamma_rule, int n_cells = 256,
    double tol = 1e-13) {
    if (eps_list.size() < 2)
        throw std::invalid_argument("boundary_asymptotics_sweep: need at least two epsilons");
    for (size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("boundary_asymptotics_sweep: eps_list must decrease");

    SweepReport rep;
    for (double eps : eps_list) {
        Params p = base;
        p.epsilon = eps;
        p.gamma_eps = gamma_rule(eps);
        p.validate();
        const DerivedConstants dc(p);
        const SteadyState ss = solve_pb(p, make_grid(n_cells, eps, dc.M), tol);
        SweepPoint pt;
        pt.eps = eps;
        pt.gamma = p.gamma_eps;
        pt.psi1 = ss.psi.back();
        pt.grad1 = ss.grad_plus;
        pt.scaled_grad1 = std::sqrt(eps) * ss.grad_plus;
        rep.points.push_back(pt);
    }

    std::vector<double> lx, ly;
    for (const auto& pt : rep.points) {
        lx.push_back(std::log(pt.eps));
        ly.push_back(std::log(std::abs(pt.grad1)));
    }
    const LineFit lf = fit_line(lx, ly);
    rep.slope = lf.slope;
    rep.slope_r_squared = lf.r_squared;

    // Richardson in sqrt(eps) with the two smallest epsilons: f(eps) ~ f* + c sqrt(eps)
    const SweepPoint& a = rep.points[rep.points.size() - 1];
    const SweepPoint& b = rep.points[rep.points.size() - 2];
    const double sa = std::sqrt(a.eps), sb = std::sqrt(b.eps);
    rep.psi1_extrapolated = (a.psi1 * sb - b.psi1 * sa) / (sb - sa);

    auto alpha_of = [](const SweepPoint& pt) {
        const double den = std::exp(0.5 * pt.psi1) - std::exp(-0.5 * pt.psi1);
        return (pt.scaled_grad1 / den) * (pt.scaled_grad1 / den);
    };
    rep.alpha_fit = (alpha_of(a) * sb - alpha_of(b) * sa) / (sb - sa);

    const double gamma_limit = a.gamma / std::sqrt(a.eps);
    rep.psi_star_predicted = solve_psi_star(gamma_limit, rep.alpha_fit, base.phi0_plus);

    rep.psi1_below_phi0 = true;
    for (const auto& pt : rep.points)
        if (!(pt.psi1 <= base.phi0_plus + 1e-9)) rep.psi1_below_phi0 = false;
    bool inc = true, dec = true;
    for (size_t i = 1; i < rep.points.size(); ++i) {
        if (rep.points[i].psi1 > rep.points[i - 1].psi1 + 1e-12) dec = false;
        if (rep.points[i].psi1 < rep.points[i - 1].psi1 - 1e-12) inc = false;
    }
    rep.psi1_monotone = inc || dec;
    return rep;
}

}  // namespace pnp
