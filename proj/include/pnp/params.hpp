#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pnp {

/// Physical and asymptotic parameters of the 1D PNP problem on (-1,1).
///
/// epsilon is the scaled dielectric (Debye) parameter, gamma_eps the Robin
/// coefficient of the electrostatic boundary condition, m0 the common total
/// charge of each species, phi0_plus/phi0_minus the boundary data of the
/// potential. theta parametrizes the small-data condition for nonlinear runs.
struct Params {
    double epsilon = 1e-3;
    double gamma_eps = 0.0;     // 0 means "use default 6*sqrt(epsilon)"
    double m0 = 2.0;
    double phi0_plus = 0.1;
    double phi0_minus = -0.1;
    double gamma_max = 1.0;
    double theta = 0.5;

    Params() = default;

    Params(double eps, double gamma, double m0_, double phi_plus,
           double phi_minus, double gmax = 1.0, double theta_ = 0.5)
        : epsilon(eps), gamma_eps(gamma), m0(m0_), phi0_plus(phi_plus),
          phi0_minus(phi_minus), gamma_max(gmax), theta(theta_) {
        validate();
    }

    /// Symmetric boundary data with the default Robin rule gamma_eps = 6*sqrt(eps).
    static Params symmetric(double eps, double m0_, double phi_plus) {
        return Params(eps, 6.0 * std::sqrt(eps), m0_, phi_plus, -phi_plus);
    }

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("Params: epsilon must be > 0");
        if (!(gamma_eps > 0.0)) throw std::invalid_argument("Params: gamma_eps must be > 0");
        if (!(m0 > 0.0)) throw std::invalid_argument("Params: m0 must be > 0");
        if (!(phi0_plus >= 0.0)) throw std::invalid_argument("Params: phi0_plus must be >= 0");
        if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("Params: theta must lie in (0,1)");
        if (!(gamma_max > 0.0)) throw std::invalid_argument("Params: gamma_max must be > 0");
        if (gamma_eps > gamma_max * (1.0 + 1e-12))
            throw std::invalid_argument("Params: gamma_eps must not exceed gamma_max");
    }

    bool symmetric_data() const {
        return phi0_minus == -phi0_plus;
    }
};

/// Constants derived from Params that appear in the layer and decay estimates.
///
/// M is the layer decay rate, K0 the Lipschitz constant of exp on the range of
/// the boundary data, m0_eps / m0_eps_prime the effective charges of the
/// linear and nonlinear decay bounds, robin_threshold the lower bound required
/// of gamma_eps/sqrt(epsilon).
struct DerivedConstants {
    double M = 0.0;
    double K0 = 1.0;
    double m0_eps = 0.0;
    double m0_eps_prime = 0.0;
    double robin_threshold = 0.0;

    explicit DerivedConstants(const Params& p) {
        p.validate();
        M = std::sqrt(p.m0 / (2.0 * std::exp(p.phi0_plus)));
        K0 = k0_of(p.phi0_plus);
        const double s = K0 * p.phi0_plus * std::sqrt(p.epsilon) / M;
        m0_eps = p.m0 * (1.0 - s);
        m0_eps_prime = p.m0 * (1.0 - 2.0 * s);
        const double g = 1.0 + 2.0 * p.gamma_max;
        robin_threshold = (g * g + 3.0) * K0 * p.phi0_plus / (4.0 * M);
#ifndef NDEBUG
        verify_k0_by_scan(p.phi0_plus);
#endif
    }

    /// sup over 0<|y|<=b of |e^y-1|/|y|; attained at y=b since (e^y-1)/y is
    /// increasing and dominates (1-e^-y)/y.
    static double k0_of(double b) {
        if (b <= 0.0) return 1.0;
        if (b < 1e-8) return 1.0 + 0.5 * b;  // expm1(b)/b to avoid 0/0 noise
        return std::expm1(b) / b;
    }

private:
    void verify_k0_by_scan(double b) const {
        if (b <= 0.0) return;
        double best = 0.0;
        const int n = 4001;
        for (int i = 1; i <= n; ++i) {
            const double y = b * static_cast<double>(i) / n;
            best = std::max(best, std::abs(std::expm1(y)) / y);
            best = std::max(best, std::abs(std::expm1(-y)) / y);
        }
        if (!(best <= K0 * (1.0 + 1e-12)) || !(best >= K0 * (1.0 - 1e-4)))
            throw std::logic_error("DerivedConstants: closed-form K0 disagrees with grid scan");
    }
};

}  // namespace pnp
