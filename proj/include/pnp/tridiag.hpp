#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pnp {

/// Tridiagonal system a_i x_{i-1} + b_i x_i + c_i x_{i+1} = r_i solved by the
/// Thomas algorithm (no pivoting; callers supply diagonally dominant systems).
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(int n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    int size() const { return static_cast<int>(diag.size()); }

    std::vector<double> solve(std::vector<double> rhs) const {
        const int n = size();
        if (static_cast<int>(rhs.size()) != n)
            throw std::invalid_argument("Tridiagonal::solve: size mismatch");
        std::vector<double> cp(n, 0.0);
        double piv = diag[0];
        if (piv == 0.0) throw std::runtime_error("Tridiagonal::solve: zero pivot");
        cp[0] = upper[0] / piv;
        rhs[0] /= piv;
        for (int i = 1; i < n; ++i) {
            piv = diag[i] - lower[i] * cp[i - 1];
            if (piv == 0.0) throw std::runtime_error("Tridiagonal::solve: zero pivot");
            cp[i] = upper[i] / piv;
            rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
        }
        for (int i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
        return rhs;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        const int n = size();
        std::vector<double> y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double acc = diag[i] * x[i];
            if (i > 0) acc += lower[i] * x[i - 1];
            if (i + 1 < n) acc += upper[i] * x[i + 1];
            y[i] = acc;
        }
        return y;
    }
};

/// Solve (T + u1 v1^T + u2 v2^T) x = rhs via Sherman-Morrison-Woodbury:
/// three tridiagonal solves plus a 2x2 correction system.
inline std::vector<double> solve_rank2_corrected(
    const Tridiagonal& T,
    const std::vector<double>& u1, const std::vector<double>& v1,
    const std::vector<double>& u2, const std::vector<double>& v2,
    const std::vector<double>& rhs) {
    const int n = T.size();
    std::vector<double> y = T.solve(rhs);
    std::vector<double> z1 = T.solve(u1);
    std::vector<double> z2 = T.solve(u2);

    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    // (I + V^T Z) alpha = V^T y with Z = [z1 z2], V = [v1 v2]
    const double a11 = 1.0 + dot(v1, z1), a12 = dot(v1, z2);
    const double a21 = dot(v2, z1), a22 = 1.0 + dot(v2, z2);
    const double b1 = dot(v1, y), b2 = dot(v2, y);
    const double det = a11 * a22 - a12 * a21;
    if (det == 0.0 || !std::isfinite(det))
        throw std::runtime_error("solve_rank2_corrected: singular 2x2 correction");
    const double alpha1 = (b1 * a22 - b2 * a12) / det;
    const double alpha2 = (a11 * b2 - a21 * b1) / det;
    for (int i = 0; i < n; ++i) y[i] -= z1[i] * alpha1 + z2[i] * alpha2;
    return y;
}

/// Block-tridiagonal solver with 3x3 blocks (block Thomas with partial
/// pivoting inside each pivot block). Used for the coupled implicit step of
/// the linearized perturbation system.
class BlockTridiagonal3 {
public:
    using Mat3 = std::array<double, 9>;   // row-major
    using Vec3 = std::array<double, 3>;

    explicit BlockTridiagonal3(int n)
        : n_(n), lower_(n), diag_(n), upper_(n) {
        for (int i = 0; i < n; ++i) {
            lower_[i].fill(0.0);
            diag_[i].fill(0.0);
            upper_[i].fill(0.0);
        }
    }

    int size() const { return n_; }
    Mat3& lower(int i) { return lower_[i]; }
    Mat3& diag(int i) { return diag_[i]; }
    Mat3& upper(int i) { return upper_[i]; }

    /// Factor once; reusable across right-hand sides.
    void factor() {
        inv_.resize(n_);
        fac_upper_ = upper_;
        Mat3 d = diag_[0];
        inv_[0] = inverse(d);
        for (int i = 1; i < n_; ++i) {
            // d_i = diag_i - lower_i * inv_{i-1} * upper_{i-1}
            const Mat3 t = mul(lower_[i], mul(inv_[i - 1], fac_upper_[i - 1]));
            Mat3 di = diag_[i];
            for (int k = 0; k < 9; ++k) di[k] -= t[k];
            inv_[i] = inverse(di);
        }
        factored_ = true;
    }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        if (!factored_) throw std::runtime_error("BlockTridiagonal3: factor() first");
        if (static_cast<int>(rhs.size()) != 3 * n_)
            throw std::invalid_argument("BlockTridiagonal3: rhs size mismatch");
        std::vector<Vec3> g(n_);
        for (int i = 0; i < n_; ++i) {
            Vec3 r = {rhs[3 * i], rhs[3 * i + 1], rhs[3 * i + 2]};
            if (i > 0) {
                const Vec3 t = mul(lower_[i], g[i - 1]);
                for (int k = 0; k < 3; ++k) r[k] -= t[k];
            }
            g[i] = mul(inv_[i], r);
        }
        std::vector<double> x(3 * n_, 0.0);
        Vec3 xi = g[n_ - 1];
        store(x, n_ - 1, xi);
        for (int i = n_ - 2; i >= 0; --i) {
            const Vec3 t = mul(fac_upper_[i], xi);
            Vec3 r = g[i];
            Vec3 corr = mul(inv_[i], t);
            for (int k = 0; k < 3; ++k) r[k] -= corr[k];
            xi = r;
            store(x, i, xi);
        }
        return x;
    }

private:
    static void store(std::vector<double>& x, int i, const Vec3& v) {
        x[3 * i] = v[0];
        x[3 * i + 1] = v[1];
        x[3 * i + 2] = v[2];
    }
    static Mat3 mul(const Mat3& a, const Mat3& b) {
        Mat3 c;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
                c[3 * i + j] = s;
            }
        return c;
    }
    static Vec3 mul(const Mat3& a, const Vec3& v) {
        Vec3 y;
        for (int i = 0; i < 3; ++i)
            y[i] = a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2];
        return y;
    }
    static Mat3 inverse(Mat3 a) {
        // Gauss-Jordan with partial pivoting
        Mat3 inv = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(a[3 * r + col]) > std::abs(a[3 * piv + col])) piv = r;
            if (a[3 * piv + col] == 0.0)
                throw std::runtime_error("BlockTridiagonal3: singular pivot block");
            if (piv != col)
                for (int k = 0; k < 3; ++k) {
                    std::swap(a[3 * piv + k], a[3 * col + k]);
                    std::swap(inv[3 * piv + k], inv[3 * col + k]);
                }
            const double s = 1.0 / a[3 * col + col];
            for (int k = 0; k < 3; ++k) {
                a[3 * col + k] *= s;
                inv[3 * col + k] *= s;
            }
            for (int r = 0; r < 3; ++r) {
                if (r == col) continue;
                const double f = a[3 * r + col];
                if (f == 0.0) continue;
                for (int k = 0; k < 3; ++k) {
                    a[3 * r + k] -= f * a[3 * col + k];
                    inv[3 * r + k] -= f * inv[3 * col + k];
                }
            }
        }
        return inv;
    }

    int n_;
    std::vector<Mat3> lower_, diag_, upper_;
    std::vector<Mat3> fac_upper_;
    std::vector<Mat3> inv_;
    bool factored_ = false;
};

}  // namespace pnp
