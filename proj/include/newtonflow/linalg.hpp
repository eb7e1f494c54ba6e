#pragma once

// Dense linear algebra for small systems: vectors as std::vector<double>,
// square row-major matrices, LU with partial pivoting, and 2-norm estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "newtonflow/errors.hpp"

namespace newtonflow {

using Vector = std::vector<double>;

/// Pivots below this fraction of max|A| are treated as exact zeros.
inline constexpr double kRelPivotTol = 1e-13;

// ---- vector helpers ----

inline void require_same_size(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("vector size mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b);
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) {
    // scaled to avoid overflow for large components
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double v : a) {
        const double q = v / scale;
        s += q * q;
    }
    return scale * std::sqrt(s);
}

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline Vector sub(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b);
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
    require_same_size(a, b);
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vector scaled(std::span<const double> a, double s) {
    Vector out(a.begin(), a.end());
    for (double& v : out) v *= s;
    return out;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw DimensionError("axpy size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---- Matrix ----

/// Square dense matrix, row-major. Entries are finite on construction.
class Matrix {
public:
    Matrix() = default;

    explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {
        if (dim == 0) throw DimensionError("matrix dimension must be positive");
    }

    Matrix(std::size_t dim, std::vector<double> row_major) : dim_(dim), data_(std::move(row_major)) {
        if (dim == 0) throw DimensionError("matrix dimension must be positive");
        if (data_.size() != dim * dim) {
            throw DimensionError("matrix needs " + std::to_string(dim * dim) + " entries, got " +
                                 std::to_string(data_.size()));
        }
        if (!all_finite(data_)) throw NonFiniteError("matrix has non-finite entries");
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    Vector operator*(std::span<const double> x) const {
        if (x.size() != dim_) throw DimensionError("matvec size mismatch");
        Vector y(dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) s += data_[i * dim_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Matrix operator*(const Matrix& other) const {
        if (other.dim_ != dim_) throw DimensionError("matmul size mismatch");
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t k = 0; k < dim_; ++k) {
                const double a = (*this)(i, k);
                for (std::size_t j = 0; j < dim_; ++j) out(i, j) += a * other(k, j);
            }
        return out;
    }

    Matrix transposed() const {
        Matrix t(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Maximum absolute row sum.
    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    double max_abs() const { return newtonflow::norm_inf(data_); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// ---- LU factorization ----

/// P·A = L·U with unit-diagonal L stored below the diagonal of `lu`.
struct LuFactors {
    std::size_t dim = 0;
    Matrix lu;
    /// Row i of P·A is row perm[i] of A.
    std::vector<std::size_t> perm;
    int parity = 1;

    Matrix lower() const {
        Matrix l = Matrix::identity(dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < i; ++j) l(i, j) = lu(i, j);
        return l;
    }

    Matrix upper() const {
        Matrix u(dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) u(i, j) = lu(i, j);
        return u;
    }

    Matrix permuted(const Matrix& a) const {
        Matrix p(dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) p(i, j) = a(perm[i], j);
        return p;
    }
};

inline LuFactors lu_decompose(const Matrix& a, double rel_pivot_tol = kRelPivotTol) {
    const std::size_t n = a.dim();
    if (n == 0) throw DimensionError("empty matrix");
    LuFactors f{n, a, std::vector<std::size_t>(n), 1};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    const double threshold = rel_pivot_tol * a.max_abs();
    Matrix& m = f.lu;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                p = i;
            }
        }
        if (best <= threshold || best == 0.0) throw SingularError(k, best);
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            std::swap(f.perm[k], f.perm[p]);
            f.parity = -f.parity;
        }
        const double pivot = m(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = m(i, k) / pivot;
            m(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    return f;
}

/// Solves A·x = b from the factors of A.
inline Vector solve(const LuFactors& f, std::span<const double> b) {
    const std::size_t n = f.dim;
    if (b.size() != n) throw DimensionError("solve: rhs size mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[f.perm[i]];
        for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s / f.lu(i, i);
    }
    return x;
}

/// Solves Aᵀ·x = b from the factors of A.
inline Vector solve_transposed(const LuFactors& f, std::span<const double> b) {
    const std::size_t n = f.dim;
    if (b.size() != n) throw DimensionError("solve_transposed: rhs size mismatch");
    // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
    Vector z(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = z[i];
        for (std::size_t j = 0; j < i; ++j) s -= f.lu(j, i) * z[j];
        z[i] = s / f.lu(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(j, i) * z[j];
        z[i] = s;
    }
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[f.perm[i]] = z[i];
    return x;
}

inline double det(const LuFactors& f) {
    double d = f.parity;
    for (std::size_t i = 0; i < f.dim; ++i) d *= f.lu(i, i);
    return d;
}

namespace detail {

// Largest and smallest singular value of a 2x2 matrix.
inline std::pair<double, double> singular_values_2x2(const Matrix& a) {
    const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
    const double frob2 = p * p + q * q + r * r + s * s;
    const double d = std::abs(p * s - q * r);
    const double disc = std::sqrt(std::max(0.0, (frob2 - 2 * d) * (frob2 + 2 * d)));
    const double smax = std::sqrt(0.5 * (frob2 + disc));
    const double smin = smax > 0.0 ? d / smax : 0.0;
    return {smax, smin};
}

inline Vector power_start(std::size_t n) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
    const double nv = norm2(v);
    for (double& e : v) e /= nv;
    return v;
}

}  // namespace detail

/// ‖A‖₂ = σ_max(A).
inline double spectral_norm(const Matrix& a) {
    const std::size_t n = a.dim();
    if (n == 1) return std::abs(a(0, 0));
    if (n == 2) return detail::singular_values_2x2(a).first;
    const Matrix at = a.transposed();
    Vector v = detail::power_start(n);
    double rq = 0.0;
    for (int it = 0; it < 2000; ++it) {
        const Vector w = a * v;
        const double next = dot(w, w);
        Vector z = at * w;
        const double nz = norm2(z);
        if (nz == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / nz;
        if (it > 0 && std::abs(next - rq) <= 1e-15 * next) {
            rq = next;
            break;
        }
        rq = next;
    }
    return std::sqrt(rq);
}

/// ‖A⁻¹‖₂ = 1/σ_min(A) from existing factors of A.
inline double inverse_norm(const Matrix& a, const LuFactors& f) {
    const std::size_t n = a.dim();
    if (n == 1) return 1.0 / std::abs(a(0, 0));
    if (n == 2) {
        const auto [smax, smin] = detail::singular_values_2x2(a);
        (void)smin;
        return smax / std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
    }
    // Inverse iteration on AᵀA; the Rayleigh quotient ‖A⁻ᵀv‖² tends to 1/σ_min².
    Vector v = detail::power_start(n);
    double rq = 0.0;
    for (int it = 0; it < 2000; ++it) {
        const Vector w = solve_transposed(f, v);
        const double next = dot(w, w);
        Vector z = solve(f, w);
        const double nz = norm2(z);
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / nz;
        if (it > 0 && std::abs(next - rq) <= 1e-15 * next) {
            rq = next;
            break;
        }
        rq = next;
    }
    return std::sqrt(rq);
}

/// ‖A⁻¹‖₂; throws SingularError when A is singular under the pivot rule.
inline double inverse_norm(const Matrix& a) { return inverse_norm(a, lu_decompose(a)); }

/// 2-norm condition number κ₂(A) = ‖A‖₂·‖A⁻¹‖₂.
inline double condition_number(const Matrix& a, const LuFactors& f) {
    return spectral_norm(a) * inverse_norm(a, f);
}

}  // namespace newtonflow
