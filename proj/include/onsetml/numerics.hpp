#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "onsetml/error.hpp"

namespace onsetml {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small and value-semantic; everything in this
/// toolkit is at most a few dozen rows and columns.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(const std::vector<Vector>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                raise(errc::dimension_mismatch, "ragged rows in matrix construction");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Vector row(std::size_t i) const {
        return Vector(entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                      entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    Vector col(std::size_t j) const {
        Vector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vector entries_;
};

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) raise(errc::dimension_mismatch, "matmul shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Vector matvec(const Matrix& m, const Vector& v) {
    if (m.cols() != v.size()) raise(errc::dimension_mismatch, "matvec shape mismatch");
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) raise(errc::dimension_mismatch, "dot length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const Matrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) v = std::max(v, std::abs(m(i, j)));
    return v;
}

inline void require_symmetric(const Matrix& m, const char* who) {
    if (m.rows() != m.cols()) raise(errc::not_symmetric, std::string(who) + ": matrix not square");
    const double tol = 1e-10 * std::max(1.0, max_abs(m));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol)
                raise(errc::not_symmetric, std::string(who) + ": matrix not symmetric");
}

/// Solves A x = b for symmetric positive definite A by Cholesky
/// factorization. A pivot at or below 1e-12 (relative to the diagonal scale)
/// means the system is singular or indefinite, which in this toolkit signals
/// collinear features.
inline Vector solve_spd(const Matrix& a, const Vector& b) {
    require_symmetric(a, "solve_spd");
    const std::size_t n = a.rows();
    if (b.size() != n) raise(errc::dimension_mismatch, "solve_spd: rhs length mismatch");

    double diag_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(a(i, i)));
    const double pivot_tol = 1e-12 * std::max(1.0, diag_scale);

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_tol))
            raise(errc::singular_matrix, "solve_spd: pivot " + std::to_string(d) +
                                             " at column " + std::to_string(j));
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }

    // forward then backward substitution
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

struct EigenDecomposition {
    Vector eigenvalues;   // sorted descending
    Matrix eigenvectors;  // column i pairs with eigenvalues[i], unit norm
};

/// Symmetric eigendecomposition by cyclic Jacobi sweeps. Eigenvalues come
/// out sorted descending; each eigenvector is normalized so its
/// largest-magnitude entry (lowest index on ties) is non-negative.
inline EigenDecomposition eigh_sym(const Matrix& m) {
    require_symmetric(m, "eigh_sym");
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double off_tol = 1e-12 * std::max(1.0, max_abs(m));
    constexpr int max_sweeps = 100;

    bool converged = n < 2;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= off_tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= off_tol * 1e-3) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off > off_tol) raise(errc::no_convergence, "eigh_sym: Jacobi sweeps exhausted");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.eigenvalues[j] = a(src, src);
        std::size_t peak = 0;
        double peak_mag = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > peak_mag) {
                peak_mag = mag;
                peak = i;
            }
        }
        const double sign = v(peak, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = sign * v(i, src);
    }
    return out;
}

struct MeanStd {
    double mean;
    double std;  // sample (n-1) denominator
};

inline MeanStd mean_std(const Vector& x) {
    if (x.size() < 2) raise(errc::too_few_values, "mean_std needs at least 2 values");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

inline double pearson_corr(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) raise(errc::dimension_mismatch, "pearson_corr length mismatch");
    if (x.size() < 2) raise(errc::too_few_values, "pearson_corr needs at least 2 values");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        raise(errc::constant_column, "pearson_corr: zero-variance input");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace onsetml
