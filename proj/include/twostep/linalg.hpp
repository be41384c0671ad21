#pragma once

// Dense linear algebra for desk-scale systems (n <= 50): a row-major matrix,
// LU with partial pivoting, and the Euclidean-induced operator norm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "twostep/errors.hpp"

namespace twostep {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw DomainError("Matrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double norm2(std::span<const double> v) {
    double scale = 0.0;
    for (double x : v)
        scale = std::max(scale, std::abs(x));
    if (scale == 0.0 || !std::isfinite(scale))
        return scale;
    double sum = 0.0;
    for (double x : v) {
        const double r = x / scale;
        sum += r * r;
    }
    return scale * std::sqrt(sum);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d[i] = a[i] - b[i];
    return norm2(d);
}

inline Vector operator-(const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] - b[i];
    return out;
}

inline Vector operator+(const Vector& a, const Vector& b) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] + b[i];
    return out;
}

inline Vector operator*(double s, const Vector& a) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = s * a[i];
    return out;
}

inline Vector operator*(const Matrix& m, std::span<const double> v) {
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j)
            acc += m(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(i, j) = a(i, j) - b(i, j);
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

/// Largest absolute entry; cheap scale for relative tolerances.
inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (double x : a.row(i))
            m = std::max(m, std::abs(x));
    return m;
}

/// Operator norm induced by the Euclidean vector norm, by power iteration on
/// AᵀA (relative tolerance 1e-10, at most 500 iterations).
inline double operator_norm(const Matrix& a) {
    const std::size_t n = a.cols();
    if (n == 0 || a.rows() == 0)
        return 0.0;
    if (n == 1 && a.rows() == 1)
        return std::abs(a(0, 0));
    const Matrix ata = transpose(a) * a;
    // Non-uniform start so that symmetric matrices with a (1,..,1) null vector
    // still excite the dominant direction.
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.1 * static_cast<double>(i);
    {
        const double nv = norm2(v);
        for (double& x : v)
            x /= nv;
    }
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        Vector w = ata * v;
        const double nw = norm2(w);
        if (nw == 0.0)
            return 0.0;
        for (std::size_t i = 0; i < n; ++i)
            v[i] = w[i] / nw;
        const bool done = std::abs(nw - lambda) <= 1e-10 * nw;
        lambda = nw;
        if (done)
            break;
    }
    return std::sqrt(lambda);
}

/// LU factorization with partial pivoting. A pivot is rejected as singular
/// when |u_kk| < 1e-13 times the infinity norm of its original row.
class LuDecomposition {
public:
    static constexpr double pivot_ratio = 1e-13;

    explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
        const std::size_t n = lu_.rows();
        if (lu_.cols() != n)
            throw DomainError("LuDecomposition: matrix is not square");
        std::vector<double> row_norm(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            perm_[i] = i;
            for (double x : lu_.row(i)) {
                if (!std::isfinite(x))
                    throw DomainError("LuDecomposition: non-finite entry");
                row_norm[i] = std::max(row_norm[i], std::abs(x));
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu_(i, k)) > std::abs(lu_(p, k)))
                    p = i;
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
            }
            const double pivot = lu_(k, k);
            const double scale = row_norm[perm_[k]];
            if (scale == 0.0 || std::abs(pivot) < pivot_ratio * scale)
                throw SingularMatrix("LuDecomposition: pivot below threshold at column " +
                                     std::to_string(k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = lu_(i, k) / pivot;
                lu_(i, k) = f;
                if (f == 0.0)
                    continue;
                for (std::size_t j = k + 1; j < n; ++j)
                    lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::size_t size() const noexcept { return lu_.rows(); }

    Vector solve(std::span<const double> b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n)
            throw DomainError("LuDecomposition::solve: dimension mismatch");
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j)
                acc -= lu_(i, j) * x[j];
            x[i] = acc;
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = x[i];
            for (std::size_t j = i + 1; j < n; ++j)
                acc -= lu_(i, j) * x[j];
            x[i] = acc / lu_(i, i);
        }
        return x;
    }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

inline Vector solve_linear(const Matrix& a, std::span<const double> b) {
    return LuDecomposition(a).solve(b);
}

} // namespace twostep
