#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "linvol/exact.hpp"

namespace linvol {

/// Small dense row-major matrix. Dimensions here are at most 2d, so no
/// effort goes into blocking or storage tricks.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        assert(a.cols_ == b.rows_);
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
        assert(a.cols_ == v.size());
        std::vector<T> out(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
        return out;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    /// Sum of all coefficients (entries are nonnegative for cocycle matrices).
    T sum_norm() const {
        T s(0);
        for (const auto& x : data_) s += (x < 0 ? T(-x) : x);
        return s;
    }

    T max_norm() const {
        T s(0);
        for (const auto& x : data_) {
            T a = x < 0 ? T(-x) : x;
            if (a > s) s = a;
        }
        return s;
    }

    std::vector<T> column_sums() const {
        std::vector<T> s(cols_, T(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) s[j] += (*this)(i, j);
        return s;
    }

    const std::vector<T>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<BigInt>;

/// Integer matrix applied to a vector over a larger ring (lengths).
template <class T, class V>
    requires(!std::is_same_v<T, V>)
std::vector<V> operator*(const Matrix<T>& a, const std::vector<V>& v) {
    assert(a.cols() == v.size());
    std::vector<V> out(a.rows(), V(0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0) out[i] += V(a(i, j)) * v[j];
    return out;
}

/// Determinant by fraction-free Bareiss elimination.
inline BigInt determinant(IntMatrix m) {
    const std::size_t n = m.rows();
    assert(n == m.cols());
    if (n == 0) return BigInt(1);
    int sign = 1;
    BigInt prev(1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && m(p, k) == 0) ++p;
            if (p == n) return BigInt(0);
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
        prev = m(k, k);
    }
    return sign * m(n - 1, n - 1);
}

template <class To, class From>
Matrix<To> matrix_cast(const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = To(m(i, j));
    return out;
}

inline Matrix<double> to_double_matrix(const IntMatrix& m) {
    Matrix<double> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).convert_to<double>();
    return out;
}

} // namespace linvol
