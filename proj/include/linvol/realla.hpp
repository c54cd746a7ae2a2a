#pragma once

// Small dense linear algebra over MPFR reals: Gram-Schmidt QR, Jacobi
// eigen-decomposition, Gauss-Jordan inverse, induced l1 norm. Matrices are
// at most 2d x 2d, so everything is naive.

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "linvol/exact.hpp"
#include "linvol/matrix.hpp"

namespace linvol {

using Real = boost::multiprecision::mpfr_float;
using RealMatrix = Matrix<Real>;

/// Sets the default MPFR precision (in bits) for the current scope.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned bits) : old_(Real::default_precision()) {
        Real::default_precision(std::max(30U, static_cast<unsigned>(bits * 0.30103) + 5));
    }
    ~PrecisionGuard() { Real::default_precision(old_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned old_;
};

inline Real to_real(const BigInt& x) { return Real(x.str()); }
inline Real to_real(const Rational& x) { return to_real(numerator(x)) / to_real(denominator(x)); }
inline Real to_real(const QuadraticNumber& x) {
    Real r = to_real(x.rational_part());
    if (!x.is_rational()) r += to_real(x.radical_part()) * sqrt(Real(x.radicand()));
    return r;
}

/// Exact binary value of an MPFR number.
inline Rational to_rational(const Real& x) {
    if (x == 0) return Rational(0); // zero carries a sentinel exponent
    mpz_t m;
    mpz_init(m);
    mpfr_exp_t e = mpfr_get_z_2exp(m, x.backend().data());
    BigInt mant(m);
    mpz_clear(m);
    if (e >= 0) return Rational(mant * pow(BigInt(2), static_cast<unsigned>(e)));
    return make_rational(mant, pow(BigInt(2), static_cast<unsigned>(-e)));
}

inline std::size_t bit_length(const BigInt& x) { return x == 0 ? 0 : msb(abs(x)) + 1; }

inline std::size_t max_bits(const IntMatrix& m) {
    std::size_t b = 0;
    for (const auto& x : m.data()) b = std::max(b, bit_length(x));
    return b;
}

/// Natural log of a positive big integer without overflow.
inline double log_big(const BigInt& x) {
    std::size_t bits = bit_length(x);
    if (bits < 1000) return std::log(x.convert_to<double>());
    BigInt top = x >> static_cast<unsigned>(bits - 64);
    return std::log(top.convert_to<double>()) + static_cast<double>(bits - 64) * std::log(2.0);
}

inline RealMatrix to_real_matrix(const IntMatrix& m) {
    RealMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = to_real(m(i, j));
    return r;
}

/// Columns of a matrix built from a list of vectors.
template <class T>
Matrix<T> columns(const std::vector<std::vector<T>>& vs, std::size_t n) {
    Matrix<T> m(n, vs.size());
    for (std::size_t j = 0; j < vs.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = vs[j][i];
    return m;
}

struct QR {
    RealMatrix q; // orthonormal columns
    RealMatrix r; // upper triangular
    bool full_rank = true;
};

/// Modified Gram-Schmidt; rank loss flagged when a column collapses below
/// `rel_tol` of its original norm.
inline QR gram_schmidt(const RealMatrix& a, double rel_tol = 1e-30) {
    const std::size_t n = a.rows(), k = a.cols();
    QR out{a, RealMatrix(k, k), true};
    for (std::size_t j = 0; j < k; ++j) {
        Real orig(0);
        for (std::size_t i = 0; i < n; ++i) orig += out.q(i, j) * out.q(i, j);
        orig = sqrt(orig);
        for (std::size_t p = 0; p < j; ++p) {
            Real dot(0);
            for (std::size_t i = 0; i < n; ++i) dot += out.q(i, p) * out.q(i, j);
            out.r(p, j) = dot;
            for (std::size_t i = 0; i < n; ++i) out.q(i, j) -= dot * out.q(i, p);
        }
        Real norm(0);
        for (std::size_t i = 0; i < n; ++i) norm += out.q(i, j) * out.q(i, j);
        norm = sqrt(norm);
        if (norm == 0 || norm < orig * Real(rel_tol)) out.full_rank = false;
        out.r(j, j) = norm;
        if (norm != 0)
            for (std::size_t i = 0; i < n; ++i) out.q(i, j) /= norm;
    }
    return out;
}

/// Gauss-Jordan inverse with partial pivoting; nullopt when singular.
inline std::optional<RealMatrix> inverse(RealMatrix a) {
    const std::size_t n = a.rows();
    RealMatrix inv = RealMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (abs(a(r, c)) > abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0) return std::nullopt;
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        Real p = a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) /= p;
            inv(c, j) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a(r, c) == 0) continue;
            Real f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

/// Induced l1 operator norm (max column absolute sum); identity gives 1.
template <class T>
T induced_l1(const Matrix<T>& a) {
    T best(0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        T s(0);
        for (std::size_t i = 0; i < a.rows(); ++i) s += abs(a(i, j));
        if (s > best) best = s;
    }
    return best;
}

struct SymmetricEigen {
    std::vector<Real> values; // descending
    RealMatrix vectors;       // columns match values
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline SymmetricEigen jacobi_eigen(RealMatrix a, std::size_t max_sweeps = 50) {
    const std::size_t n = a.rows();
    RealMatrix v = RealMatrix::identity(n);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        Real off(0), diag(0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += a(i, j) * a(i, j);
        if (off == 0 || off <= diag * pow(Real(2), 8 - 2 * static_cast<int>(Real::default_precision() * 3.32))) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0) continue;
                Real theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                Real t = (theta >= 0 ? Real(1) : Real(-1)) / (abs(theta) + sqrt(theta * theta + 1));
                Real c = 1 / sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    Real akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    Real apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    Real vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    SymmetricEigen out{{}, RealMatrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a(order[j], order[j]));
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

} // namespace linvol
