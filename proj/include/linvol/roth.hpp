#pragma once

// Finite-horizon diagnostics for the Roth-type conditions: growth rate (a),
// spectral gap (b), coherence (c), and Lyapunov exponents of the lifted
// cocycle. Exact arithmetic for identities; MPFR for norms of restricted
// and quotient operators, whose entries overflow doubles quickly.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/involution.hpp"
#include "linvol/matrix.hpp"
#include "linvol/rauzy.hpp"
#include "linvol/realla.hpp"

namespace linvol {

/// I_k(phi) = sum_alpha lambda_alpha phi_alpha.
template <class F, class V>
F pairing(const std::vector<F>& lambda, const std::vector<V>& phi) {
    F s(0);
    for (std::size_t a = 0; a < lambda.size(); ++a) s += lambda[a] * F(phi[a]);
    return s;
}

/// Basis e_beta - (lambda_beta / lambda_0) e_0 of the kernel of I.
template <class F>
std::vector<std::vector<F>> gamma_star_basis(const std::vector<F>& lambda) {
    for (const auto& x : lambda)
        if (!(x > F(0))) throw Error(ErrorCode::NonPositiveLength, "lengths must be positive");
    std::vector<std::vector<F>> basis;
    for (std::size_t b = 1; b < lambda.size(); ++b) {
        std::vector<F> v(lambda.size(), F(0));
        v[b] = F(1);
        v[0] = F(0) - lambda[b] / lambda[0];
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Translation vector: displacement of T in the coordinate z = x on level 0,
/// z = |X| - x on level 1, in which every branch is a translation. It is
/// constant on each slot, equal on both slots of a letter, and |delta| < |X|.
template <class F>
std::vector<F> translation_vector(const LinearInvolution<F>& t) {
    const auto& p = t.permutation();
    std::vector<F> delta(p.size(), F(0));
    for (std::size_t a = 0; a < p.size(); ++a) {
        std::size_t s = p.occurrences(static_cast<Letter>(a)).first;
        const auto& b = t.branch(s);
        const bool top = p.row_of(s) == Row::Top;
        if (b.sign > 0) delta[a] = top ? b.offset : F(0) - b.offset;
        else delta[a] = top ? t.total_length() - b.offset : b.offset - t.total_length();
    }
    return delta;
}

// ---------------------------------------------------------------------------
// Condition (a).

struct ConditionARow {
    std::size_t k = 0;
    BigInt norm_z;          // ||Z(k+1)||
    BigInt norm_q;          // ||Q(k)||
    double ratio = 0;       // ||Z(k+1)|| / ||Q(k)||^eps
    double length_ratio = 0; // max lambda^(k) / min lambda^(k)
    double length_form = 0;  // max / (min ||Q(k)||^eps)
    bool proposition_chain = false; // max lambda^(k) >= |X| / ||Q(k)|| >= min lambda^(k)
    bool zorich_bound = false;      // 2d max lambda^(k) >= min lambda^(k+1) ||Z(k+1)||
};

struct ConditionAProfile {
    double epsilon = 0.5;
    std::vector<ConditionARow> rows;
    double c_matrix = 0; // minimal C for ||Z(k+1)|| <= C ||Q(k)||^eps, k < K
    double c_length = 0; // minimal C for the length form

    bool passes(double c) const { return c_matrix <= c; }
};

template <class F>
std::pair<F, F> min_max(const std::vector<F>& v) {
    F lo = v.front(), hi = v.front();
    for (const auto& x : v) {
        if (x < lo) lo = x;
        if (x > hi) hi = x;
    }
    return {lo, hi};
}

/// Matrix norms use the sum of coefficients unless `max_norm` is set.
template <class F>
ConditionAProfile condition_a_profile(const CocyclePath<F>& path, double epsilon, bool max_norm = false) {
    if (path.blocks() < 2) throw Error(ErrorCode::TooFewBlocks, "condition (a) needs at least 2 blocks");
    ConditionAProfile out;
    out.epsilon = epsilon;
    const std::size_t d = path.dimension();
    F total(0);
    for (const auto& x : path.lengths[0]) total += x;
    for (std::size_t k = 0; k < path.blocks(); ++k) {
        ConditionARow row;
        row.k = k;
        row.norm_z = max_norm ? path.Z[k].max_norm() : path.Z[k].sum_norm();
        row.norm_q = max_norm ? path.Q[k].max_norm() : path.Q[k].sum_norm();
        const double log_q = log_big(row.norm_q);
        row.ratio = std::exp(log_big(row.norm_z) - epsilon * log_q);
        auto [lo, hi] = min_max(path.lengths[k]);
        row.length_ratio = NumberTraits<F>::to_double(hi / lo);
        row.length_form = std::exp(std::log(row.length_ratio) - epsilon * log_q);
        const BigInt sq = path.Q[k].sum_norm();
        row.proposition_chain = !(hi * F(sq) < total) && !(total < lo * F(sq));
        auto [lo1, hi1] = min_max(path.lengths[k + 1]);
        (void)hi1;
        row.zorich_bound = !(hi * F(BigInt(2 * d)) < lo1 * F(path.Z[k].sum_norm()));
        out.c_matrix = std::max(out.c_matrix, row.ratio);
        out.c_length = std::max(out.c_length, row.length_form);
        out.rows.push_back(std::move(row));
    }
    return out;
}

template <class F>
Letter fixed_letter(const CocyclePath<F>& path, std::size_t k) {
    if (k >= path.blocks()) throw Error(ErrorCode::TooFewBlocks, "block does not exist", std::to_string(k + 1));
    return path.fixed_letters[k];
}

// ---------------------------------------------------------------------------
// Condition (b).

struct SpectralGapRow {
    std::size_t k = 0;
    double log_norm = 0;            // log ||S(0,k)||
    double log_restricted_norm = 0; // log ||S(0,k)|Gamma*||
    double theta = 1;               // 1 - max(0, log restricted) / log norm
};

struct SpectralGap {
    std::vector<SpectralGapRow> rows;
    double theta_hat = 0; // 1 - slope of log-log fit, clipped to [0, 1]
    double theta_min = 1; // min over k of the per-level value
    double c = 0;         // minimal C for ||S|Gamma*|| <= C ||S||^(1 - theta_hat)

    bool passes(double theta, double c_max) const { return theta_hat >= theta && c <= c_max; }
};

namespace detail {

template <class F>
unsigned precision_for(const CocyclePath<F>& path) {
    std::size_t bits = max_bits(path.Q.back());
    return static_cast<unsigned>(4 * bits + 256);
}

/// S v for an integer matrix and real-convertible exact vector, exactly,
/// then rounded to Real.
template <class F>
std::vector<Real> apply_exact(const IntMatrix& s, const std::vector<F>& v) {
    auto w = s * v;
    std::vector<Real> out;
    out.reserve(w.size());
    for (const auto& x : w) out.push_back(to_real(x));
    return out;
}

inline double to_log(const Real& x) { return static_cast<double>(log(x)); }

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

/// Matrix of the restriction of an invertible map to span(V) -> span(S V)
/// in orthonormal bases: R_image R_source^{-1}.
inline RealMatrix restricted_matrix(const RealMatrix& source, const RealMatrix& image) {
    QR a = gram_schmidt(source), b = gram_schmidt(image);
    auto inv = inverse(a.r);
    if (!inv) throw Error(ErrorCode::DegenerateQuotient, "degenerate basis");
    return b.r * *inv;
}

} // namespace detail

template <class F>
SpectralGap spectral_gap_estimate(const CocyclePath<F>& path) {
    if (path.blocks() < 5) throw Error(ErrorCode::TooFewBlocks, "spectral gap needs at least 5 blocks");
    PrecisionGuard guard(detail::precision_for(path));
    const std::size_t d = path.dimension();
    auto basis = gamma_star_basis(path.lengths[0]);
    RealMatrix source(d, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) source(i, j) = to_real(basis[j][i]);
    SpectralGap out;
    std::vector<double> xs, ys;
    for (std::size_t k = 1; k <= path.blocks(); ++k) {
        IntMatrix s = path.Q[k].transpose();
        RealMatrix image(d, basis.size());
        for (std::size_t j = 0; j < basis.size(); ++j) {
            auto col = detail::apply_exact(s, basis[j]);
            for (std::size_t i = 0; i < d; ++i) image(i, j) = col[i];
        }
        SpectralGapRow row;
        row.k = k;
        row.log_norm = log_big(s.sum_norm());
        row.log_restricted_norm = d > 1 ? detail::to_log(induced_l1(detail::restricted_matrix(source, image))) : 0.0;
        row.theta = row.log_norm > 0 ? 1.0 - std::max(0.0, row.log_restricted_norm) / row.log_norm : 1.0;
        out.theta_min = std::min(out.theta_min, row.theta);
        xs.push_back(row.log_norm);
        ys.push_back(row.log_restricted_norm);
        out.rows.push_back(row);
    }
    out.theta_hat = std::clamp(1.0 - detail::least_squares_slope(xs, ys), 0.0, 1.0);
    for (const auto& r : out.rows)
        out.c = std::max(out.c, std::exp(r.log_restricted_norm - (1.0 - out.theta_hat) * r.log_norm));
    return out;
}

// ---------------------------------------------------------------------------
// Stable space and condition (c).

struct DecayCertificate {
    std::vector<double> log_norms; // log ||S(0,l) v|| / ||v||, l = 0..K
    double sigma = 0;              // fitted decay exponent against ||S(0,l)||
    double c = 0;                  // minimal C for the fitted sigma
    bool certified = false;        // sigma > 0
};

struct StableSpace {
    std::size_t horizon = 0;
    std::size_t level = 0;
    std::vector<std::vector<Rational>> basis; // vectors at `level`
    std::vector<double> log_singular_values;  // of S(0,K), descending
    std::vector<DecayCertificate> certificates;
    DecayCertificate translation;              // certificate of delta^(0)
    double translation_residual = 0;           // distance of normalized delta to span(basis)
    double translation_sup_over_length = 0;    // sup_l ||S(0,l) delta||_inf / |X|
    bool translation_bounded = false;          // sup_l ||S(0,l) delta||_inf <= |X|, exact
    std::vector<double> pairing_residuals;     // |I_0(v)| / (|X| ||v||)

    std::size_t dimension() const { return basis.size(); }
};

namespace detail {

template <class F, class V>
DecayCertificate certify(const CocyclePath<F>& path, const std::vector<V>& v, std::size_t level, std::size_t horizon) {
    DecayCertificate c;
    std::vector<double> xs, ys;
    Real norm0(0);
    for (const auto& x : v) norm0 += to_real(x) * to_real(x);
    norm0 = sqrt(norm0);
    IntMatrix s = IntMatrix::identity(path.dimension()); // S(level, l)
    for (std::size_t l = level; l <= horizon; ++l) {
        if (l > level) s = path.Z[l - 1].transpose() * s;
        auto w = s * v;
        Real n(0);
        for (const auto& x : w) n += to_real(x) * to_real(x);
        n = sqrt(n);
        double ln = to_log(n / norm0);
        c.log_norms.push_back(ln);
        if (l > level) {
            xs.push_back(log_big(s.sum_norm()));
            ys.push_back(ln);
        }
    }
    c.sigma = xs.size() >= 2 ? -least_squares_slope(xs, ys) : 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) c.c = std::max(c.c, std::exp(ys[i] + c.sigma * xs[i]));
    c.certified = c.sigma > 0;
    return c;
}

} // namespace detail

/// Right singular directions of S(level, K) whose singular values satisfy
/// log sigma_i <= threshold * log sigma_1. Basis vectors are binary
/// rationals so that their images are exact.
template <class F>
StableSpace stable_space_estimate(const CocyclePath<F>& path, std::size_t horizon, double threshold = -0.1,
                                  std::size_t level = 0) {
    if (horizon < level + 2 || horizon > path.blocks()) throw Error(ErrorCode::TooFewBlocks, "stable space needs K blocks");
    const std::size_t d = path.dimension();
    PrecisionGuard guard(detail::precision_for(path));
    StableSpace out;
    out.horizon = horizon;
    out.level = level;
    RealMatrix s = to_real_matrix(path.special(level, horizon));
    auto eig = jacobi_eigen(s.transpose() * s);
    std::vector<double> logs;
    for (const auto& e : eig.values) logs.push_back(e > 0 ? static_cast<double>(log(e)) / 2 : -1e300);
    out.log_singular_values = logs;
    const double top = logs.front();
    F total(0);
    for (const auto& x : path.lengths[level]) total += x;
    for (std::size_t j = 0; j < d; ++j) {
        if (!(logs[j] <= threshold * top)) continue;
        std::vector<Rational> v;
        for (std::size_t i = 0; i < d; ++i) v.push_back(to_rational(eig.vectors(i, j)));
        out.certificates.push_back(detail::certify(path, v, level, horizon));
        Real nv(0), ip(0);
        for (std::size_t a = 0; a < d; ++a) {
            nv += to_real(v[a]) * to_real(v[a]);
            ip += to_real(path.lengths[level][a]) * to_real(v[a]);
        }
        out.pairing_residuals.push_back(static_cast<double>(abs(ip) / (to_real(total) * sqrt(nv))));
        out.basis.push_back(std::move(v));
    }
    return out;
}

/// Adds the translation-vector checks to a stable-space estimate.
template <class F>
void certify_translation(StableSpace& st, const CocyclePath<F>& path, const std::vector<F>& delta) {
    PrecisionGuard guard(detail::precision_for(path));
    const std::size_t d = path.dimension();
    st.translation = detail::certify(path, delta, 0, st.horizon);
    F total(0);
    for (const auto& x : path.lengths[0]) total += x;
    F sup(0);
    for (std::size_t l = 0; l <= st.horizon; ++l) {
        auto w = path.Q[l].transpose() * delta;
        for (const auto& x : w) {
            F a = x < F(0) ? F(0) - x : x;
            if (a > sup) sup = a;
        }
    }
    st.translation_bounded = !(total < sup);
    st.translation_sup_over_length = NumberTraits<F>::to_double(sup / total);
    // residual of the normalized delta after projection onto span(basis)
    RealMatrix b(d, st.basis.size());
    for (std::size_t j = 0; j < st.basis.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) b(i, j) = to_real(st.basis[j][i]);
    std::vector<Real> v;
    Real nv(0);
    for (const auto& x : delta) {
        v.push_back(to_real(x));
        nv += v.back() * v.back();
    }
    nv = sqrt(nv);
    for (auto& x : v) x /= nv;
    if (!st.basis.empty()) {
        QR q = gram_schmidt(b);
        for (std::size_t j = 0; j < q.q.cols(); ++j) {
            Real dot(0);
            for (std::size_t i = 0; i < d; ++i) dot += q.q(i, j) * v[i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q.q(i, j);
        }
    }
    Real r(0);
    for (const auto& x : v) r += x * x;
    st.translation_residual = static_cast<double>(sqrt(r));
}

struct CoherenceRow {
    std::size_t k = 0, l = 0;
    double log_inverse_quotient = 0; // log ||[S_(k,l)]^{-1}||
    double log_stable = 0;           // log ||S(k,l)|Gamma_s||
    double log_norm_q = 0;           // log ||Q(l)||
};

struct CoherenceProfile {
    double epsilon = 0.5;
    std::vector<CoherenceRow> rows;
    double c_quotient = 0; // minimal C_eps for the quotient inequality
    double c_stable = 0;   // minimal C_eps for the stable inequality

    bool passes(double c) const { return c_quotient <= c && c_stable <= c; }
};

/// Both inequalities of condition (c) for 0 <= k <= l <= K, with Gamma_s^(k)
/// the image of the level-0 estimate.
template <class F>
CoherenceProfile coherence_profile(const CocyclePath<F>& path, const StableSpace& stable, double epsilon) {
    const std::size_t d = path.dimension();
    const std::size_t K = stable.horizon;
    const std::size_t s_dim = stable.dimension();
    if (s_dim == 0 || s_dim >= d) throw Error(ErrorCode::DegenerateQuotient, "stable estimate has dimension " + std::to_string(s_dim));
    PrecisionGuard guard(detail::precision_for(path));
    // level-k stable bases, exact images of the level-0 estimate
    std::vector<RealMatrix> stable_basis, complement;
    for (std::size_t k = 0; k <= K; ++k) {
        IntMatrix s = path.Q[k].transpose();
        RealMatrix v(d, s_dim);
        for (std::size_t j = 0; j < s_dim; ++j) {
            auto col = detail::apply_exact(s, stable.basis[j]);
            for (std::size_t i = 0; i < d; ++i) v(i, j) = col[i];
        }
        QR q = gram_schmidt(v);
        if (!q.full_rank) throw Error(ErrorCode::DegenerateQuotient, "stable estimate loses rank", std::to_string(k));
        // complete to an orthonormal basis of R^d
        RealMatrix full(d, s_dim + d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < s_dim; ++j) full(i, j) = q.q(i, j);
            full(i, s_dim + i) = 1;
        }
        QR all = gram_schmidt(full, 1e-20);
        RealMatrix comp(d, d - s_dim);
        std::size_t c = 0;
        for (std::size_t j = s_dim; j < s_dim + d && c < d - s_dim; ++j) {
            if (all.r(j, j) < Real(1e-20)) continue;
            for (std::size_t i = 0; i < d; ++i) comp(i, c) = all.q(i, j);
            ++c;
        }
        if (c != d - s_dim) throw Error(ErrorCode::DegenerateQuotient, "complement has wrong dimension");
        stable_basis.push_back(v);
        complement.push_back(comp);
    }
    CoherenceProfile out;
    out.epsilon = epsilon;
    for (std::size_t k = 0; k <= K; ++k) {
        IntMatrix q = IntMatrix::identity(d);
        for (std::size_t l = k; l <= K; ++l) {
            if (l > k) q = q * path.Z[l - 1];
            RealMatrix s = to_real_matrix(q.transpose());
            RealMatrix quotient = complement[l].transpose() * (s * complement[k]);
            auto inv = inverse(quotient);
            if (!inv) throw Error(ErrorCode::DegenerateQuotient, "quotient operator is singular");
            CoherenceRow row;
            row.k = k;
            row.l = l;
            row.log_inverse_quotient = detail::to_log(induced_l1(*inv));
            row.log_stable = detail::to_log(induced_l1(detail::restricted_matrix(stable_basis[k], stable_basis[l])));
            row.log_norm_q = log_big(path.Q[l].sum_norm());
            out.c_quotient = std::max(out.c_quotient, std::exp(row.log_inverse_quotient - epsilon * row.log_norm_q));
            out.c_stable = std::max(out.c_stable, std::exp(row.log_stable - epsilon * row.log_norm_q));
            out.rows.push_back(row);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full report.

struct RothConfig {
    double epsilon = 0.5;
    double c_epsilon = 10;
    double theta = 0.1;
    double c = 10;
    std::size_t horizon = 30;
    double stable_threshold = -0.1;
};

struct RothReport {
    RothConfig config;
    std::size_t blocks = 0;
    ConditionAProfile a;
    std::optional<SpectralGap> b;
    std::optional<StableSpace> stable;
    std::optional<CoherenceProfile> c;
    std::vector<std::string> notes;
    bool verdict_a = false, verdict_b = false, verdict_c = false;

    bool passes() const { return verdict_a && verdict_b && verdict_c; }
};

template <class F>
RothReport roth_report(const LinearInvolution<F>& t, const RothConfig& config) {
    RothReport r;
    r.config = config;
    auto path = mmy_accelerate(t, config.horizon);
    r.blocks = path.blocks();
    if (path.error) r.notes.push_back("induction stopped: " + std::string(to_string(*path.error)));
    r.a = condition_a_profile(path, config.epsilon);
    r.verdict_a = r.a.passes(config.c_epsilon);
    try {
        r.b = spectral_gap_estimate(path);
        r.verdict_b = r.b->passes(config.theta, config.c);
    } catch (const Error& e) {
        r.notes.push_back(e.what());
    }
    try {
        r.stable = stable_space_estimate(path, path.blocks(), config.stable_threshold);
        certify_translation(*r.stable, path, translation_vector(t));
        r.c = coherence_profile(path, *r.stable, config.epsilon);
        r.verdict_c = r.c->passes(config.c_epsilon);
    } catch (const Error& e) {
        r.notes.push_back(e.what());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents of the lifted cocycle.

enum class Family { Plus, Minus, Full };

inline const char* to_string(Family f) {
    switch (f) {
    case Family::Plus: return "plus";
    case Family::Minus: return "minus";
    case Family::Full: return "full";
    }
    return "?";
}

/// Orthonormal basis (columns) of the family subspace in lifted coordinates.
/// Minus: equal values on both occurrences of a letter (anti-invariant
/// under the deck map, which carries the orientation sign). Plus: opposite
/// values.
inline Eigen::MatrixXd family_basis(std::size_t d, Family f) {
    if (f == Family::Full) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(2 * d), static_cast<Eigen::Index>(2 * d));
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * d), static_cast<Eigen::Index>(d));
    const double h = std::sqrt(0.5);
    for (std::size_t a = 0; a < d; ++a) {
        auto i = static_cast<Eigen::Index>(a);
        e(2 * i, i) = h;
        e(2 * i + 1, i) = f == Family::Minus ? h : -h;
    }
    return e;
}

struct LyapunovEstimate {
    Family family = Family::Minus;
    std::vector<double> exponents;       // per MMY block, descending
    std::vector<double> standard_errors; // block bootstrap over batch means
    std::size_t blocks = 0;
    std::size_t bits = 0; // integer length precision used
};

struct LyapunovOptions {
    std::size_t batches = 50;
    std::size_t bootstrap = 400;
    std::size_t initial_bits = 4096;
};

/// Random positive integer lengths with about `bits` bits obeying the
/// balance equation.
inline std::vector<BigInt> random_integer_lengths(const GeneralizedPermutation& p, std::size_t bits, std::mt19937_64& rng) {
    const std::size_t d = p.size();
    std::vector<int> kind(d, 0); // 0 mixed, 1 top-top, 2 bottom-bottom
    for (std::size_t a = 0; a < d; ++a) {
        auto [s, t] = p.occurrences(static_cast<Letter>(a));
        if (p.row_of(s) == p.row_of(t)) kind[a] = p.row_of(s) == Row::Top ? 1 : 2;
    }
    auto draw = [&]() {
        BigInt x(0);
        for (std::size_t w = 0; w < (bits + 63) / 64; ++w) x = (x << 64) + BigInt(rng());
        return x + 1;
    };
    for (;;) {
        std::vector<BigInt> lambda(d);
        for (auto& x : lambda) x = draw();
        BigInt top(0), bottom(0);
        std::optional<std::size_t> last_bottom;
        for (std::size_t a = 0; a < d; ++a) {
            if (kind[a] == 1) top += lambda[a];
            if (kind[a] == 2) {
                bottom += lambda[a];
                last_bottom = a;
            }
        }
        if (!last_bottom) return lambda;
        BigInt fixed = top - (bottom - lambda[*last_bottom]);
        if (fixed > 0) {
            lambda[*last_bottom] = fixed;
            return lambda;
        }
    }
}

namespace detail {

inline Eigen::MatrixXd to_eigen_scaled(const IntMatrix& m, int& shift) {
    std::size_t bits = max_bits(m);
    shift = bits > 900 ? static_cast<int>(bits - 900) : 0;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            BigInt v = shift ? BigInt(m(i, j) >> static_cast<unsigned>(shift)) : m(i, j);
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.convert_to<double>();
        }
    return out;
}

} // namespace detail

/// QR-iteration estimate of the exponents along K MMY blocks of a random
/// length datum on `p`. Integer lengths are exact; the bit budget doubles
/// until the induction survives K blocks with room to spare.
inline LyapunovEstimate lyapunov_exponents(const GeneralizedPermutation& p, std::size_t K, Family family,
                                           std::uint64_t seed, const LyapunovOptions& options = {}) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "Lyapunov exponents need an irreducible permutation", p.key());
    if (K < options.batches * 2) throw Error(ErrorCode::TooFewBlocks, "too few blocks for the batch bootstrap");
    const std::size_t d = p.size();
    const Eigen::MatrixXd basis = family_basis(d, family);
    const auto dim = basis.cols();
    std::mt19937_64 rng(seed);
    std::size_t bits = options.initial_bits;
    for (;;) {
        auto lambda = random_integer_lengths(p, bits, rng);
        InductionState<BigInt> start{LabeledPermutation::from(p), lambda};
        std::vector<std::vector<double>> increments;
        increments.reserve(K);
        Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(dim, dim);
        const std::size_t reserve_bits = 256;
        bool exhausted = false;
        auto [count, err] = mmy_stream(start, K, true, [&](const MMYBlock<BigInt>& block, const InductionState<BigInt>& state) {
            int shift = 0;
            Eigen::MatrixXd m = detail::to_eigen_scaled(block.lifted, shift);
            Eigen::MatrixXd r = basis.transpose() * m * basis;
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(r * frame);
            Eigen::MatrixXd q = qr.householderQ();
            Eigen::MatrixXd upper = qr.matrixQR().triangularView<Eigen::Upper>();
            std::vector<double> inc(static_cast<std::size_t>(dim));
            for (Eigen::Index i = 0; i < dim; ++i) {
                double rii = upper(i, i);
                if (rii < 0) q.col(i) *= -1;
                inc[static_cast<std::size_t>(i)] = std::log(std::abs(rii)) + shift * std::log(2.0);
            }
            frame = q;
            increments.push_back(std::move(inc));
            BigInt total(0);
            for (const auto& x : state.lengths) total += x;
            if (bit_length(total) < reserve_bits) {
                exhausted = true;
                return false;
            }
            return true;
        });
        (void)err;
        if (exhausted || count < K) {
            // grow the budget in proportion to the blocks still missing
            std::size_t done = std::max<std::size_t>(count, 1);
            bits = std::max(bits * 2, bits * (K + K / 4) / done);
            continue;
        }
        LyapunovEstimate out;
        out.family = family;
        out.blocks = K;
        out.bits = bits;
        const std::size_t B = options.batches, per = K / B;
        std::vector<std::vector<double>> batch(B, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = b * per; k < (b + 1) * per; ++k)
                for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) batch[b][i] += increments[k][i] / static_cast<double>(per);
        out.exponents.assign(static_cast<std::size_t>(dim), 0.0);
        for (const auto& b : batch)
            for (std::size_t i = 0; i < b.size(); ++i) out.exponents[i] += b[i] / static_cast<double>(B);
        // bootstrap over batches
        std::vector<std::vector<double>> boot(static_cast<std::size_t>(dim));
        std::uniform_int_distribution<std::size_t> pick(0, B - 1);
        for (std::size_t r = 0; r < options.bootstrap; ++r) {
            std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
            for (std::size_t b = 0; b < B; ++b) {
                const auto& s = batch[pick(rng)];
                for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i] / static_cast<double>(B);
            }
            for (std::size_t i = 0; i < mean.size(); ++i) boot[i].push_back(mean[i]);
        }
        for (const auto& samples : boot) {
            double m = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
            double v = 0;
            for (double x : samples) v += (x - m) * (x - m);
            out.standard_errors.push_back(std::sqrt(v / static_cast<double>(samples.size() - 1)));
        }
        return out;
    }
}

} // namespace linvol
