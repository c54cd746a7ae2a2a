#include <gtest/gtest.h>

#include <random>

#include "linvol/roth.hpp"
#include "oracles.hpp"

using namespace linvol;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

LinearInvolution<QuadraticNumber> golden() {
    QuadraticNumber g(Rational(-1, 2), Rational(1, 2), 5);
    return LinearInvolution<QuadraticNumber>(parse_permutation("a b / b a"), {g, QuadraticNumber(1) - g});
}

// lambda_a / lambda_b = [0; 2, 4, 16, 256, ...], quotients squaring
LinearInvolution<Rational> liouville(std::size_t depth) {
    std::vector<BigInt> a{BigInt(0), BigInt(2)};
    while (a.size() < depth + 2) a.push_back(a.back() * a.back());
    Rational x = oracle::continued_fraction(a);
    return LinearInvolution<Rational>(parse_permutation("a b / b a"), {x, Rational(1)});
}

LinearInvolution<Rational> random_instance(std::mt19937_64& rng, int i, std::size_t bits = 3000) {
    const bool classical = i % 2 == 0;
    auto p = oracle::random_irreducible(rng, classical ? 2 + i % 4 : 3 + i % 3, classical);
    return LinearInvolution<Rational>(p, oracle::random_wide_lengths(rng, p, bits));
}

} // namespace

TEST(Cocycle, ExactIdentities) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 30; ++i) {
        auto t = random_instance(rng, i);
        auto path = mmy_accelerate(t, 20);
        ASSERT_EQ(path.blocks(), 20u) << t.permutation().key();
        const std::size_t d = path.dimension();
        std::vector<Rational> phi(d);
        for (auto& x : phi) x = Rational(static_cast<long>(rng() % 2001) - 1000, 7);
        for (std::size_t k = 0; k < 20; ++k) {
            EXPECT_EQ(path.Z[k] * path.lengths[k + 1], path.lengths[k]);
            EXPECT_EQ(path.Q[k + 1] * path.lengths[k + 1], path.lengths[0]);
            BigInt det = determinant(path.Z[k]);
            EXPECT_TRUE(det == 1 || det == -1);
        }
        for (std::size_t j = 0; j <= 20; j += 4)
            for (std::size_t k = j; k <= 20; k += 3)
                for (std::size_t l = k; l <= 20; l += 5) {
                    EXPECT_EQ(path.special(j, l), path.special(k, l) * path.special(j, k));
                    EXPECT_EQ(pairing(path.lengths[l], path.special(k, l) * phi), pairing(path.lengths[k], phi));
                }
    }
}

TEST(ConditionA, GoldenBoundedByThree) {
    auto path = mmy_accelerate(golden(), 25);
    ASSERT_EQ(path.blocks(), 25u);
    auto a = condition_a_profile(path, 0.5);
    EXPECT_LE(a.c_matrix, 3.0);
    for (const auto& r : a.rows) EXPECT_EQ(r.norm_z, 3);
    EXPECT_TRUE(a.passes(3.0));
}

TEST(ConditionA, LiouvilleRatioGrows) {
    auto path = mmy_accelerate(liouville(12), 10);
    ASSERT_EQ(path.blocks(), 10u);
    auto a = condition_a_profile(path, 0.5);
    for (std::size_t k = 6; k < a.rows.size(); ++k) EXPECT_GE(a.rows[k].ratio, 2 * a.rows[k - 1].ratio) << k;
    EXPECT_FALSE(a.passes(10));
}

TEST(ConditionA, PropositionChainAndZorichBound) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 30; ++i) {
        auto path = mmy_accelerate(random_instance(rng, i), 20);
        auto a = condition_a_profile(path, 0.5);
        for (const auto& r : a.rows) {
            EXPECT_TRUE(r.proposition_chain) << r.k;
            EXPECT_TRUE(r.zorich_bound) << r.k;
        }
    }
}

// Matrix form passing at C implies the length form passes at 2d C^2. The
// converse needs a different exponent and is not checked.
TEST(ConditionA, LengthFormAgreesUpToFactor) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 20; ++i) {
        auto path = mmy_accelerate(random_instance(rng, i), 15);
        auto a = condition_a_profile(path, 0.5);
        const double d = static_cast<double>(path.dimension());
        const double slack = 2 * d * 10 * 10;
        if (a.c_matrix <= 10) EXPECT_LE(a.c_length, slack);
    }
}

TEST(ConditionA, TooFewBlocks) {
    CocyclePath<Rational> empty;
    EXPECT_EQ(code_of([&] { condition_a_profile(empty, 0.5); }), ErrorCode::TooFewBlocks);
}

TEST(Translation, BoundedByTotalLength) {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 30; ++i) {
        auto t = random_instance(rng, i);
        auto delta = translation_vector(t);
        auto path = mmy_accelerate(t, 30);
        ASSERT_EQ(path.blocks(), 30u);
        Rational sup(0);
        for (std::size_t l = 0; l <= 30; ++l)
            for (const auto& x : path.special(0, l) * delta) sup = std::max(sup, abs(x));
        EXPECT_LE(sup, t.total_length()) << t.permutation().key();
    }
}

TEST(Translation, RotationValue) {
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {Rational(2, 3), Rational(1, 3)});
    auto delta = translation_vector(t);
    EXPECT_EQ(delta, (std::vector<Rational>{Rational(1, 3), Rational(-2, 3)}));
    EXPECT_EQ(pairing(t.lengths(), delta), 0);
}

TEST(SpectralGap, Golden) {
    auto path = mmy_accelerate(golden(), 20);
    auto b = spectral_gap_estimate(path);
    EXPECT_GE(b.theta_hat, 0.9);
    EXPECT_TRUE(b.passes(0.1, 10));
    EXPECT_EQ(code_of([&] { spectral_gap_estimate(mmy_accelerate(golden(), 3)); }), ErrorCode::TooFewBlocks);
}

TEST(SpectralGap, GammaStarIsKernel) {
    std::vector<Rational> lambda{Rational(1, 2), Rational(1, 3), Rational(1, 6)};
    for (const auto& v : gamma_star_basis(lambda)) EXPECT_EQ(pairing(lambda, v), 0);
}

TEST(StableSpace, GoldenContainsTranslation) {
    auto t = golden();
    auto path = mmy_accelerate(t, 30);
    auto st = stable_space_estimate(path, 30);
    ASSERT_EQ(st.dimension(), 1u);
    certify_translation(st, path, translation_vector(t));
    EXPECT_LT(st.translation_residual, 1e-8);
    EXPECT_TRUE(st.translation_bounded);
    EXPECT_TRUE(st.certificates[0].certified);
    EXPECT_LT(st.pairing_residuals[0], 1e-8);
}

TEST(StableSpace, Equivariance) {
    std::mt19937_64 rng(25);
    auto p = parse_permutation("a b c d / d c b a");
    LinearInvolution<Rational> t(p, oracle::random_wide_lengths(rng, p, 4000));
    auto path = mmy_accelerate(t, 40);
    ASSERT_EQ(path.blocks(), 40u);
    auto s0 = stable_space_estimate(path, 40, -0.1, 0);
    ASSERT_EQ(s0.dimension(), 2u);
    PrecisionGuard guard(2048);
    for (std::size_t l : {5u, 10u, 20u}) {
        auto sl = stable_space_estimate(path, 40, -0.1, l);
        ASSERT_EQ(sl.dimension(), 2u);
        RealMatrix b(4, 2);
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 4; ++i) b(i, j) = to_real(sl.basis[j][i]);
        QR q = gram_schmidt(b);
        for (const auto& v : s0.basis) {
            auto w = path.special(0, l) * v;
            std::vector<Real> x;
            Real n(0);
            for (const auto& c : w) {
                x.push_back(to_real(c));
                n += x.back() * x.back();
            }
            for (auto& c : x) c /= sqrt(n);
            for (std::size_t j = 0; j < 2; ++j) {
                Real dot(0);
                for (std::size_t i = 0; i < 4; ++i) dot += q.q(i, j) * x[i];
                for (std::size_t i = 0; i < 4; ++i) x[i] -= dot * q.q(i, j);
            }
            Real r(0);
            for (const auto& c : x) r += c * c;
            EXPECT_LT(static_cast<double>(sqrt(r)), 1e-8) << l;
        }
    }
}

TEST(Coherence, GoldenPasses) {
    auto t = golden();
    auto path = mmy_accelerate(t, 15);
    auto st = stable_space_estimate(path, 15);
    auto c = coherence_profile(path, st, 0.5);
    EXPECT_TRUE(c.passes(10));
    // k = l rows are identities
    for (const auto& r : c.rows)
        if (r.k == r.l) {
            EXPECT_NEAR(r.log_inverse_quotient, 0, 1e-12);
            EXPECT_NEAR(r.log_stable, 0, 1e-12);
        }
}

TEST(Report, GoldenPassesLiouvilleFails) {
    RothConfig config;
    config.horizon = 12;
    auto g = roth_report(golden(), config);
    EXPECT_TRUE(g.passes());
    auto l = roth_report(liouville(14), config);
    EXPECT_FALSE(l.verdict_a);
}

TEST(Lyapunov, FamilyBases) {
    for (auto f : {Family::Plus, Family::Minus}) {
        auto e = family_basis(3, f);
        EXPECT_EQ(e.cols(), 3);
        EXPECT_NEAR((e.transpose() * e - Eigen::MatrixXd::Identity(3, 3)).norm(), 0, 1e-14);
    }
    auto plus = family_basis(3, Family::Plus), minus = family_basis(3, Family::Minus);
    EXPECT_NEAR((plus.transpose() * minus).norm(), 0, 1e-14);
}

TEST(Lyapunov, RotationIsSymmetric) {
    LyapunovOptions options;
    options.batches = 20;
    options.bootstrap = 100;
    auto e = lyapunov_exponents(parse_permutation("a b / b a"), 400, Family::Minus, 7, options);
    ASSERT_EQ(e.exponents.size(), 2u);
    EXPECT_GT(e.exponents[0], 0.5);
    EXPECT_NEAR(e.exponents[0] + e.exponents[1], 0, 3 * std::hypot(e.standard_errors[0], e.standard_errors[1]) + 1e-9);
}

TEST(Lyapunov, Deterministic) {
    LyapunovOptions options;
    options.batches = 10;
    options.bootstrap = 50;
    auto p = parse_permutation("a a b b / c c");
    auto x = lyapunov_exponents(p, 100, Family::Full, 3, options);
    auto y = lyapunov_exponents(p, 100, Family::Full, 3, options);
    EXPECT_EQ(x.exponents, y.exponents);
    EXPECT_EQ(x.standard_errors, y.standard_errors);
}
