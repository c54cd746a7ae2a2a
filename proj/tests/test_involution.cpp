#include <gtest/gtest.h>

#include <random>

#include "linvol/involution.hpp"
#include "oracles.hpp"

using namespace linvol;

namespace {

Rational q(long a, long b) { return Rational(a, b); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

QuadraticNumber golden_ratio_inverse() {
    // (sqrt 5 - 1) / 2
    return QuadraticNumber(Rational(-1, 2), Rational(1, 2), 5);
}

} // namespace

TEST(Build, ClassicalSigns) {
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {q(2, 3), q(1, 3)});
    EXPECT_EQ(t.total_length(), 1);
    for (std::size_t s = 0; s < 4; ++s) EXPECT_EQ(t.branch(s).sign, 1);
}

TEST(Build, GeneralizedSigns) {
    LinearInvolution<Rational> t(parse_permutation("a a b b / c c"), {q(1, 4), q(1, 4), q(1, 2)});
    for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(t.branch(s).sign, -1);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<long> u(1, 9999);
    for (int i = 0; i < 100; ++i) {
        Point<Rational> p{q(u(rng), 10000), i % 2};
        if (t.is_singular(p)) continue;
        auto image = t.involution(p);
        EXPECT_EQ(t.involution(image), p);
    }
}

TEST(Build, Errors) {
    auto p = parse_permutation("a a b b / c c");
    EXPECT_EQ(code_of([&] { LinearInvolution<Rational>(p, {q(1, 4), q(1, 4), q(1, 4)}); }), ErrorCode::BalanceViolated);
    EXPECT_EQ(code_of([&] { LinearInvolution<Rational>(p, {q(0, 1), q(1, 2), q(1, 2)}); }), ErrorCode::NonPositiveLength);
}

TEST(Apply, RotationByOneThird) {
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {q(2, 3), q(1, 3)});
    // T^ sends level 0 to level 1 by the IET; f brings it back to level 0.
    for (long n = 1; n < 30; ++n) {
        Point<Rational> p{q(n, 31), 0};
        auto image = t.apply(p);
        Rational expected = p.x + q(1, 3);
        if (expected >= 1) expected -= 1;
        EXPECT_EQ(image.level, 0);
        EXPECT_EQ(image.x, expected);
    }
    EXPECT_EQ(code_of([&] { t.apply({q(2, 3), 0}); }), ErrorCode::SingularPoint);
}

TEST(Apply, InvolutionPropertyRandom) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<long> u(1, 999983);
    int checked = 0;
    for (int k = 0; k < 20; ++k) {
        auto p = oracle::random_irreducible(rng, k % 2 == 0 ? 2 + k % 4 : 3 + k % 3, k % 2 == 0);
        LinearInvolution<Rational> t(p, oracle::random_lengths(rng, p));
        for (int i = 0; i < 50; ++i) {
            Point<Rational> x{t.total_length() * q(u(rng), 999984), i % 2};
            if (t.is_singular(x)) continue;
            auto y = t.involution(x);
            EXPECT_EQ(t.involution(y), x);
            EXPECT_EQ(LinearInvolution<Rational>::flip(LinearInvolution<Rational>::flip(x)), x);
            ++checked;
        }
    }
    EXPECT_GE(checked, 900);
}

// Branch images tile each level: total image length per level equals |X|
// and the images are disjoint.
TEST(Apply, MeasurePreserving) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 40; ++k) {
        auto p = oracle::random_irreducible(rng, k % 2 == 0 ? 2 + k % 4 : 3 + k % 3, k % 2 == 0);
        LinearInvolution<Rational> t(p, oracle::random_lengths(rng, p));
        std::vector<std::pair<Rational, Rational>> images[2];
        for (const auto& piece : oracle::branches(t)) {
            Rational a = Rational(piece.sign) * piece.lo + piece.offset;
            Rational b = Rational(piece.sign) * piece.hi + piece.offset;
            images[piece.target].push_back({std::min(a, b), std::max(a, b)});
        }
        for (auto& level : images) {
            std::sort(level.begin(), level.end());
            EXPECT_EQ(level.front().first, 0);
            EXPECT_EQ(level.back().second, t.total_length());
            for (std::size_t i = 0; i + 1 < level.size(); ++i) EXPECT_EQ(level[i].second, level[i + 1].first);
        }
    }
}

TEST(Orbit, Empty) {
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {q(2, 3), q(1, 3)});
    auto o = orbit(t, {q(1, 7), 0}, 0);
    EXPECT_TRUE(o.steps.empty());
    EXPECT_FALSE(o.truncated);
}

TEST(Orbit, GoldenNoTruncation) {
    auto g = golden_ratio_inverse();
    LinearInvolution<QuadraticNumber> t(parse_permutation("a b / b a"), {g, QuadraticNumber(1) - g});
    QuadraticNumber start = QuadraticNumber::sqrt_of(5) / QuadraticNumber(4);
    auto o = orbit(t, {start, 0}, 10000);
    EXPECT_FALSE(o.truncated);
    EXPECT_EQ(o.steps.size(), 10000u);
}

TEST(Orbit, RationalTruncates) {
    // rotation by 1/3 from 1/3 reaches the breakpoint 2/3
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {q(2, 3), q(1, 3)});
    auto o = orbit(t, {q(1, 3), 0}, 10);
    EXPECT_TRUE(o.truncated);
    EXPECT_EQ(o.truncation_index, 1u);
}

TEST(Keane, Golden) {
    auto g = golden_ratio_inverse();
    LinearInvolution<QuadraticNumber> t(parse_permutation("a b / b a"), {g, QuadraticNumber(1) - g});
    auto r = keane_check(t, 100);
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.orbits.d0.empty());
}

TEST(Keane, TieAtFirstStep) {
    LinearInvolution<Rational> t(parse_permutation("a b / b a"), {q(1, 2), q(1, 2)});
    auto r = keane_check(t, 10);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.step, 1u);
}

TEST(Keane, RationalGeneralizedFails) {
    LinearInvolution<Rational> t(parse_permutation("a a b b / c c"), {q(1, 4), q(1, 4), q(1, 2)});
    auto r = keane_check(t, 100);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.step, 2u);
}

TEST(Keane, SingularOrbitSets) {
    LinearInvolution<Rational> t(parse_permutation("a b c / c b a"), {q(1, 2), q(1, 3), q(1, 6)});
    auto o = singular_orbits(t, 5);
    // every singularity is in D0, every flipped singularity in D1
    for (const auto& s : t.singularities()) {
        EXPECT_NE(std::find(o.d0.begin(), o.d0.end(), s), o.d0.end());
        EXPECT_NE(std::find(o.d1.begin(), o.d1.end(), LinearInvolution<Rational>::flip(s)), o.d1.end());
    }
}

TEST(Normalize, UnitLength) {
    auto p = parse_permutation("a a b b / c c");
    auto l = normalized(p, std::vector<Rational>{q(1, 1), q(2, 1), q(3, 1)});
    LinearInvolution<Rational> t(p, l);
    EXPECT_EQ(t.total_length(), 1);
}
