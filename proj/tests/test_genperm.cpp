#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "linvol/genperm.hpp"
#include "linvol/involution.hpp"
#include "oracles.hpp"

using namespace linvol;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError; // sentinel: nothing thrown
}

} // namespace

TEST(Validate, ClassicalRotation) {
    auto p = validate({"a", "b"}, {"b", "a"});
    EXPECT_EQ(p.size(), 2u);
    EXPECT_TRUE(p.is_classical());
}

TEST(Validate, GeneralizedType) {
    auto p = validate({"a", "a", "b", "b", "c", "c"}, 4, 2);
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(p.top_length(), 4u);
    EXPECT_EQ(p.bottom_length(), 2u);
    EXPECT_EQ(p.names(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Validate, Errors) {
    EXPECT_EQ(code_of([] { validate({"a", "b"}, {"b", "b"}); }), ErrorCode::NotTwoToOne);
    EXPECT_EQ(code_of([] { validate({"a", "a"}, 2, 0); }), ErrorCode::EmptyRow);
    EXPECT_EQ(code_of([] { validate({"a", "a", "b"}, {"b", "c"}); }), ErrorCode::NotTwoToOne);
}

TEST(Validate, TwinIsInvolution) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        auto p = oracle::random_arrangement(rng, 2 + i % 5, i % 2 == 0);
        for (std::size_t s = 0; s < p.slot_count(); ++s) {
            EXPECT_NE(p.twin(s), s);
            EXPECT_EQ(p.twin(p.twin(s)), s);
            EXPECT_EQ(p.letter(p.twin(s)), p.letter(s));
        }
    }
}

TEST(Validate, ParseRoundTrip) {
    auto p = parse_permutation("a a b b / c c");
    EXPECT_EQ(p.key(), "a a b b / c c");
    EXPECT_EQ(parse_permutation(p.key()), p);
}

TEST(Irreducibility, Examples) {
    EXPECT_TRUE(irreducibility_test(parse_permutation("a b c d / d c b a")));
    EXPECT_FALSE(irreducibility_test(parse_permutation("a b / a b")));
    EXPECT_TRUE(irreducibility_test(parse_permutation("a a b b / c c")));
    EXPECT_FALSE(irreducibility_test(parse_permutation("a a / b b")));
}

TEST(Irreducibility, SuspensionSatisfiesConstraints) {
    auto p = parse_permutation("a a b b / c c");
    auto s = find_suspension(p);
    ASSERT_TRUE(s.has_value());
    Rational top(0), bottom(0);
    for (auto a : p.top()) top += s->lengths[static_cast<std::size_t>(a)];
    for (auto a : p.bottom()) bottom += s->lengths[static_cast<std::size_t>(a)];
    EXPECT_EQ(top, bottom);
}

// Dynamical oracle: with lengths in Q(sqrt 2) induction never ties, and on
// an irreducible permutation every letter wins before the horizon.
TEST(Irreducibility, DynamicalOracle) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> u(1, 1000);
    auto p = parse_permutation("a a b b / c c");
    for (int i = 0; i < 100; ++i) {
        QuadraticNumber a(Rational(u(rng), 1000), Rational(u(rng), 1000), 2);
        QuadraticNumber b(Rational(u(rng), 1000), Rational(u(rng), 1000), 2);
        auto state = InductionState<QuadraticNumber>::from(LinearInvolution<QuadraticNumber>(p, {a, b, a + b}));
        std::vector<bool> won(3, false);
        for (int k = 0; k < 200; ++k) {
            auto r = induction_step(state);
            won[static_cast<std::size_t>(r.move.arrow.winner)] = true;
            state = r.next;
        }
        EXPECT_TRUE(won[0] && won[1] && won[2]);
    }
}

TEST(DoubleCover, Dimensions) {
    auto c = double_cover(parse_permutation("a b / b a"));
    EXPECT_EQ(c.minus_dimension, 2u);
    EXPECT_FALSE(c.connected);
    auto g = double_cover(parse_permutation("a a b b / c c"));
    EXPECT_EQ(g.minus_dimension, 3u);
    EXPECT_EQ(g.lifted_names.size(), 6u);
    EXPECT_TRUE(g.connected);
    EXPECT_EQ(code_of([] { double_cover(parse_permutation("a b / a b")); }), ErrorCode::Reducible);
}

TEST(DoubleCover, LiftedIsClassicalAndProjects) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto p = oracle::random_irreducible(rng, i % 3 == 0 ? 2 + i % 4 : 3 + i % 3, i % 3 == 0);
        auto c = double_cover(p);
        const std::size_t d = p.size();
        EXPECT_EQ(c.plus_dimension + c.minus_dimension, 2 * d);
        auto top = c.lifted_top, bottom = c.lifted_bottom;
        std::sort(top.begin(), top.end());
        std::sort(bottom.begin(), bottom.end());
        std::vector<std::size_t> all(2 * d);
        std::iota(all.begin(), all.end(), 0);
        EXPECT_EQ(top, all);
        EXPECT_EQ(bottom, all);
        for (std::size_t s = 0; s < 2 * d; ++s) {
            EXPECT_NE(c.deck[s], s);
            EXPECT_EQ(c.deck[c.deck[s]], s);
            EXPECT_EQ(c.project(c.deck[s]), c.project(s));
        }
        // projecting the domain order recovers the rows of pi
        std::vector<Letter> top_letters;
        for (std::size_t i2 = p.bottom_length(); i2 < 2 * d; ++i2) top_letters.push_back(c.project(c.lifted_top[i2]));
        EXPECT_EQ(top_letters, p.top());
    }
}

TEST(Stratum, Examples) {
    auto torus = stratum(parse_permutation("a b / b a"));
    EXPECT_TRUE(torus.orientable);
    EXPECT_EQ(torus.genus, 1);

    auto h2 = stratum(parse_permutation("a b c d / d c b a"));
    EXPECT_EQ(h2.orders, std::vector<int>{4});
    EXPECT_EQ(h2.genus, 2);
    EXPECT_TRUE(is_excluded_stratum(h2));

    auto pillow = stratum(parse_permutation("a a b b / c c"));
    EXPECT_EQ(pillow.orders, (std::vector<int>{-1, -1, -1, -1}));
    EXPECT_EQ(pillow.genus, 0);
    EXPECT_FALSE(is_excluded_stratum(pillow));

    auto q2 = stratum(parse_permutation("a b c c / d b d a"));
    EXPECT_EQ(q2.orders, (std::vector<int>{2, -1, -1}));
    EXPECT_FALSE(is_excluded_stratum(q2));
}

TEST(Stratum, ExclusionRule) {
    Stratum minimal;
    minimal.orders = {4};
    minimal.genus = 2;
    EXPECT_TRUE(is_excluded_stratum(minimal));
    Stratum even;
    even.orders = {2, 2};
    even.genus = 2;
    EXPECT_TRUE(is_excluded_stratum(even));
    Stratum mixed;
    mixed.orders = {2, 1, 1};
    mixed.genus = 2;
    EXPECT_FALSE(is_excluded_stratum(mixed));
}

// Gauss-Bonnet and Riemann-Hurwitz against the Euler characteristic of the
// polygonal suspension and of its orientation cover.
TEST(Stratum, EulerOracle) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 60; ++i) {
        auto p = oracle::random_irreducible(rng, i % 3 == 0 ? 2 + i % 5 : 3 + i % 4, i % 3 == 0);
        auto s = stratum(p);
        int sum = std::accumulate(s.orders.begin(), s.orders.end(), 0);
        EXPECT_EQ(sum, 4 * s.genus - 4) << p.key();
        auto topo = suspension_topology(p, *find_suspension(p));
        EXPECT_EQ(topo.euler_characteristic, 2 - 2 * s.genus) << p.key();
        int odd = 0;
        for (int k : s.orders) odd += (k % 2 != 0);
        if (!p.is_classical()) EXPECT_EQ(topo.cover_euler_characteristic, 2 * topo.euler_characteristic - odd) << p.key();
    }
}
