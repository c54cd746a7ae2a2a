#pragma once

// Experiments on the normalized length polytope: uniform sampling, pass
// rates of condition (a), the exhaustive Q_ext check over restricted paths,
// balance profiles and the eta estimate, Monte Carlo volume fractions.
//
// Polytope: lambda > 0, top-only mass = bottom-only mass, total top length 1.
// Sampling is seeded per sample, so results do not depend on the number of
// worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/genperm.hpp"
#include "linvol/involution.hpp"
#include "linvol/rauzy.hpp"
#include "linvol/roth.hpp"

namespace linvol {

enum class SampleMode { Float, Rational };

struct LengthData {
    SampleMode mode = SampleMode::Rational;
    std::vector<double> values;
    std::vector<Rational> exact; // rational mode only
};

struct Interval {
    double lo = 0;
    double hi = 1;
};

/// Wilson score interval; n may be an effective (non-integer) sample size.
inline Interval wilson_interval(double successes, double n, double z = 1.96) {
    if (n <= 0) return {0, 1};
    const double p = successes / n, z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t i) { return splitmix(splitmix(seed) + i); }

/// Uniform on (0, 1), same bits on every platform.
inline double unit_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform point of the open standard simplex in R^n.
inline std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> x(n);
    double s = 0;
    for (auto& v : x) s += v = -std::log(unit_open(rng));
    for (auto& v : x) v /= s;
    return x;
}

struct LetterKinds {
    std::vector<std::size_t> mixed, top, bottom; // one occurrence per row, both top, both bottom
};

inline LetterKinds letter_kinds(const GeneralizedPermutation& p) {
    LetterKinds k;
    for (std::size_t a = 0; a < p.size(); ++a) {
        auto [s, t] = p.occurrences(static_cast<Letter>(a));
        if (p.row_of(s) != p.row_of(t)) k.mixed.push_back(a);
        else (p.row_of(s) == Row::Top ? k.top : k.bottom).push_back(a);
    }
    return k;
}

/// Integers m_i >= 1 summing to 2^bits with m_i / 2^bits close to x_i.
/// Bits past the 53 of a double come from `rng`, so finer grids carry real
/// randomness rather than trailing zeros.
inline std::optional<std::vector<BigInt>> round_to_grid(const std::vector<double>& x, unsigned bits, std::mt19937_64& rng) {
    const BigInt one = BigInt(1) << bits;
    std::vector<BigInt> m(x.size());
    BigInt used(0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        BigInt low(0);
        for (unsigned filled = 0; filled + 53 < bits; filled += 64) low = (low << 64) + BigInt(rng());
        m[i] = (BigInt(std::ldexp(x[i], 53)) << (bits - 53)) + low % (BigInt(1) << (bits - 53));
        if (m[i] < 1) return std::nullopt;
        used += m[i];
    }
    m.back() = one - used;
    if (m.back() < 1) return std::nullopt;
    return m;
}

} // namespace detail

/// Uniform sample of the length polytope of p. Rational mode rounds to the
/// grid 2^-bits (2^-bits-1 on top-only letters) and re-balances exactly.
inline LengthData sample_lengths(const GeneralizedPermutation& p, std::mt19937_64& rng,
                                 SampleMode mode = SampleMode::Rational, unsigned bits = 64) {
    if (bits < 53) throw Error(ErrorCode::InvalidInput, "rational grid needs at least 53 bits");
    const auto kinds = detail::letter_kinds(p);
    if (kinds.top.empty() != kinds.bottom.empty() || kinds.mixed.size() + kinds.top.size() == 0)
        throw Error(ErrorCode::EmptyPolytope, "balance equation has no positive solution", p.key());
    std::vector<std::size_t> free = kinds.mixed;
    free.insert(free.end(), kinds.top.begin(), kinds.top.end());
    const std::size_t nb = kinds.bottom.size();
    const BigInt one = BigInt(1) << bits;
    for (;;) {
        // u = lambda on mixed letters, 2 lambda on top-only letters
        auto u = detail::dirichlet(rng, free.size());
        double s = 0;
        for (std::size_t i = kinds.mixed.size(); i < free.size(); ++i) s += u[i] / 2;
        // the bottom fibre is a simplex of mass s: its volume weighs the draw
        if (nb > 1 && detail::unit_open(rng) >= std::pow(2 * s, static_cast<double>(nb - 1))) continue;
        auto f = detail::dirichlet(rng, nb);
        LengthData out;
        out.mode = mode;
        out.values.assign(p.size(), 0.0);
        if (mode == SampleMode::Float) {
            for (std::size_t i = 0; i < free.size(); ++i) out.values[free[i]] = i < kinds.mixed.size() ? u[i] : u[i] / 2;
            for (std::size_t j = 0; j < nb; ++j) out.values[kinds.bottom[j]] = s * f[j];
            return out;
        }
        auto mu = detail::round_to_grid(u, bits, rng);
        auto mf = nb ? detail::round_to_grid(f, bits, rng) : std::optional<std::vector<BigInt>>(std::vector<BigInt>{});
        if (!mu || !mf) continue;
        out.exact.assign(p.size(), Rational(0));
        Rational top_mass(0);
        for (std::size_t i = 0; i < free.size(); ++i) {
            const bool mixed = i < kinds.mixed.size();
            out.exact[free[i]] = make_rational((*mu)[i], mixed ? one : one * 2);
            if (!mixed) top_mass += out.exact[free[i]];
        }
        for (std::size_t j = 0; j < nb; ++j) out.exact[kinds.bottom[j]] = top_mass * make_rational((*mf)[j], one);
        for (std::size_t a = 0; a < p.size(); ++a) out.values[a] = out.exact[a].convert_to<double>();
        return out;
    }
}

inline LengthData sample_lengths(const GeneralizedPermutation& p, std::uint64_t seed, SampleMode mode = SampleMode::Rational,
                                 unsigned bits = 64) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "sampling needs an irreducible permutation", p.key());
    std::mt19937_64 rng(seed);
    return sample_lengths(p, rng, mode, bits);
}

namespace detail {

/// Runs f(i) for i < n over `threads` workers; f writes to its own slot.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& f) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) f(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Condition (a) pass rate.

struct ConditionAConfig {
    std::size_t samples = 500;
    std::size_t horizon = 15;
    double epsilon = 0.5;
    double c_epsilon = 10;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    unsigned bits = 256; // rational grid; 2^-64 runs out before 15 blocks in d = 4
    bool length_form = false; // test max/min lambda^(k) / ||Q(k)||^eps instead
};

struct SampleOutcome {
    std::uint64_t seed = 0;
    bool tie = false; // induction stopped before the horizon
    bool passed = false;
    double c_matrix = 0;
    std::size_t blocks = 0;
};

struct MonteCarloResult {
    ConditionAConfig config;
    std::size_t passed = 0;
    std::size_t valid = 0; // samples reaching the horizon
    std::size_t ties = 0;
    double fraction = 0;
    Interval wilson;
    std::vector<SampleOutcome> outcomes;
};

/// Fraction of samples whose profile max_k ||Z(k+1)|| / ||Q(k)||^eps stays
/// <= C_eps for k < K. Ties are excluded from the denominator.
inline MonteCarloResult montecarlo_condition_a(const GeneralizedPermutation& p, const ConditionAConfig& config) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "sampling needs an irreducible permutation", p.key());
    if (config.horizon < 2) throw Error(ErrorCode::TooFewBlocks, "condition (a) needs at least 2 blocks");
    MonteCarloResult out;
    out.config = config;
    out.outcomes.resize(config.samples);
    detail::parallel_for(config.samples, config.threads, [&](std::size_t i) {
        SampleOutcome& o = out.outcomes[i];
        o.seed = detail::sample_seed(config.seed, i);
        std::mt19937_64 rng(o.seed);
        auto lengths = sample_lengths(p, rng, SampleMode::Rational, config.bits);
        auto path = mmy_accelerate(LinearInvolution<Rational>(p, lengths.exact), config.horizon);
        o.blocks = path.blocks();
        if (path.blocks() < config.horizon) {
            o.tie = true;
            return;
        }
        auto a = condition_a_profile(path, config.epsilon);
        o.c_matrix = config.length_form ? a.c_length : a.c_matrix;
        o.passed = o.c_matrix <= config.c_epsilon;
    });
    for (const auto& o : out.outcomes) {
        if (o.tie) {
            ++out.ties;
            continue;
        }
        ++out.valid;
        out.passed += o.passed;
    }
    out.fraction = out.valid ? static_cast<double>(out.passed) / static_cast<double>(out.valid) : 0.0;
    out.wilson = wilson_interval(static_cast<double>(out.passed), static_cast<double>(out.valid));
    return out;
}

// ---------------------------------------------------------------------------
// Q_ext <= (2d - 5) Q' over restricted paths.

struct QextCounterexample {
    std::size_t start = 0;          // diagram vertex
    std::vector<std::size_t> edges; // diagram edges of the offending prefix
    std::uint64_t q_ext = 0;
    std::uint64_t q_prime = 0;
};

struct QextVerdict {
    std::size_t d = 0;
    std::size_t subset_size = 0;
    std::uint64_t constant = 0; // 2d - 5
    std::size_t n_max = 0;
    std::uint64_t paths = 0;    // restricted paths of length 1..n_max, all starts
    std::uint64_t prefixes = 0; // anchored prefixes checked
    std::uint64_t skipped = 0;  // arrows pruned for a name outside A'
    double max_ratio = 0;       // max Q_ext / Q' over anchored prefixes
    std::optional<QextCounterexample> counterexample;
    // Every prefix, anchored or not.
    double literal_max_ratio = 0;
    std::uint64_t literal_violations = 0;
    std::optional<QextCounterexample> literal_counterexample;

    bool passes() const { return !counterexample; }
};

/// Exhaustive check from every vertex of the class. The name of an arrow is
/// its winner; column sums follow Q_loser += Q_winner.
///
/// A prefix is anchored once the path has left its first 1-segment: the
/// counting argument runs backwards from the first change of name, whose new
/// name lies in A'. Prefixes of a path that never changes name are reported
/// under the literal statistics only (a loop of one winner against a loser
/// outside A' makes Q_ext grow linearly while Q' stays put).
inline QextVerdict check_qext_lemma(const RauzyDiagram& g, const std::set<Letter>& subset, std::size_t n_max) {
    if (g.vertices.empty()) throw Error(ErrorCode::InvalidInput, "empty diagram");
    const std::size_t d = g.vertices.front().size();
    if (2 * d < 6) throw Error(ErrorCode::InvalidSubset, "2d - 5 < 1: the lemma is vacuous", std::to_string(d));
    if (subset.size() < 2 || subset.size() >= d)
        throw Error(ErrorCode::InvalidSubset, "A' must be a proper subset with more than one letter");
    for (Letter a : subset)
        if (static_cast<std::size_t>(a) >= d) throw Error(ErrorCode::InvalidSubset, "letter outside the alphabet");
    if (n_max > 60) throw Error(ErrorCode::InvalidInput, "column sums overflow past 60 steps");
    QextVerdict v;
    v.d = d;
    v.subset_size = subset.size();
    v.constant = 2 * d - 5;
    v.n_max = n_max;
    std::vector<std::vector<std::size_t>> out(g.vertices.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) out[g.edges[e].source].push_back(e);
    std::vector<bool> in(d, false);
    for (Letter a : subset) in[static_cast<std::size_t>(a)] = true;

    struct Prefix {
        std::uint64_t qe, qp;
        std::size_t length;
    };
    std::vector<std::uint64_t> cs(d, 1);
    std::vector<std::size_t> stack;
    std::vector<Prefix> first_segment; // prefixes not yet anchored
    std::size_t start = 0;
    auto current = [&]() {
        Prefix p{0, 0, stack.size()};
        for (std::size_t a = 0; a < d; ++a) (in[a] ? p.qp : p.qe) += cs[a];
        return p;
    };
    auto record = [&](const Prefix& p, bool anchored) {
        const double r = static_cast<double>(p.qe) / static_cast<double>(p.qp);
        const bool bad = p.qe > v.constant * p.qp;
        auto example = [&] {
            return QextCounterexample{start, std::vector<std::size_t>(stack.begin(), stack.begin() + static_cast<long>(p.length)), p.qe, p.qp};
        };
        if (anchored) {
            ++v.prefixes;
            v.max_ratio = std::max(v.max_ratio, r);
            if (bad && !v.counterexample) v.counterexample = example();
        }
    };
    auto literal = [&](const Prefix& p) {
        v.literal_max_ratio = std::max(v.literal_max_ratio, static_cast<double>(p.qe) / static_cast<double>(p.qp));
        if (p.qe > v.constant * p.qp) {
            ++v.literal_violations;
            if (!v.literal_counterexample)
                v.literal_counterexample =
                    QextCounterexample{start, std::vector<std::size_t>(stack.begin(), stack.begin() + static_cast<long>(p.length)), p.qe, p.qp};
        }
    };
    // first: winner of the first segment, or d when the path is empty;
    // anchored once the name has changed
    std::function<void(std::size_t, std::size_t, bool)> walk = [&](std::size_t vertex, std::size_t first, bool anchored) {
        if (stack.size() == n_max) return;
        for (std::size_t e : out[vertex]) {
            const auto& arrow = g.edges[e].arrow;
            const auto w = static_cast<std::size_t>(arrow.winner), l = static_cast<std::size_t>(arrow.loser);
            if (!in[w]) {
                ++v.skipped;
                continue;
            }
            const bool change = !anchored && first != d && w != first;
            cs[l] += cs[w];
            stack.push_back(e);
            ++v.paths;
            const Prefix p = current();
            literal(p);
            if (change)
                for (const auto& q : first_segment) record(q, true);
            if (anchored || change) {
                record(p, true);
                walk(g.edges[e].target, first, true);
            } else {
                first_segment.push_back(p);
                walk(g.edges[e].target, w, false);
                first_segment.pop_back();
            }
            stack.pop_back();
            cs[l] -= cs[w];
        }
    };
    for (start = 0; start < g.vertices.size(); ++start) {
        const Prefix empty = current();
        literal(empty);
        first_segment.assign(1, empty);
        walk(start, d, false);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Balance along the induction path.

struct BalanceRecord {
    std::size_t n = 0;
    BigInt q_prime{0};
    BigInt q_ext{0};
    std::vector<BigInt> q;            // Q_alpha(n, T)
    std::vector<std::size_t> balanced; // per C1: letters of A' with Q_alpha >= Q' / C1

    /// (D1, n, C1)-balanced for the c_index-th grid value.
    bool is_balanced(std::size_t d1, std::size_t c_index) const { return balanced.at(c_index) >= d1; }
};

struct BalanceProfile {
    std::set<Letter> subset;
    std::vector<double> c_grid;
    std::vector<BalanceRecord> records; // n = 0 .. last step reached
    bool truncated = false;             // a tie stopped the induction
};

namespace detail {

inline BalanceRecord balance_record(std::size_t n, const std::vector<BigInt>& cs, const std::vector<bool>& in,
                                    const std::vector<double>& c_grid) {
    BalanceRecord r;
    r.n = n;
    r.q = cs;
    for (std::size_t a = 0; a < cs.size(); ++a) (in[a] ? r.q_prime : r.q_ext) += cs[a];
    for (double c : c_grid) {
        const Rational c1(c);
        std::size_t count = 0;
        for (std::size_t a = 0; a < cs.size(); ++a)
            if (in[a] && Rational(cs[a]) * c1 >= Rational(r.q_prime)) ++count;
        r.balanced.push_back(count);
    }
    return r;
}

inline std::vector<bool> membership(const std::set<Letter>& subset, std::size_t d) {
    std::vector<bool> in(d, false);
    for (Letter a : subset) {
        if (static_cast<std::size_t>(a) >= d) throw Error(ErrorCode::InvalidSubset, "letter outside the alphabet");
        in[static_cast<std::size_t>(a)] = true;
    }
    return in;
}

} // namespace detail

/// Q_alpha(n, T) along the elementary induction path of T for n <= n_max.
/// An empty subset means A' = A.
template <class F>
BalanceProfile balance_profile(const LinearInvolution<F>& t, std::size_t n_max, std::set<Letter> subset,
                               const std::vector<double>& c_grid) {
    const std::size_t d = t.permutation().size();
    if (subset.empty())
        for (std::size_t a = 0; a < d; ++a) subset.insert(static_cast<Letter>(a));
    for (double c : c_grid)
        if (!(c > 0)) throw Error(ErrorCode::InvalidInput, "C1 must be positive");
    const auto in = detail::membership(subset, d);
    BalanceProfile out;
    out.subset = subset;
    out.c_grid = c_grid;
    std::vector<BigInt> cs(d, BigInt(1));
    out.records.push_back(detail::balance_record(0, cs, in, c_grid));
    auto state = InductionState<F>::from(t);
    for (std::size_t n = 1; n <= n_max; ++n) {
        try {
            auto res = induction_step(state);
            cs[static_cast<std::size_t>(res.move.arrow.loser)] += cs[static_cast<std::size_t>(res.move.arrow.winner)];
            state = std::move(res.next);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Tie && e.code() != ErrorCode::UndefinedMove) throw;
            out.truncated = true;
            break;
        }
        out.records.push_back(detail::balance_record(n, cs, in, c_grid));
    }
    return out;
}

struct EtaEstimate {
    std::size_t samples = 0;
    std::size_t ties = 0;
    std::size_t reached = 0;       // unweighted count
    double fraction = 0;           // weighted, i.e. uniform on Delta(gamma)
    double effective_samples = 0;  // Kish
    Interval wilson;
};

/// Fraction of Delta(gamma) whose continued path becomes (D, n, C0)-balanced
/// for some n in [N, N + n_max], A' = names of gamma. Samples are drawn on
/// the endpoint polytope and pushed through Q(gamma); the weight
/// |Q lambda'|^-(dim + 1) makes them uniform on Delta(gamma).
inline EtaEstimate estimate_eta(const GeneralizedPermutation& p, const std::vector<DiagramArrow>& prefix,
                                std::size_t samples, std::size_t n_max, double c0, std::uint64_t seed) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "sampling needs an irreducible permutation", p.key());
    if (prefix.empty()) throw Error(ErrorCode::InvalidInput, "eta needs a nonempty prefix");
    if (!(prefix.front().source == p)) throw Error(ErrorCode::NonComposable, "prefix does not start at the permutation");
    const std::size_t d = p.size();
    std::set<Letter> subset;
    for (const auto& a : prefix) subset.insert(a.arrow.winner);
    if (subset.size() < 2 || subset.size() >= d)
        throw Error(ErrorCode::InvalidSubset, "names of the prefix must form a proper subset with more than one letter");
    const auto in = detail::membership(subset, d);
    const auto prod = path_product(prefix, d);
    const auto& end = prefix.back().target;
    const double exponent = static_cast<double>(p.is_classical() ? d : d - 1);
    std::vector<std::size_t> top_slots;
    for (std::size_t s = 0; s < p.slot_count(); ++s)
        if (p.row_of(s) == Row::Top) top_slots.push_back(s);

    struct One {
        bool tie = false;
        bool reached = false;
        double log_weight = 0;
    };
    std::vector<One> runs(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        std::mt19937_64 rng(detail::sample_seed(seed, i));
        auto lp = sample_lengths(end, rng, SampleMode::Rational).exact;
        auto lambda = prod.Q * lp;
        Rational top(0);
        for (std::size_t s : top_slots) top += lambda[static_cast<std::size_t>(p.letter(s))];
        runs[i].log_weight = -exponent * std::log(top.convert_to<double>());
        std::vector<BigInt> cs = prod.column_sums;
        InductionState<Rational> state{LabeledPermutation::from(end), lp};
        for (std::size_t n = 0; n <= n_max; ++n) {
            auto r = detail::balance_record(prefix.size() + n, cs, in, {c0});
            if (r.is_balanced(subset.size(), 0)) {
                runs[i].reached = true;
                break;
            }
            if (n == n_max) break;
            try {
                auto res = induction_step(state);
                cs[static_cast<std::size_t>(res.move.arrow.loser)] += cs[static_cast<std::size_t>(res.move.arrow.winner)];
                state = std::move(res.next);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Tie && e.code() != ErrorCode::UndefinedMove) throw;
                runs[i].tie = true;
                break;
            }
        }
    }
    EtaEstimate out;
    out.samples = samples;
    double shift = -1e300;
    for (const auto& r : runs)
        if (!r.tie) shift = std::max(shift, r.log_weight);
    double sw = 0, sw2 = 0, hit = 0;
    for (const auto& r : runs) {
        if (r.tie) {
            ++out.ties;
            continue;
        }
        const double w = std::exp(r.log_weight - shift);
        sw += w;
        sw2 += w * w;
        if (r.reached) {
            hit += w;
            ++out.reached;
        }
    }
    if (sw > 0) {
        out.fraction = hit / sw;
        out.effective_samples = sw * sw / sw2;
        out.wilson = wilson_interval(out.fraction * out.effective_samples, out.effective_samples);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Volume fractions by Monte Carlo.

struct VolumeEstimate {
    std::size_t samples = 0;
    std::size_t hits = 0;
    std::size_t ties = 0;
    double fraction = 0;
    double standard_error = 0;
    Interval wilson;
};

/// Share of the polytope of p whose induction path starts with gamma.
inline VolumeEstimate estimate_volume_fraction(const GeneralizedPermutation& p, const std::vector<DiagramArrow>& path,
                                               std::size_t samples, std::uint64_t seed) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "sampling needs an irreducible permutation", p.key());
    if (!path.empty() && !(path.front().source == p))
        throw Error(ErrorCode::NonComposable, "path does not start at the permutation", p.key());
    VolumeEstimate out;
    out.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        std::mt19937_64 rng(detail::sample_seed(seed, i));
        auto lambda = sample_lengths(p, rng, SampleMode::Rational).exact;
        auto state = InductionState<Rational>::from(LinearInvolution<Rational>(p, lambda));
        bool match = true;
        try {
            for (const auto& a : path) {
                auto res = induction_step(state);
                if (!(res.move.arrow == a.arrow)) {
                    match = false;
                    break;
                }
                state = std::move(res.next);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Tie && e.code() != ErrorCode::UndefinedMove) throw;
            ++out.ties;
            continue;
        }
        out.hits += match;
    }
    const double n = static_cast<double>(samples - out.ties);
    if (n > 0) {
        out.fraction = static_cast<double>(out.hits) / n;
        out.standard_error = std::sqrt(out.fraction * (1 - out.fraction) / n);
        out.wilson = wilson_interval(static_cast<double>(out.hits), n);
    }
    return out;
}

} // namespace linvol
