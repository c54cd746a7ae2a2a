#pragma once

// Zorich and MMY accelerations, cocycle paths, Rauzy diagrams and path
// combinatorics. The elementary move lives in involution.hpp.
//
// Conventions: lambda = B lambda' per step with B = I + E(winner, loser);
// Z(k) multiplies the elementary matrices in path order, so
// lambda^(k-1) = Z(k) lambda^(k) and Q(k) = Z(1)...Z(k). The lifted matrices
// act on functions of the 2d lifted symbols: phi^(k) = M(k) phi^(k-1).

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/genperm.hpp"
#include "linvol/involution.hpp"
#include "linvol/matrix.hpp"

namespace linvol {

inline IntMatrix elementary_matrix(std::size_t d, const Arrow& a) {
    IntMatrix m = IntMatrix::identity(d);
    m(static_cast<std::size_t>(a.winner), static_cast<std::size_t>(a.loser)) = 1;
    return m;
}

/// `pattern` repeated `repeat` times.
struct ArrowRun {
    std::vector<Arrow> pattern;
    BigInt repeat{1};
};

inline BigInt arrow_count(const std::vector<ArrowRun>& runs) {
    BigInt n(0);
    for (const auto& r : runs) n += r.repeat * BigInt(r.pattern.size());
    return n;
}

/// Expands at most `limit` arrows.
inline std::vector<Arrow> expand(const std::vector<ArrowRun>& runs, std::size_t limit = 1U << 20) {
    std::vector<Arrow> out;
    for (const auto& r : runs)
        for (BigInt i(0); i < r.repeat; ++i)
            for (const auto& a : r.pattern) {
                if (out.size() >= limit) return out;
                out.push_back(a);
            }
    return out;
}

namespace detail {

inline void append_arrow(std::vector<ArrowRun>& runs, const Arrow& a) {
    if (!runs.empty() && runs.back().repeat == 1) {
        runs.back().pattern.push_back(a);
        return;
    }
    runs.push_back({{a}, BigInt(1)});
}

// Z <- Z (I + q E(w, l))
inline void right_multiply(IntMatrix& z, std::size_t w, std::size_t l, const BigInt& q) {
    for (std::size_t i = 0; i < z.rows(); ++i) z(i, l) += q * z(i, w);
}

// M <- (I + q E(t, s)) M for each (t, s); sources are never targets here.
inline void left_multiply(IntMatrix& m, const LiftedUpdate& u, const BigInt& q) {
    for (const auto& [t, s] : u.adds)
        for (std::size_t j = 0; j < m.cols(); ++j) m(t, j) += q * m(s, j);
}

} // namespace detail

template <class F>
struct ZorichBlock {
    Row row = Row::Top;
    Letter winner = 0;
    std::vector<ArrowRun> arrows;
    IntMatrix Z;
    IntMatrix lifted; // empty unless requested
    BigInt steps{0};
};

/// Maximal run of steps with the winner in the same row. Periodic stretches
/// (the labeled permutation returning to an earlier state) are skipped in
/// one go, so huge partial quotients cost O(d) work.
template <class F>
std::pair<InductionState<F>, ZorichBlock<F>> zorich_step(const InductionState<F>& start, bool lifted = false) {
    const std::size_t d = start.perm().size();
    ZorichBlock<F> block;
    block.row = winner_row(start.perm(), start.lengths); // throws Tie
    block.Z = IntMatrix::identity(d);
    if (lifted) block.lifted = IntMatrix::identity(2 * d);
    InductionState<F> state = start;

    struct Seen {
        LabeledPermutation labeled;
        F loser_sum;
        std::size_t arrow_index;
    };
    std::vector<Seen> seen;
    std::vector<Arrow> arrows;   // arrows since the last skip
    std::vector<LiftedUpdate> updates;
    F loser_sum(0);
    bool skipped = false;

    auto flush = [&]() {
        for (const auto& a : arrows) detail::append_arrow(block.arrows, a);
        arrows.clear();
        updates.clear();
    };

    for (;;) {
        Row r;
        try {
            r = winner_row(state.perm(), state.lengths);
        } catch (const Error&) {
            if (block.steps == 0) throw;
            break;
        }
        if (r != block.row) break;

        if (!skipped) {
            for (const auto& s : seen) {
                if (!(s.labeled == state.labeled)) continue;
                const F period = loser_sum - s.loser_sum;
                const auto w = static_cast<std::size_t>(state.perm().row(r).back());
                BigInt q = NumberTraits<F>::floor_div(state.lengths[w], period) - 1;
                if (q >= 1) {
                    std::vector<Arrow> pattern(arrows.begin() + static_cast<std::ptrdiff_t>(s.arrow_index), arrows.end());
                    std::vector<LiftedUpdate> pupd(updates.begin() + static_cast<std::ptrdiff_t>(s.arrow_index), updates.end());
                    flush();
                    block.arrows.push_back({pattern, q});
                    for (const auto& a : pattern)
                        detail::right_multiply(block.Z, static_cast<std::size_t>(a.winner),
                                               static_cast<std::size_t>(a.loser), q);
                    if (lifted)
                        for (const auto& u : pupd) detail::left_multiply(block.lifted, u, q);
                    state.lengths[w] = state.lengths[w] - F(q) * period;
                    block.steps += q * BigInt(pattern.size());
                }
                skipped = true;
                break;
            }
            if (!skipped) seen.push_back({state.labeled, loser_sum, arrows.size()});
        }

        StepResult<F> res;
        try {
            res = induction_step(state);
        } catch (const Error&) {
            if (block.steps == 0) throw;
            break;
        }
        const auto& a = res.move.arrow;
        loser_sum += state.lengths[static_cast<std::size_t>(a.loser)];
        block.winner = a.winner;
        arrows.push_back(a);
        updates.push_back(res.move.lifted);
        detail::right_multiply(block.Z, static_cast<std::size_t>(a.winner), static_cast<std::size_t>(a.loser), BigInt(1));
        if (lifted) detail::left_multiply(block.lifted, res.move.lifted, BigInt(1));
        block.steps += 1;
        state = std::move(res.next);
    }
    flush();
    return {std::move(state), std::move(block)};
}

template <class F>
std::pair<LinearInvolution<F>, ZorichBlock<F>> zorich_step(const LinearInvolution<F>& t) {
    auto [state, block] = zorich_step(InductionState<F>::from(t));
    return {state.involution(), std::move(block)};
}

// ---------------------------------------------------------------------------
// MMY acceleration.

template <class F>
struct MMYBlock {
    IntMatrix Z;
    IntMatrix lifted;
    std::vector<bool> winners; // letters winning inside the block
    Letter fixed_letter = 0;   // a letter that does not win inside the block
    std::vector<ArrowRun> arrows;
    std::size_t zorich_blocks = 0;
    BigInt steps{0};
};

/// Produces MMY blocks one at a time with one Zorich block of lookahead.
template <class F>
class MMYInducer {
public:
    explicit MMYInducer(InductionState<F> start, bool lifted = false, bool keep_arrows = true)
        : state_(std::move(start)), lifted_(lifted), keep_arrows_(keep_arrows) {}

    const InductionState<F>& state() const { return state_; }

    /// Next block, or nullopt when induction stops (error() then says why).
    std::optional<MMYBlock<F>> next() {
        const std::size_t d = state_.perm().size();
        MMYBlock<F> block;
        block.Z = IntMatrix::identity(d);
        if (lifted_) block.lifted = IntMatrix::identity(2 * d);
        block.winners.assign(d, false);
        std::size_t distinct = 0;
        InductionState<F> cursor = state_;
        for (;;) {
            if (!pending_) {
                try {
                    pending_ = zorich_step(cursor, lifted_);
                } catch (const Error& e) {
                    error_ = e.code();
                    error_message_ = e.what();
                    return std::nullopt;
                }
            }
            const auto& zb = pending_->second;
            const auto w = static_cast<std::size_t>(zb.winner);
            if (!block.winners[w] && distinct + 1 == d) break;
            if (!block.winners[w]) {
                block.winners[w] = true;
                ++distinct;
            }
            block.Z = block.Z * zb.Z;
            if (lifted_) block.lifted = zb.lifted * block.lifted;
            if (keep_arrows_)
                block.arrows.insert(block.arrows.end(), zb.arrows.begin(), zb.arrows.end());
            block.steps += zb.steps;
            ++block.zorich_blocks;
            cursor = std::move(pending_->first);
            pending_.reset();
        }
        for (std::size_t a = 0; a < d; ++a)
            if (!block.winners[a]) {
                block.fixed_letter = static_cast<Letter>(a);
                break;
            }
        state_ = std::move(cursor);
        return block;
    }

    std::optional<ErrorCode> error() const { return error_; }
    const std::string& error_message() const { return error_message_; }

private:
    InductionState<F> state_;
    bool lifted_;
    bool keep_arrows_;
    std::optional<std::pair<InductionState<F>, ZorichBlock<F>>> pending_;
    std::optional<ErrorCode> error_;
    std::string error_message_;
};

template <class F>
struct CocyclePath {
    std::vector<ArrowRun> arrows;
    std::vector<IntMatrix> Z;                 // Z[k-1] = Z(k)
    std::vector<IntMatrix> Q;                 // Q[k] = Q(k), Q[0] = I
    std::vector<IntMatrix> lifted;            // per block, if requested
    std::vector<std::vector<F>> lengths;      // lengths[k] = lambda^(k)
    std::vector<GeneralizedPermutation> perms; // pi^(k)
    std::vector<std::vector<bool>> winners_seen;
    std::vector<Letter> fixed_letters;        // per block
    std::vector<BigInt> steps;                // elementary steps per block
    std::optional<ErrorCode> error;           // set when the path stopped early

    std::size_t blocks() const { return Z.size(); }
    std::size_t dimension() const { return Q.empty() ? 0 : Q.front().rows(); }

    /// Q(k, l) = Z(k+1) ... Z(l).
    IntMatrix product(std::size_t k, std::size_t l) const {
        IntMatrix m = IntMatrix::identity(dimension());
        for (std::size_t i = k; i < l; ++i) m = m * Z[i];
        return m;
    }
    /// S(k, l) = transpose of Q(k, l).
    IntMatrix special(std::size_t k, std::size_t l) const { return product(k, l).transpose(); }
};

template <class F>
CocyclePath<F> mmy_accelerate(const LinearInvolution<F>& t, std::size_t k_max, bool lifted = false) {
    CocyclePath<F> path;
    const std::size_t d = t.permutation().size();
    path.Q.push_back(IntMatrix::identity(d));
    path.lengths.push_back(t.lengths());
    path.perms.push_back(t.permutation());
    MMYInducer<F> inducer(InductionState<F>::from(t), lifted);
    for (std::size_t k = 0; k < k_max; ++k) {
        auto block = inducer.next();
        if (!block) {
            path.error = inducer.error();
            break;
        }
        path.arrows.insert(path.arrows.end(), block->arrows.begin(), block->arrows.end());
        path.Q.push_back(path.Q.back() * block->Z);
        path.Z.push_back(std::move(block->Z));
        if (lifted) path.lifted.push_back(std::move(block->lifted));
        path.lengths.push_back(inducer.state().lengths);
        path.perms.push_back(inducer.state().perm());
        path.winners_seen.push_back(block->winners);
        path.fixed_letters.push_back(block->fixed_letter);
        path.steps.push_back(block->steps);
    }
    return path;
}

/// Streams MMY blocks to `visit(block, state_after)` until it returns false
/// or induction stops. Returns the number of blocks visited and the stop
/// reason, if any.
template <class F, class Visitor>
std::pair<std::size_t, std::optional<ErrorCode>> mmy_stream(const InductionState<F>& start, std::size_t k_max,
                                                            bool lifted, Visitor&& visit) {
    MMYInducer<F> inducer(start, lifted, false);
    std::size_t k = 0;
    for (; k < k_max; ++k) {
        auto block = inducer.next();
        if (!block) return {k, inducer.error()};
        if (!visit(*block, inducer.state())) return {k + 1, std::nullopt};
    }
    return {k, std::nullopt};
}

// ---------------------------------------------------------------------------
// Rauzy diagram and paths.

struct DiagramArrow {
    GeneralizedPermutation source;
    GeneralizedPermutation target;
    Arrow arrow;
};

struct DiagramEdge {
    std::size_t source = 0;
    std::size_t target = 0;
    Arrow arrow;
};

struct RauzyDiagram {
    std::vector<GeneralizedPermutation> vertices;
    std::vector<DiagramEdge> edges;
    std::map<std::string, std::size_t> index;

    std::vector<std::size_t> out_edges(std::size_t v) const {
        std::vector<std::size_t> out;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (edges[e].source == v) out.push_back(e);
        return out;
    }
    DiagramArrow arrow(std::size_t e) const {
        return {vertices[edges[e].source], vertices[edges[e].target], edges[e].arrow};
    }
};

/// Move of the given winner row if it is defined and stays irreducible.
inline std::optional<MoveResult> admissible_move(const GeneralizedPermutation& p, Row r) {
    try {
        auto m = rauzy_move(LabeledPermutation::from(p), r);
        if (!irreducibility_test(m.next.perm)) return std::nullopt;
        return m;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UndefinedMove || e.code() == ErrorCode::NotTwoToOne ||
            e.code() == ErrorCode::EmptyRow)
            return std::nullopt;
        throw;
    }
}

inline RauzyDiagram build_diagram(const GeneralizedPermutation& seed) {
    if (!irreducibility_test(seed)) throw Error(ErrorCode::Reducible, "seed is reducible", seed.key());
    RauzyDiagram g;
    std::deque<std::size_t> queue;
    g.vertices.push_back(seed);
    g.index[seed.key()] = 0;
    queue.push_back(0);
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        for (Row r : {Row::Top, Row::Bottom}) {
            auto m = admissible_move(g.vertices[v], r);
            if (!m) continue;
            const std::string key = m->next.perm.key();
            auto it = g.index.find(key);
            std::size_t target;
            if (it == g.index.end()) {
                target = g.vertices.size();
                g.vertices.push_back(m->next.perm);
                g.index[key] = target;
                queue.push_back(target);
            } else {
                target = it->second;
            }
            g.edges.push_back({v, target, m->arrow});
        }
    }
    return g;
}

struct PathProduct {
    IntMatrix Q;
    std::vector<BigInt> column_sums;
};

inline PathProduct path_product(const std::vector<DiagramArrow>& path, std::size_t d) {
    IntMatrix q = IntMatrix::identity(d);
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0 && !(path[i - 1].target == path[i].source))
            throw Error(ErrorCode::NonComposable, "consecutive arrows do not compose", std::to_string(i));
        detail::right_multiply(q, static_cast<std::size_t>(path[i].arrow.winner),
                               static_cast<std::size_t>(path[i].arrow.loser), BigInt(1));
    }
    return {q, q.column_sums()};
}

inline PathProduct path_product(const std::vector<DiagramArrow>& path) {
    if (path.empty()) throw Error(ErrorCode::InvalidInput, "empty path needs an explicit dimension");
    return path_product(path, path.front().source.size());
}

/// The first n arrows of the induction path of T.
template <class F>
std::vector<DiagramArrow> induction_path(const LinearInvolution<F>& t, std::size_t n) {
    std::vector<DiagramArrow> out;
    auto state = InductionState<F>::from(t);
    for (std::size_t k = 0; k < n; ++k) {
        auto res = induction_step(state);
        out.push_back({state.perm(), res.next.perm(), res.move.arrow});
        state = std::move(res.next);
    }
    return out;
}

/// The arrow out of p with the given winner row, if admissible.
inline std::optional<DiagramArrow> diagram_arrow(const GeneralizedPermutation& p, Row r) {
    auto m = admissible_move(p, r);
    if (!m) return std::nullopt;
    return DiagramArrow{p, m->next.perm, m->arrow};
}

struct VolumeFraction {
    std::optional<Rational> exact; // closed form, classical permutations only
    std::size_t dimension = 0;     // dimension of the normalized length polytope
};

/// vol(Delta(gamma)) / vol(Delta). For generalized permutations the closed
/// form does not apply; see estimate_volume_fraction in measure.hpp.
inline VolumeFraction simplex_volume_fraction(const GeneralizedPermutation& p, const std::vector<DiagramArrow>& path) {
    if (!path.empty() && !(path.front().source == p))
        throw Error(ErrorCode::NonComposable, "path does not start at the permutation", p.key());
    VolumeFraction v;
    const std::size_t d = p.size();
    v.dimension = p.is_classical() ? d - 1 : d - 2;
    if (!p.is_classical()) return v;
    auto prod = path_product(path, d);
    BigInt den(1);
    for (const auto& c : prod.column_sums) den *= c;
    v.exact = make_rational(BigInt(1), den);
    return v;
}

struct SegmentDecomposition {
    std::vector<std::pair<Letter, std::size_t>> segments; // maximal 1-segments
    std::size_t in_subset = 0;  // 1-segments whose name lies in A'
    std::size_t d_segments = 0; // greedy covering count by D-segments
};

/// 1-segments are maximal runs of a constant winner; a D-segment is a
/// stretch with at most D distinct names (D = |A'|).
inline SegmentDecomposition segment_decomposition(const std::vector<Letter>& winners, const std::set<Letter>& subset) {
    SegmentDecomposition out;
    for (auto w : winners) {
        if (!out.segments.empty() && out.segments.back().first == w) ++out.segments.back().second;
        else out.segments.push_back({w, 1});
    }
    for (const auto& [w, n] : out.segments)
        if (subset.count(w)) ++out.in_subset;
    const std::size_t D = std::max<std::size_t>(subset.size(), 1);
    std::set<Letter> names;
    for (auto w : winners) {
        if (!names.count(w) && names.size() == D) {
            ++out.d_segments;
            names.clear();
        }
        names.insert(w);
    }
    if (!names.empty()) ++out.d_segments;
    return out;
}

inline std::vector<Letter> winners_of(const std::vector<DiagramArrow>& path) {
    std::vector<Letter> w;
    for (const auto& a : path) w.push_back(a.arrow.winner);
    return w;
}

} // namespace linvol
