#pragma once

// Linear involutions T = f o T^ on X x {0,1}: level 0 carries the top row,
// level 1 the bottom row. T^ sends a slot onto its twin, by translation when
// the twin is in the other row and by reflection when it is in the same row;
// f(x, e) = (x, 1 - e).

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/genperm.hpp"

namespace linvol {

template <class F>
struct Point {
    F x;
    int level = 0;

    friend bool operator==(const Point& a, const Point& b) { return a.level == b.level && a.x == b.x; }
    friend bool operator<(const Point& a, const Point& b) {
        return a.level != b.level ? a.level < b.level : a.x < b.x;
    }
};

/// Affine branch x -> sign * x + offset on one slot.
template <class F>
struct Branch {
    int sign = 1;
    F offset;
};

template <class F>
class LinearInvolution {
public:
    LinearInvolution() = default;

    /// Lengths are indexed by letter. Throws NonPositiveLength or
    /// BalanceViolated.
    LinearInvolution(GeneralizedPermutation perm, std::vector<F> lengths)
        : perm_(std::move(perm)), lengths_(std::move(lengths)) {
        if (lengths_.size() != perm_.size())
            throw Error(ErrorCode::InvalidInput, "one length per letter required");
        for (std::size_t a = 0; a < lengths_.size(); ++a)
            if (!(lengths_[a] > F(0)))
                throw Error(ErrorCode::NonPositiveLength, "lengths must be positive", perm_.name(static_cast<Letter>(a)));
        F top(0), bottom(0);
        for (auto a : perm_.top()) top += lengths_[static_cast<std::size_t>(a)];
        for (auto a : perm_.bottom()) bottom += lengths_[static_cast<std::size_t>(a)];
        if (!(top == bottom))
            throw Error(ErrorCode::BalanceViolated, "top and bottom rows have different total length",
                        NumberTraits<F>::str(top) + " != " + NumberTraits<F>::str(bottom));
        total_ = top;
        const std::size_t n = perm_.slot_count();
        start_.resize(n);
        F acc(0);
        for (std::size_t i = 0; i < perm_.top_length(); ++i) {
            start_[i] = acc;
            acc += length_of_slot(i);
        }
        acc = F(0);
        for (std::size_t j = 0; j < perm_.bottom_length(); ++j) {
            start_[perm_.top_length() + j] = acc;
            acc += length_of_slot(perm_.top_length() + j);
        }
        branches_.resize(n);
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t t = perm_.twin(s);
            if (perm_.row_of(s) != perm_.row_of(t)) {
                branches_[s] = {1, start_[t] - start_[s]};
            } else {
                branches_[s] = {-1, start_[s] + start_[t] + length_of_slot(t)};
            }
        }
    }

    const GeneralizedPermutation& permutation() const { return perm_; }
    const std::vector<F>& lengths() const { return lengths_; }
    const F& total_length() const { return total_; }
    const F& slot_start(std::size_t s) const { return start_[s]; }
    F slot_end(std::size_t s) const { return start_[s] + length_of_slot(s); }
    const F& length_of_slot(std::size_t s) const { return lengths_[static_cast<std::size_t>(perm_.letter(s))]; }
    const Branch<F>& branch(std::size_t s) const { return branches_[s]; }

    /// Level of a point lying on slot s.
    static int level_of(Row r) { return r == Row::Top ? 0 : 1; }
    int level_of_slot(std::size_t s) const { return level_of(perm_.row_of(s)); }

    /// Slot containing a point, or nullopt when x is outside [0, |X|).
    std::optional<std::size_t> locate(const Point<F>& p) const {
        if (p.x < F(0) || !(p.x < total_)) return std::nullopt;
        Row r = p.level == 0 ? Row::Top : Row::Bottom;
        const std::size_t count = perm_.row(r).size();
        for (std::size_t pos = count; pos-- > 0;) {
            std::size_t s = perm_.slot(r, pos);
            if (!(p.x < start_[s])) return s;
        }
        return std::nullopt;
    }

    /// Interior breakpoint of a row (left end of a slot other than the first).
    bool is_singular(const Point<F>& p) const {
        Row r = p.level == 0 ? Row::Top : Row::Bottom;
        for (std::size_t pos = 1; pos < perm_.row(r).size(); ++pos)
            if (start_[perm_.slot(r, pos)] == p.x) return true;
        return false;
    }

    /// T^ without the singularity check (right-continuous at breakpoints).
    std::optional<Point<F>> involution_raw(const Point<F>& p) const {
        auto s = locate(p);
        if (!s) return std::nullopt;
        const auto& b = branches_[*s];
        F y = b.sign > 0 ? F(p.x + b.offset) : F(b.offset - p.x);
        return Point<F>{y, level_of_slot(perm_.twin(*s))};
    }

    Point<F> involution(const Point<F>& p) const {
        check_regular(p);
        return *involution_raw(p);
    }

    static Point<F> flip(const Point<F>& p) { return {p.x, 1 - p.level}; }

    /// T(p) = f(T^(p)).
    Point<F> apply(const Point<F>& p) const { return flip(involution(p)); }

    void check_regular(const Point<F>& p) const {
        if (!locate(p))
            throw Error(ErrorCode::InvalidInput, "point outside the domain", NumberTraits<F>::str(p.x));
        if (is_singular(p))
            throw Error(ErrorCode::SingularPoint, "point is an interval endpoint", NumberTraits<F>::str(p.x));
    }

    /// Singular points: interior breakpoints on both levels.
    std::vector<Point<F>> singularities() const {
        std::vector<Point<F>> out;
        for (Row r : {Row::Top, Row::Bottom})
            for (std::size_t pos = 1; pos < perm_.row(r).size(); ++pos)
                out.push_back({start_[perm_.slot(r, pos)], level_of(r)});
        return out;
    }

private:
    GeneralizedPermutation perm_;
    std::vector<F> lengths_;
    F total_{0};
    std::vector<F> start_;
    std::vector<Branch<F>> branches_;
};

template <class F>
LinearInvolution<F> build(const GeneralizedPermutation& p, const std::vector<F>& lengths) {
    return LinearInvolution<F>(p, lengths);
}

/// Rescales lengths so that |X| = 1.
template <class F>
std::vector<F> normalized(const GeneralizedPermutation& p, std::vector<F> lengths) {
    static_assert(NumberTraits<F>::is_field, "normalization needs division");
    F top(0);
    for (auto a : p.top()) top += lengths[static_cast<std::size_t>(a)];
    for (auto& x : lengths) x = x / top;
    return lengths;
}

template <class F>
struct OrbitStep {
    Point<F> point;
    std::size_t slot = 0;
};

template <class F>
struct Orbit {
    std::vector<OrbitStep<F>> steps;
    bool truncated = false;
    std::size_t truncation_index = 0; // index of the singular point when truncated
};

/// Exact forward orbit p, Tp, ..., T^{n-1}p; stops (flagged) at the first
/// singular point.
template <class F>
Orbit<F> orbit(const LinearInvolution<F>& t, Point<F> p, std::size_t n) {
    Orbit<F> out;
    out.steps.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (t.is_singular(p) || !t.locate(p)) {
            out.truncated = true;
            out.truncation_index = k;
            return out;
        }
        std::size_t s = *t.locate(p);
        out.steps.push_back({p, s});
        if (k + 1 < n) p = t.apply(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elementary Rauzy-Veech move.

struct Arrow {
    Letter winner = 0;
    Letter loser = 0;
    Row row = Row::Top; // row of the winner

    friend bool operator==(const Arrow& a, const Arrow& b) {
        return a.winner == b.winner && a.loser == b.loser && a.row == b.row;
    }
};

/// Permutation together with the lifted symbol (2 * letter + occurrence)
/// carried by each slot through successive moves.
struct LabeledPermutation {
    GeneralizedPermutation perm;
    std::vector<std::size_t> top_labels;
    std::vector<std::size_t> bottom_labels;

    static LabeledPermutation from(const GeneralizedPermutation& p) {
        LabeledPermutation lp{p, {}, {}};
        for (std::size_t s = 0; s < p.slot_count(); ++s)
            (p.row_of(s) == Row::Top ? lp.top_labels : lp.bottom_labels).push_back(lifted_symbol(p, s));
        return lp;
    }
    std::vector<std::size_t>& labels(Row r) { return r == Row::Top ? top_labels : bottom_labels; }
    const std::vector<std::size_t>& labels(Row r) const { return r == Row::Top ? top_labels : bottom_labels; }

    friend bool operator==(const LabeledPermutation& a, const LabeledPermutation& b) {
        return a.perm == b.perm && a.top_labels == b.top_labels && a.bottom_labels == b.bottom_labels;
    }
};

/// Effect of one move on functions of lifted symbols: new[target] =
/// old[target] + old[source] for both listed pairs, identity elsewhere.
struct LiftedUpdate {
    std::array<std::pair<std::size_t, std::size_t>, 2> adds; // (target, source)
};

struct MoveResult {
    LabeledPermutation next;
    Arrow arrow;
    LiftedUpdate lifted;
};

/// Combinatorial move where the last letter of `winner_row` wins. The loser
/// leaves the end of the other row and is reinserted next to the winner's
/// twin: after it when the twin sits in the loser's row, before it when the
/// twin shares the winner's row.
inline MoveResult rauzy_move(const LabeledPermutation& in, Row winner_row) {
    const Row loser_row = other(winner_row);
    const auto& p = in.perm;
    const Letter alpha = p.row(winner_row).back();
    const Letter beta = p.row(loser_row).back();
    if (alpha == beta)
        throw Error(ErrorCode::UndefinedMove, "the same letter ends both rows", p.key());
    std::vector<Letter> rows[2] = {p.top(), p.bottom()};
    std::vector<std::size_t> labels[2] = {in.top_labels, in.bottom_labels};
    auto& wrow = rows[static_cast<int>(winner_row)];
    auto& lrow = rows[static_cast<int>(loser_row)];
    auto& wlab = labels[static_cast<int>(winner_row)];
    auto& llab = labels[static_cast<int>(loser_row)];

    const std::size_t alpha_end_label = wlab.back();
    const std::size_t moved_label = llab.back();
    lrow.pop_back();
    llab.pop_back();
    if (lrow.empty()) throw Error(ErrorCode::UndefinedMove, "move empties a row", p.key());

    // the winner's twin is its other occurrence
    std::size_t twin_label = 0;
    auto in_loser = std::find(lrow.begin(), lrow.end(), alpha);
    if (in_loser != lrow.end()) {
        auto pos = static_cast<std::size_t>(in_loser - lrow.begin());
        twin_label = llab[pos];
        lrow.insert(lrow.begin() + static_cast<std::ptrdiff_t>(pos + 1), beta);
        llab.insert(llab.begin() + static_cast<std::ptrdiff_t>(pos + 1), moved_label);
    } else {
        auto pos = static_cast<std::size_t>(std::find(wrow.begin(), wrow.end() - 1, alpha) - wrow.begin());
        twin_label = wlab[pos];
        wrow.insert(wrow.begin() + static_cast<std::ptrdiff_t>(pos), beta);
        wlab.insert(wlab.begin() + static_cast<std::ptrdiff_t>(pos), moved_label);
    }
    // beta's surviving occurrence
    std::size_t other_beta_label = moved_label ^ 1U;

    MoveResult r{LabeledPermutation{GeneralizedPermutation(p.names(), rows[0], rows[1]), labels[0], labels[1]},
                 Arrow{alpha, beta, winner_row},
                 LiftedUpdate{{std::pair{other_beta_label, alpha_end_label}, std::pair{moved_label, twin_label}}}};
    return r;
}

inline GeneralizedPermutation rauzy_move(const GeneralizedPermutation& p, Row winner_row) {
    return rauzy_move(LabeledPermutation::from(p), winner_row).next.perm;
}

/// Row whose last interval is longer; throws Tie on equality.
template <class F>
Row winner_row(const GeneralizedPermutation& p, const std::vector<F>& lengths) {
    const auto& top_len = lengths[static_cast<std::size_t>(p.top().back())];
    const auto& bot_len = lengths[static_cast<std::size_t>(p.bottom().back())];
    if (top_len == bot_len) throw Error(ErrorCode::Tie, "rightmost intervals have equal length", p.key());
    return top_len > bot_len ? Row::Top : Row::Bottom;
}

template <class F>
struct InductionState {
    LabeledPermutation labeled;
    std::vector<F> lengths;

    const GeneralizedPermutation& perm() const { return labeled.perm; }

    static InductionState from(const LinearInvolution<F>& t) {
        return {LabeledPermutation::from(t.permutation()), t.lengths()};
    }
    LinearInvolution<F> involution() const { return LinearInvolution<F>(labeled.perm, lengths); }
};

template <class F>
struct StepResult {
    InductionState<F> next;
    MoveResult move;
};

/// One Rauzy-Veech step: lambda = B lambda' with B = I + E(winner, loser).
template <class F>
StepResult<F> induction_step(const InductionState<F>& state) {
    Row r = winner_row(state.perm(), state.lengths);
    MoveResult move = rauzy_move(state.labeled, r);
    std::vector<F> lengths = state.lengths;
    auto w = static_cast<std::size_t>(move.arrow.winner);
    auto l = static_cast<std::size_t>(move.arrow.loser);
    lengths[w] = lengths[w] - lengths[l];
    return {InductionState<F>{move.next, std::move(lengths)}, move};
}

// ---------------------------------------------------------------------------
// Keane check and singular orbit sets.

template <class F>
struct SingularOrbits {
    std::vector<Point<F>> d0; // T^^{-k}(Sing), k <= depth
    std::vector<Point<F>> d1; // T^^{k}(f(Sing)), k <= depth
    std::size_t depth = 0;
};

template <class F>
struct KeaneResult {
    bool pass = true;
    std::size_t step = 0; // 1-based step of the tie when failing
    std::size_t slot = 0; // top-row slot ending the row at the tie
    SingularOrbits<F> orbits;
};

template <class F>
SingularOrbits<F> singular_orbits(const LinearInvolution<F>& t, std::size_t depth) {
    SingularOrbits<F> out;
    out.depth = depth;
    auto collect = [&](std::vector<Point<F>> seeds) {
        std::set<Point<F>> seen;
        for (auto p : seeds) {
            for (std::size_t k = 0; k <= depth; ++k) {
                if (!seen.insert(p).second && k > 0) break;
                auto q = t.involution_raw(p);
                if (!q) break;
                p = *q;
            }
        }
        return std::vector<Point<F>>(seen.begin(), seen.end());
    };
    auto sing = t.singularities();
    // T^ is an involution, so backward and forward iterates coincide.
    out.d0 = collect(sing);
    std::vector<Point<F>> flipped;
    for (const auto& s : sing) flipped.push_back(LinearInvolution<F>::flip(s));
    out.d1 = collect(flipped);
    return out;
}

/// Passes iff induction runs `depth` steps without a tie.
template <class F>
KeaneResult<F> keane_check(const LinearInvolution<F>& t, std::size_t depth) {
    KeaneResult<F> res;
    res.orbits = singular_orbits(t, depth);
    auto state = InductionState<F>::from(t);
    for (std::size_t k = 1; k <= depth; ++k) {
        try {
            state = induction_step(state).next;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Tie && e.code() != ErrorCode::UndefinedMove) throw;
            res.pass = false;
            res.step = k;
            res.slot = state.perm().top_length() - 1;
            return res;
        }
    }
    return res;
}

} // namespace linvol
