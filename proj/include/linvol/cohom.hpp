#pragma once

// Cohomological equation Psi - Psi o T = Phi - chi for piecewise smooth Phi.
//
// Functions live on the 2d slots of the two-level domain, as piecewise
// polynomials in the absolute coordinate x. Phi agrees with the involution
// when Phi o T^ = sigma Phi with a sign sigma per letter; the equation then
// forces Psi o f = -sigma Psi, since f o T = T^.
//
// Special Birkhoff sums are carried through elementary induction steps
// exactly. A step removes the loser's last slot and the winner's tail, and
// the returns that passed through them become two-step composites, so the
// set of interior breakpoints is transported, never duplicated.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/involution.hpp"
#include "linvol/lp.hpp"
#include "linvol/rauzy.hpp"
#include "linvol/realla.hpp"
#include "linvol/roth.hpp"

namespace linvol {

template <class F>
struct Poly {
    std::vector<F> c; // c[i] x^i

    Poly() = default;
    explicit Poly(std::vector<F> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly constant(const F& v) { return Poly(std::vector<F>{v}); }

    std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }
    bool is_zero() const { return c.empty(); }

    F operator()(const F& x) const {
        F r(0);
        for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
        return r;
    }
    double at(double x) const {
        double r = 0;
        for (std::size_t i = c.size(); i-- > 0;) r = r * x + to_double(c[i]);
        return r;
    }

    Poly derivative() const {
        std::vector<F> d;
        for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * F(BigInt(static_cast<long>(i))));
        return Poly(std::move(d));
    }
    /// Antiderivative vanishing at 0.
    Poly antiderivative() const {
        std::vector<F> d{F(0)};
        for (std::size_t i = 0; i < c.size(); ++i) d.push_back(c[i] / F(BigInt(static_cast<long>(i + 1))));
        return Poly(std::move(d));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<F> r(std::max(a.c.size(), b.c.size()), F(0));
        for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
        for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
        return Poly(std::move(r));
    }
    friend Poly operator*(const F& s, const Poly& p) {
        std::vector<F> r;
        for (const auto& x : p.c) r.push_back(s * x);
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + F(-1) * b; }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }

    /// x -> P(a x + b).
    Poly compose(const F& a, const F& b) const {
        Poly r;
        const Poly lin(std::vector<F>{b, a});
        for (std::size_t i = c.size(); i-- > 0;) r = r.times(lin) + constant(c[i]);
        return r;
    }

private:
    Poly times(const Poly& o) const {
        if (is_zero() || o.is_zero()) return Poly();
        std::vector<F> r(c.size() + o.c.size() - 1, F(0));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
        return Poly(std::move(r));
    }
    void trim() {
        while (!c.empty() && c.back() == F(0)) c.pop_back();
    }
};

namespace detail {

/// Roots of a real polynomial in (a, b), by recursion on the derivative
/// and bisection on monotone pieces. Degree is at most a handful.
inline std::vector<double> real_roots(const std::vector<double>& c, double a, double b) {
    std::size_t n = c.size();
    while (n > 0 && c[n - 1] == 0) --n;
    if (n <= 1) return {};
    auto eval = [&](double x) {
        double r = 0;
        for (std::size_t i = n; i-- > 0;) r = r * x + c[i];
        return r;
    };
    std::vector<double> d;
    for (std::size_t i = 1; i < n; ++i) d.push_back(c[i] * static_cast<double>(i));
    std::vector<double> marks{a};
    for (double r : real_roots(d, a, b)) marks.push_back(r);
    marks.push_back(b);
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        double lo = marks[i], hi = marks[i + 1];
        double flo = eval(lo), fhi = eval(hi);
        if (flo == 0 && i > 0) continue;
        if ((flo < 0) == (fhi < 0) || fhi == 0) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++it) {
            double mid = 0.5 * (lo + hi);
            if ((eval(mid) < 0) == (flo < 0)) lo = mid;
            else hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

template <class F>
std::vector<double> to_doubles(const Poly<F>& p) {
    std::vector<double> r;
    for (const auto& x : p.c) r.push_back(to_double(x));
    return r;
}

} // namespace detail

/// Piecewise polynomial on [lo, hi) with sorted interior cuts.
template <class F>
struct PiecewisePoly {
    F lo, hi;
    std::vector<F> cuts;
    std::vector<Poly<F>> pieces; // pieces.size() == cuts.size() + 1

    static PiecewisePoly single(F a, F b, Poly<F> p) { return {std::move(a), std::move(b), {}, {std::move(p)}}; }

    std::size_t piece_index(const F& x) const {
        return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
    }
    F operator()(const F& x) const { return pieces[piece_index(x)](x); }

    F piece_lo(std::size_t i) const { return i == 0 ? lo : cuts[i - 1]; }
    F piece_hi(std::size_t i) const { return i == cuts.size() ? hi : cuts[i]; }

    /// Restriction to [a, b) inside [lo, hi).
    PiecewisePoly restrict(const F& a, const F& b) const {
        PiecewisePoly r{a, b, {}, {}};
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (!(piece_lo(i) < b) || !(a < piece_hi(i))) continue;
            if (!r.pieces.empty()) r.cuts.push_back(piece_lo(i));
            r.pieces.push_back(pieces[i]);
        }
        return r;
    }

    /// Sum on a common domain.
    friend PiecewisePoly operator+(const PiecewisePoly& x, const PiecewisePoly& y) {
        PiecewisePoly r{x.lo, x.hi, {}, {}};
        std::vector<F> all = x.cuts;
        all.insert(all.end(), y.cuts.begin(), y.cuts.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        F left = x.lo;
        for (std::size_t i = 0; i <= all.size(); ++i) {
            F right = i == all.size() ? x.hi : all[i];
            F probe = left; // pieces are right-continuous: sample at the left end
            r.pieces.push_back(x.pieces[x.piece_index(probe)] + y.pieces[y.piece_index(probe)]);
            if (i < all.size()) r.cuts.push_back(all[i]);
            left = right;
        }
        return r;
    }

    /// g(x) = this(sign x + offset) on [a, b); the image must lie in [lo, hi].
    PiecewisePoly pullback(int sign, const F& offset, const F& a, const F& b) const {
        const F s{static_cast<long long>(sign)};
        F u = s * a + offset, v = s * b + offset;
        if (v < u) std::swap(u, v);
        PiecewisePoly r{a, b, {}, {}};
        std::vector<std::pair<F, Poly<F>>> parts; // (left end in x, poly)
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            F plo = piece_lo(i), phi = piece_hi(i);
            if (!(plo < v) || !(u < phi)) continue;
            F xa = (std::max(plo, u) - offset) * s, xb = (std::min(phi, v) - offset) * s;
            parts.push_back({std::min(xa, xb), pieces[i].compose(s, offset)});
        }
        std::sort(parts.begin(), parts.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i > 0) r.cuts.push_back(parts[i].first);
            r.pieces.push_back(parts[i].second);
        }
        return r;
    }

    F integral() const {
        F total(0);
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            auto a = pieces[i].antiderivative();
            total += a(piece_hi(i)) - a(piece_lo(i));
        }
        return total;
    }

    /// Total variation of the derivative: int |P''| on pieces plus the
    /// derivative jumps at interior cuts.
    double derivative_variation() const {
        double v = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const auto d1 = pieces[i].derivative();
            const double a = to_double(piece_lo(i)), b = to_double(piece_hi(i));
            std::vector<double> marks{a};
            for (double r : detail::real_roots(detail::to_doubles(d1.derivative()), a, b)) marks.push_back(r);
            marks.push_back(b);
            for (std::size_t j = 0; j + 1 < marks.size(); ++j) v += std::abs(d1.at(marks[j + 1]) - d1.at(marks[j]));
            if (i > 0) v += std::abs(to_double(d1(cuts[i - 1]) - pieces[i - 1].derivative()(cuts[i - 1])));
        }
        return v;
    }

    double sup_norm() const {
        double s = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const double a = to_double(piece_lo(i)), b = to_double(piece_hi(i));
            s = std::max({s, std::abs(pieces[i].at(a)), std::abs(pieces[i].at(b))});
            for (double r : detail::real_roots(detail::to_doubles(pieces[i].derivative()), a, b))
                s = std::max(s, std::abs(pieces[i].at(r)));
        }
        return s;
    }

    double derivative_sup() const {
        double s = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            PiecewisePoly one = single(piece_lo(i), piece_hi(i), pieces[i].derivative());
            s = std::max(s, one.sup_norm());
        }
        return s;
    }

    std::size_t max_degree() const {
        std::size_t d = 0;
        for (const auto& p : pieces) d = std::max(d, p.degree());
        return d;
    }
};

/// Function on the slots of a linear involution.
template <class F>
struct PiecewiseFunction {
    GeneralizedPermutation perm;
    std::vector<F> lengths;
    std::vector<int> signs;                // per letter: Phi o T^ = sign * Phi
    std::vector<PiecewisePoly<F>> slots;   // absolute coordinate
    F subtracted_mean{0};                  // constant removed to get integral zero

    std::size_t dimension() const { return perm.size(); }

    F operator()(const LinearInvolution<F>& t, const Point<F>& p) const {
        auto s = t.locate(p);
        if (!s || t.is_singular(p)) throw Error(ErrorCode::SingularPoint, "function evaluated at a singularity");
        return slots[*s](p.x);
    }

    F integral() const {
        F total(0);
        for (const auto& s : slots) total += s.integral();
        return total;
    }
    double sup_norm() const {
        double s = 0;
        for (const auto& x : slots) s = std::max(s, x.sup_norm());
        return s;
    }
    double derivative_variation() const {
        double v = 0;
        for (const auto& x : slots) v += x.derivative_variation();
        return v;
    }

    friend PiecewiseFunction operator+(const PiecewiseFunction& a, const PiecewiseFunction& b) {
        PiecewiseFunction r = a;
        for (std::size_t s = 0; s < r.slots.size(); ++s) r.slots[s] = a.slots[s] + b.slots[s];
        r.subtracted_mean = a.subtracted_mean + b.subtracted_mean;
        return r;
    }
    friend PiecewiseFunction operator*(const F& k, const PiecewiseFunction& a) {
        PiecewiseFunction r = a;
        for (auto& s : r.slots)
            for (auto& p : s.pieces) p = k * p;
        r.subtracted_mean = k * a.subtracted_mean;
        return r;
    }
};

/// Per-letter data. Polynomials are in the local coordinate u in [0, lambda)
/// of the letter's first occurrence; piecewise-linear data gives breakpoints
/// as fractions of lambda (first 0, last 1) and the values there.
template <class F>
struct LetterSpec {
    enum class Kind { Poly, PiecewiseLinear };
    std::string letter;
    Kind kind = Kind::Poly;
    std::vector<F> coeffs;
    std::vector<F> breakpoints;
    std::vector<F> values;
};

namespace detail {

/// Local data on [0, lambda) transported to both slots of a letter.
template <class F>
void place_letter(const LinearInvolution<F>& t, Letter a, const PiecewisePoly<F>& local, int sign,
                  std::vector<PiecewisePoly<F>>& slots) {
    const auto& p = t.permutation();
    auto [s, u] = p.occurrences(a);
    // first occurrence: x = start_s + local
    slots[s] = local.pullback(1, F(0) - t.slot_start(s), t.slot_start(s), t.slot_end(s));
    // twin: y -> T^(y) lands in s; value sign * Phi(T^ y)
    const auto& b = t.branch(u);
    auto twin = slots[s].pullback(b.sign, b.offset, t.slot_start(u), t.slot_end(u));
    if (sign < 0)
        for (auto& q : twin.pieces) q = F(-1) * q;
    slots[u] = twin;
}

template <class F>
void center(const LinearInvolution<F>& t, PiecewiseFunction<F>& f) {
    F total = f.integral();
    if (total == F(0)) return;
    F weight(0);
    const auto& p = t.permutation();
    for (std::size_t s = 0; s < p.slot_count(); ++s)
        if (f.signs[static_cast<std::size_t>(p.letter(s))] > 0) weight += t.length_of_slot(s);
    if (weight == F(0)) throw Error(ErrorCode::InvalidInput, "cannot center a function with only opposite-sign letters");
    F c = total / weight;
    for (std::size_t s = 0; s < p.slot_count(); ++s)
        if (f.signs[static_cast<std::size_t>(p.letter(s))] > 0)
            for (auto& q : f.slots[s].pieces) q = q - Poly<F>::constant(c);
    f.subtracted_mean += c;
}

} // namespace detail

/// Builds Phi from per-letter specs; missing letters are zero. The result
/// is shifted to integral zero and the shift recorded.
template <class F>
PiecewiseFunction<F> make_function(const LinearInvolution<F>& t, const std::vector<LetterSpec<F>>& specs,
                                   std::vector<int> signs = {}) {
    const auto& p = t.permutation();
    const std::size_t d = p.size();
    if (signs.empty()) signs.assign(d, 1);
    if (signs.size() != d) throw Error(ErrorCode::InvalidInput, "one sign per letter expected");
    PiecewiseFunction<F> f{p, t.lengths(), signs, std::vector<PiecewisePoly<F>>(p.slot_count()), F(0)};
    std::vector<bool> seen(d, false);
    for (const auto& spec : specs) {
        auto it = std::find(p.names().begin(), p.names().end(), spec.letter);
        std::optional<Letter> a;
        if (it != p.names().end()) a = static_cast<Letter>(it - p.names().begin());
        if (!a) throw Error(ErrorCode::InvalidInput, "unknown letter", spec.letter);
        const auto ai = static_cast<std::size_t>(*a);
        const F lambda = t.lengths()[ai];
        PiecewisePoly<F> local;
        if (spec.kind == LetterSpec<F>::Kind::Poly) {
            if (spec.coeffs.size() > 6) throw Error(ErrorCode::UnsupportedRepresentation, "degree above 5", spec.letter);
            local = PiecewisePoly<F>::single(F(0), lambda, Poly<F>(spec.coeffs));
        } else {
            const auto& bp = spec.breakpoints;
            if (bp.size() < 2 || bp.size() != spec.values.size() || bp.front() != F(0) || bp.back() != F(1))
                throw Error(ErrorCode::UnsupportedRepresentation, "breakpoints must run from 0 to 1 with one value each", spec.letter);
            local.lo = F(0);
            local.hi = lambda;
            for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
                if (!(bp[i] < bp[i + 1])) throw Error(ErrorCode::UnsupportedRepresentation, "breakpoints must increase", spec.letter);
                F x0 = bp[i] * lambda, x1 = bp[i + 1] * lambda;
                F slope = (spec.values[i + 1] - spec.values[i]) / (x1 - x0);
                local.pieces.push_back(Poly<F>(std::vector<F>{spec.values[i] - slope * x0, slope}));
                if (i > 0) local.cuts.push_back(x0);
            }
        }
        detail::place_letter(t, *a, local, signs[ai], f.slots);
        seen[ai] = true;
    }
    for (std::size_t a = 0; a < d; ++a)
        if (!seen[a])
            detail::place_letter(t, static_cast<Letter>(a),
                                 PiecewisePoly<F>::single(F(0), t.lengths()[a], Poly<F>()), signs[a], f.slots);
    detail::center(t, f);
    return f;
}

/// Piecewise constant element of Gamma: value phi_a on both slots of a.
template <class F, class V>
PiecewiseFunction<F> constant_function(const LinearInvolution<F>& t, const std::vector<V>& phi) {
    std::vector<LetterSpec<F>> specs;
    for (std::size_t a = 0; a < phi.size(); ++a)
        specs.push_back({t.permutation().name(static_cast<Letter>(a)), LetterSpec<F>::Kind::Poly, {F(phi[a])}, {}, {}});
    return make_function(t, specs);
}

/// Psi with Psi(x, 0) = g(x), Psi(x, 1) = -sigma g(x), for g on [0, |X|).
template <class F>
PiecewiseFunction<F> level_function(const LinearInvolution<F>& t, const PiecewisePoly<F>& g, int sigma = 1) {
    const auto& p = t.permutation();
    PiecewiseFunction<F> f{p, t.lengths(), std::vector<int>(p.size(), sigma), {}, F(0)};
    for (std::size_t s = 0; s < p.slot_count(); ++s) {
        auto piece = g.restrict(t.slot_start(s), t.slot_end(s));
        if (t.level_of_slot(s) == 1 && sigma > 0)
            for (auto& q : piece.pieces) q = F(-1) * q;
        f.slots.push_back(piece);
    }
    return f;
}

namespace detail {

/// One level of a function as a single piecewise polynomial on [0, |X|).
template <class F>
PiecewisePoly<F> level_concat(const LinearInvolution<F>& t, const std::vector<PiecewisePoly<F>>& slots, int level) {
    const auto& p = t.permutation();
    PiecewisePoly<F> r{F(0), t.total_length(), {}, {}};
    const Row row = level == 0 ? Row::Top : Row::Bottom;
    for (std::size_t pos = 0; pos < p.row(row).size(); ++pos) {
        std::size_t s = p.slot(row, pos);
        if (pos > 0) r.cuts.push_back(t.slot_start(s));
        for (std::size_t i = 0; i < slots[s].pieces.size(); ++i) {
            if (i > 0) r.cuts.push_back(slots[s].cuts[i - 1]);
            r.pieces.push_back(slots[s].pieces[i]);
        }
    }
    return r;
}

/// h o T on slot s, where T = f o T^.
template <class F>
PiecewisePoly<F> compose_with_map(const LinearInvolution<F>& t, const std::vector<PiecewisePoly<F>>& h,
                                  std::size_t s) {
    const auto& p = t.permutation();
    const int target = 1 - t.level_of_slot(p.twin(s));
    const auto& b = t.branch(s);
    return level_concat(t, h, target).pullback(b.sign, b.offset, t.slot_start(s), t.slot_end(s));
}

} // namespace detail

/// Psi - Psi o T, slot by slot. `psi.signs` holds the sign sigma of the
/// resulting Phi (Psi itself satisfies Psi o f = -sigma Psi).
template <class F>
PiecewiseFunction<F> coboundary(const LinearInvolution<F>& t, const PiecewiseFunction<F>& psi) {
    PiecewiseFunction<F> r = psi;
    for (std::size_t s = 0; s < psi.slots.size(); ++s)
        r.slots[s] = psi.slots[s] + F(-1) * detail::compose_with_map(t, psi.slots, s);
    r.subtracted_mean = F(0);
    return r;
}

template <class F>
PiecewisePoly<F> operator*(const F& k, const PiecewisePoly<F>& a) {
    PiecewisePoly<F> r = a;
    for (auto& p : r.pieces) p = k * p;
    return r;
}

/// Largest |Phi(T^ x) - sign Phi(x)| over midpoints of the pieces of every
/// slot; zero when Phi agrees with the involution.
template <class F>
F agreement_defect(const LinearInvolution<F>& t, const PiecewiseFunction<F>& f) {
    const auto& p = t.permutation();
    F worst(0);
    for (std::size_t s = 0; s < p.slot_count(); ++s) {
        const auto& slot = f.slots[s];
        for (std::size_t i = 0; i < slot.pieces.size(); ++i) {
            F x = (slot.piece_lo(i) + slot.piece_hi(i)) / F(BigInt(2));
            auto image = t.involution({x, t.level_of_slot(s)});
            F a = f.slots[p.twin(s)](image.x) - F(BigInt(f.signs[static_cast<std::size_t>(p.letter(s))])) * slot(x);
            if (a < F(0)) a = F(0) - a;
            if (a > worst) worst = a;
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Special Birkhoff sums.

template <class F>
struct SpecialSums {
    std::size_t level = 0;                 // MMY block index
    BigInt steps{0};                       // elementary steps from level 0
    InductionState<F> state;
    std::vector<PiecewisePoly<F>> slots;   // return sums on level-k slots

    LinearInvolution<F> involution() const { return state.involution(); }

    /// Value at the midpoint of every slot.
    std::vector<F> slot_midpoints() const {
        auto t = involution();
        std::vector<F> out;
        for (std::size_t s = 0; s < slots.size(); ++s) out.push_back(slots[s]((t.slot_start(s) + t.slot_end(s)) / F(BigInt(2))));
        return out;
    }
    /// Midpoint value on the first occurrence of every letter.
    std::vector<F> midpoints() const {
        auto t = involution();
        const auto& p = t.permutation();
        std::vector<F> out;
        for (std::size_t a = 0; a < p.size(); ++a) {
            std::size_t s = p.occurrences(static_cast<Letter>(a)).first;
            out.push_back(slots[s]((t.slot_start(s) + t.slot_end(s)) / F(BigInt(2))));
        }
        return out;
    }
    /// Bound on |S(x) - S(midpoint)| over each slot: sup |S'| * half-length.
    double rigor_bound() const {
        auto t = involution();
        double b = 0;
        for (std::size_t s = 0; s < slots.size(); ++s)
            b = std::max(b, slots[s].derivative_sup() * to_double(t.length_of_slot(s)) / 2);
        return b;
    }
    double derivative_variation() const {
        double v = 0;
        for (const auto& s : slots) v += s.derivative_variation();
        return v;
    }
};

/// Carries special Birkhoff sums of Phi along the induction.
template <class F>
class SpecialSumTracker {
public:
    SpecialSumTracker(const LinearInvolution<F>& t, const PiecewiseFunction<F>& phi, BigInt max_steps = BigInt(10000000))
        : max_steps_(std::move(max_steps)) {
        sums_.state = InductionState<F>::from(t);
        sums_.slots = phi.slots;
    }

    const SpecialSums<F>& current() const { return sums_; }

    /// One elementary Rauzy-Veech step.
    void step() {
        if (sums_.steps >= max_steps_) throw Error(ErrorCode::NotConverged, "elementary step budget exhausted");
        const auto old = sums_.state.involution();
        const auto& p = old.permutation();
        auto r = induction_step(sums_.state);
        const Row wr = r.move.arrow.row, lr = other(wr);
        const std::size_t alpha_end = p.slot(wr, p.row(wr).size() - 1);
        const std::size_t beta_end = p.slot(lr, p.row(lr).size() - 1);
        const std::size_t alpha_twin = p.twin(alpha_end), beta_twin = p.twin(beta_end);
        const Letter beta = p.letter(beta_end);
        const auto neu = r.next.involution();
        const auto& np = neu.permutation();
        std::vector<PiecewisePoly<F>> slots(np.slot_count());
        for (std::size_t s = 0; s < np.slot_count(); ++s) {
            const F a = neu.slot_start(s), b = neu.slot_end(s);
            auto old_slot = *old.locate({(a + b) / F(BigInt(2)), neu.level_of_slot(s)});
            auto part = sums_.slots[old_slot].restrict(a, b);
            if (old_slot == beta_twin) {
                slots[s] = part + detail::compose_with_map(old, sums_.slots, old_slot).restrict(a, b);
            } else if (old_slot == alpha_twin && np.letter(s) == beta) {
                // carved from the winner's twin: T lands in the loser's last slot
                const auto& br = old.branch(old_slot);
                auto tail = sums_.slots[beta_end].pullback(br.sign, br.offset, a, b);
                slots[s] = part + tail;
            } else {
                slots[s] = part;
            }
        }
        sums_.state = std::move(r.next);
        sums_.slots = std::move(slots);
        sums_.steps += 1;
    }

    void advance(const BigInt& n) {
        for (BigInt i(0); i < n; ++i) step();
    }

    /// Advances to the end of MMY block k+1 of `path`, given the tracker
    /// sits at the end of block k.
    void advance_block(const CocyclePath<F>& path) {
        if (sums_.level >= path.blocks()) throw Error(ErrorCode::TooFewBlocks, "path has no further block");
        advance(path.steps[sums_.level]);
        ++sums_.level;
    }

private:
    SpecialSums<F> sums_;
    BigInt max_steps_;
};

/// Special sums at MMY level k along `path`.
template <class F>
SpecialSums<F> special_birkhoff_sum(const LinearInvolution<F>& t, const PiecewiseFunction<F>& phi,
                                    const CocyclePath<F>& path, std::size_t k) {
    if (k > path.blocks()) throw Error(ErrorCode::TooFewBlocks, "path too short", std::to_string(k));
    SpecialSumTracker<F> tracker(t, phi);
    for (std::size_t i = 0; i < k; ++i) tracker.advance_block(path);
    return tracker.current();
}

// ---------------------------------------------------------------------------
// Solver.

struct SolveConfig {
    std::size_t horizon = 30;
    double tol = 1e-3;                 // allowed change of chi between K/2 and K
    bool require_diagnostics = true;   // refuse when the Roth verdicts are negative
    RothConfig roth;                   // its horizon is replaced by `horizon`
    std::size_t orbit_length = 100000;
};

template <class F>
struct OrbitSample {
    Point<F> point;
    F psi;
};

template <class F>
struct Solution {
    std::vector<Rational> chi;                      // minimal norm modulo the stable estimate
    std::vector<Rational> chi_lp;                   // raw minimizer
    std::vector<double> chi_half;                   // same at horizon K/2
    double convergence_gap = 0;                     // max |chi - chi_half|
    double lp_value = 0;                            // optimal max midpoint sum
    std::vector<std::vector<double>> stable_basis;  // orthonormal, level 0
    std::vector<OrbitSample<F>> orbit;              // Psi along the base orbit
    double bound = 0;                               // sup |Psi| on the orbit
    std::size_t horizon = 0;
    F subtracted_mean{0};
};

namespace detail {

/// Chebyshev fit: min t with |m_k - S(0,k) chi| <= t letterwise for k <= K
/// and I_0(chi) = integral(Phi) / 2; then minimal l1 norm among minimizers.
template <class F>
std::pair<std::vector<Real>, Real> chebyshev_chi(const CocyclePath<F>& path, const std::vector<std::vector<F>>& samples,
                                                 const F& integral, std::size_t K) {
    const std::size_t d = path.dimension();
    const std::size_t n = 2 * d + 1;
    lp::Problem<Real> prob;
    prob.num_vars = n;
    prob.objective.assign(n, Real(0));
    prob.objective[2 * d] = 1;
    for (std::size_t k = 0; k <= K; ++k)
        for (std::size_t a = 0; a < d; ++a) {
            std::vector<Real> row(n, Real(0)), neg(n, Real(0));
            for (std::size_t b = 0; b < d; ++b) {
                Real q = to_real(path.Q[k](b, a));
                row[b] = q;
                row[d + b] = -q;
                neg[b] = -q;
                neg[d + b] = q;
            }
            row[2 * d] = -1;
            neg[2 * d] = -1;
            Real m = to_real(samples[k][a]);
            prob.constraints.push_back({row, lp::Relation::LessEq, m});
            prob.constraints.push_back({neg, lp::Relation::LessEq, -m});
        }
    std::vector<Real> mean(n, Real(0));
    for (std::size_t a = 0; a < d; ++a) {
        mean[a] = to_real(path.lengths[0][a]);
        mean[d + a] = -mean[a];
    }
    prob.constraints.push_back({mean, lp::Relation::Equal, to_real(integral) / 2});
    const Real eps = pow(Real(2), -static_cast<int>(Real::default_precision() * 3.32 / 2));
    auto first = lp::solve(prob, eps);
    if (first.status != lp::Status::Optimal) throw Error(ErrorCode::NotConverged, "Chebyshev fit failed");
    const Real t = first.value;
    // tie-break: minimal l1 norm with t pinned
    auto second = prob;
    second.objective.assign(n, Real(1));
    second.objective[2 * d] = 0;
    std::vector<Real> pin(n, Real(0));
    pin[2 * d] = 1;
    second.constraints.push_back({pin, lp::Relation::LessEq, t * (1 + eps) + eps});
    auto tie = lp::solve(second, eps);
    const auto& x = tie.status == lp::Status::Optimal ? tie.x : first.x;
    std::vector<Real> chi(d);
    for (std::size_t a = 0; a < d; ++a) chi[a] = x[a] - x[d + a];
    return {chi, t};
}

inline std::vector<std::vector<Real>> orthonormal(const std::vector<std::vector<Rational>>& basis, std::size_t d) {
    RealMatrix m(d, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) m(i, j) = to_real(basis[j][i]);
    QR q = gram_schmidt(m);
    std::vector<std::vector<Real>> out;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        std::vector<Real> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = q.q(i, j);
        out.push_back(v);
    }
    return out;
}

inline std::vector<Real> project_out(std::vector<Real> v, const std::vector<std::vector<Real>>& basis) {
    for (const auto& e : basis) {
        Real dot(0);
        for (std::size_t i = 0; i < v.size(); ++i) dot += e[i] * v[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * e[i];
    }
    return v;
}

template <class F>
F chi_at(const LinearInvolution<F>& t, const std::vector<Rational>& chi, const Point<F>& p) {
    auto s = t.locate(p);
    return F(chi[static_cast<std::size_t>(t.permutation().letter(*s))]);
}

} // namespace detail

/// Components of v orthogonal to the stable estimate of a solution.
inline std::vector<double> modulo_stable(const std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    std::vector<double> r = v;
    for (const auto& e : basis) {
        double dot = 0;
        for (std::size_t i = 0; i < r.size(); ++i) dot += e[i] * r[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= dot * e[i];
    }
    return r;
}

/// Solves Psi - Psi o T = Phi - chi at finite horizon K.
template <class F>
Solution<F> solve(const LinearInvolution<F>& t, const PiecewiseFunction<F>& phi, const SolveConfig& config,
                  std::optional<Point<F>> base = std::nullopt) {
    const std::size_t K = config.horizon;
    if (K < 4) throw Error(ErrorCode::TooFewBlocks, "solver needs a horizon of at least 4 blocks");
    for (int s : phi.signs)
        if (s != 1) throw Error(ErrorCode::UnsupportedRepresentation, "solver supports the coinciding convention only");
    if (config.require_diagnostics) {
        RothConfig rc = config.roth;
        rc.horizon = K;
        auto report = roth_report(t, rc);
        if (!report.passes())
            throw Error(ErrorCode::DiagnosticsFailed, "Roth diagnostics negative at the configured horizon",
                        std::string("a=") + (report.verdict_a ? "pass" : "fail") + " b=" + (report.verdict_b ? "pass" : "fail") +
                            " c=" + (report.verdict_c ? "pass" : "fail"));
    }
    auto path = mmy_accelerate(t, K);
    if (path.blocks() < K) throw Error(ErrorCode::TooFewBlocks, "induction stopped before the horizon");
    const std::size_t d = path.dimension();

    std::vector<std::vector<F>> samples;
    SpecialSumTracker<F> tracker(t, phi);
    samples.push_back(tracker.current().midpoints());
    for (std::size_t k = 0; k < K; ++k) {
        tracker.advance_block(path);
        samples.push_back(tracker.current().midpoints());
    }

    Solution<F> out;
    out.horizon = K;
    out.subtracted_mean = phi.subtracted_mean;
    PrecisionGuard guard(detail::precision_for(path));
    auto stable = stable_space_estimate(path, K, config.roth.stable_threshold);
    auto basis = detail::orthonormal(stable.basis, d);
    for (const auto& e : basis) {
        std::vector<double> v;
        for (const auto& x : e) v.push_back(static_cast<double>(x));
        out.stable_basis.push_back(v);
    }
    const F integral = phi.integral();
    auto [chi_k, value] = detail::chebyshev_chi(path, samples, integral, K);
    auto [chi_h, value_h] = detail::chebyshev_chi(path, samples, integral, K / 2);
    (void)value_h;
    out.lp_value = static_cast<double>(value);
    auto chi = detail::project_out(chi_k, basis);
    auto half = detail::project_out(chi_h, basis);
    // LP round-off below the working precision is noise, not data
    Real scale(1);
    for (const auto& row : samples)
        for (const auto& m : row) scale = max(scale, abs(to_real(m)));
    const Real noise = scale * pow(Real(2), -static_cast<int>(Real::default_precision() * 3.32 / 3));
    for (auto* v : {&chi_k, &chi, &half})
        for (auto& x : *v)
            if (abs(x) <= noise) x = 0;
    if (abs(value) <= noise) value = 0;
    for (std::size_t a = 0; a < d; ++a) {
        out.chi_lp.push_back(to_rational(chi_k[a]));
        out.chi.push_back(to_rational(chi[a]));
        out.chi_half.push_back(static_cast<double>(half[a]));
        out.convergence_gap = std::max(out.convergence_gap, static_cast<double>(abs(chi[a] - half[a])));
    }
    if (out.convergence_gap > config.tol)
        throw Error(ErrorCode::NotConverged, "chi moved between horizons K/2 and K",
                    std::to_string(out.convergence_gap));

    // Psi along the base orbit, Psi(x0) = 0
    const auto& p = t.permutation();
    Point<F> x = base ? *base : Point<F>{(t.slot_start(p.slot(Row::Top, 0)) + t.slot_end(p.slot(Row::Top, 0))) / F(BigInt(2)), 0};
    F psi(0);
    out.orbit.reserve(config.orbit_length + 1);
    for (std::size_t j = 0; j <= config.orbit_length; ++j) {
        out.orbit.push_back({x, psi});
        out.bound = std::max(out.bound, std::abs(to_double(psi)));
        if (j == config.orbit_length) break;
        if (t.is_singular(x)) throw Error(ErrorCode::OrbitHitsSingularity, "base orbit meets a singularity", std::to_string(j));
        psi = psi - (phi(t, x) - detail::chi_at(t, out.chi, x));
        x = t.apply(x);
    }
    return out;
}

/// Unit vector orthogonal to the stable estimate and to I_0 tangent
/// directions, taken from the canonical basis by Gram-Schmidt.
inline std::vector<Rational> transverse_unit_vector(const std::vector<std::vector<double>>& stable_basis, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1;
        auto r = modulo_stable(e, stable_basis);
        double n = 0;
        for (double x : r) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-6) continue;
        std::vector<Rational> out;
        for (double x : r) out.push_back(Rational(x / n));
        return out;
    }
    throw Error(ErrorCode::DegenerateQuotient, "stable estimate spans everything");
}

struct DecadeRow {
    std::size_t lo = 0, hi = 0; // window [lo, hi] of iteration counts
    double max_abs = 0;         // max |sum_{j<n} (Phi - chi)(T^j x0)|
    double growth = 0;          // ratio to the previous window, 0 for the first
};

template <class F>
struct Verification {
    F residual{0};               // max telescoping defect on the stored orbit
    std::vector<DecadeRow> decades;
    double max_growth = 0;
    bool bounded = false;        // every decade grows by at most `factor`
};

/// Telescoping residual on the solution orbit and decade maxima of the
/// partial sums of Phi - chi over n iterations from the orbit's base point.
template <class F>
Verification<F> verify(const LinearInvolution<F>& t, const PiecewiseFunction<F>& phi, const Solution<F>& sol,
                       const std::vector<Rational>& chi, std::size_t n, double factor = 2.0) {
    Verification<F> v;
    for (std::size_t j = 0; j + 1 < sol.orbit.size(); ++j) {
        const auto& x = sol.orbit[j];
        F r = x.psi - sol.orbit[j + 1].psi - phi(t, x.point) + detail::chi_at(t, sol.chi, x.point);
        if (r < F(0)) r = F(0) - r;
        if (r > v.residual) v.residual = r;
    }
    Point<F> x = sol.orbit.front().point;
    F sum(0);
    std::vector<double> partial{0.0};
    partial.reserve(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (t.is_singular(x)) throw Error(ErrorCode::OrbitHitsSingularity, "orbit meets a singularity", std::to_string(j));
        sum += phi(t, x) - detail::chi_at(t, chi, x);
        partial.push_back(std::abs(to_double(sum)));
        x = t.apply(x);
    }
    for (std::size_t lo = 1; lo * 10 <= n; lo *= 10) {
        DecadeRow row;
        row.lo = lo;
        row.hi = lo * 10;
        for (std::size_t m = lo; m <= row.hi; ++m) row.max_abs = std::max(row.max_abs, partial[m]);
        if (!v.decades.empty()) {
            const double prev = v.decades.back().max_abs;
            row.growth = prev > 0 ? row.max_abs / prev : (row.max_abs > 0 ? INFINITY : 1.0);
            v.max_growth = std::max(v.max_growth, row.growth);
        }
        v.decades.push_back(row);
    }
    v.bounded = v.max_growth <= factor;
    return v;
}

} // namespace linvol
