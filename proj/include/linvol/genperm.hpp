#pragma once

// Generalized permutations: two rows of slots over an alphabet in which every
// letter occurs exactly twice.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "linvol/error.hpp"
#include "linvol/exact.hpp"
#include "linvol/lp.hpp"

namespace linvol {

using Letter = int;

enum class Row { Top = 0, Bottom = 1 };

inline Row other(Row r) { return r == Row::Top ? Row::Bottom : Row::Top; }
inline const char* to_string(Row r) { return r == Row::Top ? "top" : "bottom"; }

class GeneralizedPermutation {
public:
    GeneralizedPermutation() = default;

    /// Letter indices per row; names[i] is the printable name of letter i.
    GeneralizedPermutation(std::vector<std::string> names, std::vector<Letter> top, std::vector<Letter> bottom)
        : names_(std::move(names)), top_(std::move(top)), bottom_(std::move(bottom)) {
        check();
    }

    std::size_t size() const { return names_.size(); }
    std::size_t top_length() const { return top_.size(); }
    std::size_t bottom_length() const { return bottom_.size(); }
    std::size_t slot_count() const { return top_.size() + bottom_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(Letter a) const { return names_.at(static_cast<std::size_t>(a)); }
    const std::vector<Letter>& top() const { return top_; }
    const std::vector<Letter>& bottom() const { return bottom_; }
    const std::vector<Letter>& row(Row r) const { return r == Row::Top ? top_ : bottom_; }

    /// Slots are numbered 0..l-1 (top) then l..l+m-1 (bottom).
    Letter letter(std::size_t slot) const {
        return slot < top_.size() ? top_[slot] : bottom_[slot - top_.size()];
    }
    Row row_of(std::size_t slot) const { return slot < top_.size() ? Row::Top : Row::Bottom; }
    std::size_t position(std::size_t slot) const {
        return slot < top_.size() ? slot : slot - top_.size();
    }
    std::size_t slot(Row r, std::size_t pos) const { return r == Row::Top ? pos : top_.size() + pos; }

    std::size_t twin(std::size_t s) const {
        const Letter a = letter(s);
        for (std::size_t t = 0; t < slot_count(); ++t)
            if (t != s && letter(t) == a) return t;
        return s; // unreachable for valid data
    }

    /// The two slots of a letter in slot order.
    std::pair<std::size_t, std::size_t> occurrences(Letter a) const {
        std::size_t first = slot_count(), second = slot_count();
        for (std::size_t t = 0; t < slot_count(); ++t)
            if (letter(t) == a) (first == slot_count() ? first : second) = t;
        return {first, second};
    }

    /// True when both occurrences of a lie in the same row.
    bool same_row(Letter a) const {
        auto [s, t] = occurrences(a);
        return row_of(s) == row_of(t);
    }

    /// No letter has both occurrences in one row (classical IET datum).
    bool is_classical() const {
        for (std::size_t a = 0; a < size(); ++a)
            if (same_row(static_cast<Letter>(a))) return false;
        return true;
    }

    Letter find(const std::string& n) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == n) return static_cast<Letter>(i);
        return -1;
    }

    /// Canonical text form "a b c / c b a".
    std::string key() const {
        std::string out;
        for (auto a : top_) out += names_[static_cast<std::size_t>(a)] + " ";
        out += "/";
        for (auto a : bottom_) out += " " + names_[static_cast<std::size_t>(a)];
        return out;
    }

    friend bool operator==(const GeneralizedPermutation& x, const GeneralizedPermutation& y) {
        return x.names_ == y.names_ && x.top_ == y.top_ && x.bottom_ == y.bottom_;
    }

    // Mutators used by the induction; they keep the two-to-one invariant
    // only in combination, so callers re-check through the constructor.
    std::vector<Letter>& mutable_row(Row r) { return r == Row::Top ? top_ : bottom_; }

private:
    void check() const {
        if (top_.empty() || bottom_.empty())
            throw Error(ErrorCode::EmptyRow, "both rows must be non-empty", key_unchecked());
        std::vector<int> count(names_.size(), 0);
        for (auto a : top_) {
            if (a < 0 || static_cast<std::size_t>(a) >= names_.size())
                throw Error(ErrorCode::InvalidInput, "letter index out of range");
            ++count[static_cast<std::size_t>(a)];
        }
        for (auto a : bottom_) {
            if (a < 0 || static_cast<std::size_t>(a) >= names_.size())
                throw Error(ErrorCode::InvalidInput, "letter index out of range");
            ++count[static_cast<std::size_t>(a)];
        }
        std::string bad;
        for (std::size_t i = 0; i < count.size(); ++i)
            if (count[i] != 2) bad += (bad.empty() ? "" : ",") + names_[i];
        if (!bad.empty()) throw Error(ErrorCode::NotTwoToOne, "letters must occur exactly twice", bad);
    }
    std::string key_unchecked() const {
        std::string out;
        for (auto a : top_) out += std::to_string(a) + " ";
        out += "/";
        for (auto a : bottom_) out += " " + std::to_string(a);
        return out;
    }

    std::vector<std::string> names_;
    std::vector<Letter> top_;
    std::vector<Letter> bottom_;
};

/// Builds a permutation from a flat slot list split as (l, m). The alphabet
/// is ordered by first occurrence (top row first).
inline GeneralizedPermutation validate(const std::vector<std::string>& slots, std::size_t l, std::size_t m) {
    if (l + m != slots.size())
        throw Error(ErrorCode::InvalidInput, "row lengths do not add up to the slot count");
    if (l == 0 || m == 0) throw Error(ErrorCode::EmptyRow, "both rows must be non-empty");
    std::vector<std::string> names;
    std::map<std::string, int> count;
    for (const auto& s : slots) {
        if (s.empty()) throw Error(ErrorCode::InvalidInput, "symbols must be non-empty strings");
        if (count[s]++ == 0) names.push_back(s);
    }
    std::string bad;
    for (const auto& n : names)
        if (count[n] != 2) bad += (bad.empty() ? "" : ",") + n;
    if (!bad.empty()) throw Error(ErrorCode::NotTwoToOne, "symbols must occur exactly twice", bad);
    auto index = [&](const std::string& s) {
        return static_cast<Letter>(std::find(names.begin(), names.end(), s) - names.begin());
    };
    std::vector<Letter> top, bottom;
    for (std::size_t i = 0; i < l; ++i) top.push_back(index(slots[i]));
    for (std::size_t i = l; i < l + m; ++i) bottom.push_back(index(slots[i]));
    return GeneralizedPermutation(std::move(names), std::move(top), std::move(bottom));
}

inline GeneralizedPermutation validate(const std::vector<std::string>& top, const std::vector<std::string>& bottom) {
    std::vector<std::string> slots = top;
    slots.insert(slots.end(), bottom.begin(), bottom.end());
    return validate(slots, top.size(), bottom.size());
}

/// Parses "a b c / c b a".
inline GeneralizedPermutation parse_permutation(const std::string& text) {
    auto bar = text.find('/');
    if (bar == std::string::npos) throw Error(ErrorCode::InvalidInput, "expected 'top / bottom'", text);
    auto words = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ' ' || c == '\t') {
                if (!cur.empty()) out.push_back(cur), cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };
    return validate(words(text.substr(0, bar)), words(text.substr(bar + 1)));
}

/// A suspension datum: lengths (real parts) and heights (imaginary parts).
struct Suspension {
    std::vector<Rational> lengths;
    std::vector<Rational> heights;
};

/// Exact LP search for suspension data. Heights must have positive top
/// partial sums and negative bottom partial sums (proper prefixes), lengths
/// are positive, and both satisfy the top/bottom balance equation. The
/// constraints are homogeneous, so strict inequalities become ">= 1".
inline std::optional<Suspension> find_suspension(const GeneralizedPermutation& p) {
    const std::size_t d = p.size();
    std::vector<Rational> balance(d, Rational(0));
    for (auto a : p.top()) balance[static_cast<std::size_t>(a)] += 1;
    for (auto a : p.bottom()) balance[static_cast<std::size_t>(a)] -= 1;

    // lengths: lambda_a = 1 + y_a, y >= 0
    lp::Problem<Rational> real;
    real.num_vars = d;
    real.objective.assign(d, Rational(0));
    {
        Rational rhs(0);
        for (std::size_t a = 0; a < d; ++a) rhs -= balance[a];
        real.constraints.push_back({balance, lp::Relation::Equal, rhs});
    }
    auto real_result = lp::solve(real);
    if (real_result.status != lp::Status::Optimal) return std::nullopt;

    // heights: tau = u - v, u, v >= 0
    lp::Problem<Rational> imag;
    imag.num_vars = 2 * d;
    imag.objective.assign(2 * d, Rational(0));
    auto add_prefix = [&](const std::vector<Letter>& row, lp::Relation rel, Rational rhs) {
        std::vector<Rational> coeffs(2 * d, Rational(0));
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            auto a = static_cast<std::size_t>(row[i]);
            coeffs[a] += 1;
            coeffs[d + a] -= 1;
            imag.constraints.push_back({coeffs, rel, rhs});
        }
    };
    add_prefix(p.top(), lp::Relation::GreaterEq, Rational(1));
    add_prefix(p.bottom(), lp::Relation::LessEq, Rational(-1));
    {
        std::vector<Rational> coeffs(2 * d, Rational(0));
        for (std::size_t a = 0; a < d; ++a) {
            coeffs[a] = balance[a];
            coeffs[d + a] = -balance[a];
        }
        imag.constraints.push_back({coeffs, lp::Relation::Equal, Rational(0)});
    }
    auto imag_result = lp::solve(imag);
    if (imag_result.status != lp::Status::Optimal) return std::nullopt;

    Suspension s;
    for (std::size_t a = 0; a < d; ++a) {
        s.lengths.push_back(Rational(1) + real_result.x[a]);
        s.heights.push_back(imag_result.x[a] - imag_result.x[d + a]);
    }
    return s;
}

inline bool irreducibility_test(const GeneralizedPermutation& p) { return find_suspension(p).has_value(); }

/// Orientation double cover. Lifted symbols are (letter, occurrence) pairs;
/// occurrence 0 is the first slot of the letter in slot order.
struct DoubleCoverData {
    GeneralizedPermutation base;
    std::vector<std::string> lifted_names;          // size 2d, index 2a + occ
    std::vector<std::size_t> lifted_top;            // domain order of the cover map
    std::vector<std::size_t> lifted_bottom;         // image order
    std::vector<std::size_t> deck;                  // deck involution on lifted symbols
    std::vector<bool> same_row;                     // per base letter
    std::size_t plus_dimension = 0;
    std::size_t minus_dimension = 0;
    bool connected = false;

    Letter project(std::size_t lifted) const { return static_cast<Letter>(lifted / 2); }
};

/// Lifted symbol index of a slot: 2 * letter + occurrence.
inline std::size_t lifted_symbol(const GeneralizedPermutation& p, std::size_t slot) {
    auto [first, second] = p.occurrences(p.letter(slot));
    (void)second;
    return 2 * static_cast<std::size_t>(p.letter(slot)) + (slot == first ? 0 : 1);
}

inline DoubleCoverData double_cover(const GeneralizedPermutation& p) {
    if (!irreducibility_test(p)) throw Error(ErrorCode::Reducible, "double cover needs an irreducible permutation", p.key());
    DoubleCoverData dc;
    dc.base = p;
    const std::size_t d = p.size();
    const std::size_t l = p.top_length(), m = p.bottom_length();
    for (std::size_t a = 0; a < d; ++a) {
        dc.lifted_names.push_back(p.name(static_cast<Letter>(a)) + ".0");
        dc.lifted_names.push_back(p.name(static_cast<Letter>(a)) + ".1");
        dc.deck.push_back(2 * a + 1);
        dc.deck.push_back(2 * a);
        dc.same_row.push_back(p.same_row(static_cast<Letter>(a)));
    }
    // Signed coordinate z = x on level 0 and z = -x on level 1 turns the
    // involution into an interval exchange on (-|X|, |X|): domain order is
    // the bottom row reversed then the top row; the image of a slot is the
    // mirror of its twin.
    for (std::size_t j = m; j-- > 0;) dc.lifted_top.push_back(lifted_symbol(p, l + j));
    for (std::size_t i = 0; i < l; ++i) dc.lifted_top.push_back(lifted_symbol(p, i));
    for (std::size_t i = l; i-- > 0;) dc.lifted_bottom.push_back(lifted_symbol(p, p.twin(i)));
    for (std::size_t j = 0; j < m; ++j) dc.lifted_bottom.push_back(lifted_symbol(p, p.twin(l + j)));
    dc.plus_dimension = d;
    dc.minus_dimension = d;
    dc.connected = !p.is_classical();
    return dc;
}

struct Stratum {
    std::vector<int> orders; // nonzero singularity orders, descending
    int genus = 0;
    bool orientable = false; // square of an Abelian differential

    int order_sum() const { return std::accumulate(orders.begin(), orders.end(), 0); }
    std::string str() const {
        std::string out = "Q(";
        for (std::size_t i = 0; i < orders.size(); ++i) out += (i ? "," : "") + std::to_string(orders[i]);
        return out + ")";
    }
};

/// Topological data of the polygonal suspension.
struct SuspensionTopology {
    std::vector<double> vertex_angles;   // cone angle / pi per vertex class
    std::size_t vertex_classes = 0;
    std::size_t cover_vertex_classes = 0;
    int euler_characteristic = 0;
    int cover_euler_characteristic = 0;
};

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
    std::size_t classes() {
        std::size_t c = 0;
        for (std::size_t i = 0; i < parent.size(); ++i)
            if (find(i) == i) ++c;
        return c;
    }
};

} // namespace detail

/// Builds the polygon from a suspension datum, glues twin sides, and returns
/// cone angles per vertex class together with Euler characteristics of the
/// surface and of its orientation double cover (two copies of the polygon).
inline SuspensionTopology suspension_topology(const GeneralizedPermutation& p, const Suspension& s) {
    const std::size_t l = p.top_length(), m = p.bottom_length();
    // vertex ids: top P_0..P_l -> 0..l, bottom Q_0..Q_m -> l+1..l+m+1
    auto top_id = [&](std::size_t i) { return i; };
    auto bot_id = [&](std::size_t j) { return l + 1 + j; };
    const std::size_t nv = l + m + 2;

    std::vector<double> tx(l + 1, 0.0), ty(l + 1, 0.0), bx(m + 1, 0.0), by(m + 1, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        auto a = static_cast<std::size_t>(p.top()[i]);
        tx[i + 1] = tx[i] + s.lengths[a].convert_to<double>();
        ty[i + 1] = ty[i] + s.heights[a].convert_to<double>();
    }
    for (std::size_t j = 0; j < m; ++j) {
        auto a = static_cast<std::size_t>(p.bottom()[j]);
        bx[j + 1] = bx[j] + s.lengths[a].convert_to<double>();
        by[j + 1] = by[j] + s.heights[a].convert_to<double>();
    }

    auto glue = [&](detail::UnionFind& uf, std::size_t off_a, std::size_t off_b, bool cross) {
        for (std::size_t s0 = 0; s0 < l + m; ++s0) {
            std::size_t s1 = p.twin(s0);
            if (s1 < s0) continue;
            auto ends = [&](std::size_t slot) {
                std::size_t pos = p.position(slot);
                return p.row_of(slot) == Row::Top ? std::pair{top_id(pos), top_id(pos + 1)}
                                                  : std::pair{bot_id(pos), bot_id(pos + 1)};
            };
            auto [a0, a1] = ends(s0);
            auto [b0, b1] = ends(s1);
            bool translation = p.row_of(s0) != p.row_of(s1);
            if (translation) {
                uf.unite(off_a + a0, off_a + b0);
                uf.unite(off_a + a1, off_a + b1);
                if (cross) {
                    uf.unite(off_b + a0, off_b + b0);
                    uf.unite(off_b + a1, off_b + b1);
                }
            } else if (!cross) {
                uf.unite(off_a + a0, off_a + b1);
                uf.unite(off_a + a1, off_a + b0);
            } else {
                uf.unite(off_a + a0, off_b + b1);
                uf.unite(off_a + a1, off_b + b0);
                uf.unite(off_b + a0, off_a + b1);
                uf.unite(off_b + a1, off_a + b0);
            }
        }
        for (std::size_t off : {off_a, off_b}) {
            uf.unite(off + top_id(0), off + bot_id(0));
            uf.unite(off + top_id(l), off + bot_id(m));
            if (!cross) break;
        }
    };

    detail::UnionFind uf(nv);
    glue(uf, 0, 0, false);

    // CCW corner list: Q_0..Q_m then P_{l-1}..P_1
    struct Corner { std::size_t id; double x, y; };
    std::vector<Corner> corners;
    for (std::size_t j = 0; j <= m; ++j) corners.push_back({bot_id(j), bx[j], by[j]});
    for (std::size_t i = l; i-- > 1;) corners.push_back({top_id(i), tx[i], ty[i]});
    const double pi = std::acos(-1.0);
    std::map<std::size_t, double> angle;
    const std::size_t nc = corners.size();
    for (std::size_t k = 0; k < nc; ++k) {
        const auto& prev = corners[(k + nc - 1) % nc];
        const auto& cur = corners[k];
        const auto& next = corners[(k + 1) % nc];
        double ux = cur.x - prev.x, uy = cur.y - prev.y;
        double vx = next.x - cur.x, vy = next.y - cur.y;
        double turn = std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
        angle[uf.find(cur.id)] += (pi - turn) / pi;
    }
    SuspensionTopology topo;
    for (auto& [id, a] : angle) topo.vertex_angles.push_back(a);
    topo.vertex_classes = angle.size();
    const int d = static_cast<int>(p.size());
    topo.euler_characteristic = static_cast<int>(topo.vertex_classes) - d + 1;

    detail::UnionFind cover(2 * nv);
    glue(cover, 0, nv, true);
    // only vertex ids that are actual polygon corners count
    std::map<std::size_t, bool> seen;
    for (std::size_t c = 0; c < 2; ++c)
        for (const auto& k : corners) seen[cover.find(c * nv + k.id)] = true;
    topo.cover_vertex_classes = seen.size();
    topo.cover_euler_characteristic = static_cast<int>(topo.cover_vertex_classes) - 2 * d + 2;
    return topo;
}

inline Stratum stratum(const GeneralizedPermutation& p) {
    auto s = find_suspension(p);
    if (!s) throw Error(ErrorCode::Reducible, "stratum needs an irreducible permutation", p.key());
    auto topo = suspension_topology(p, *s);
    Stratum st;
    for (double a : topo.vertex_angles) {
        int k = static_cast<int>(std::lround(a)) - 2;
        if (k != 0) st.orders.push_back(k);
    }
    std::sort(st.orders.rbegin(), st.orders.rend());
    st.genus = (st.order_sum() + 4) / 4;
    st.orientable = p.is_classical();
    return st;
}

/// Minimal strata Q(4g-4) and strata with only even orders.
inline bool is_excluded_stratum(const Stratum& s) {
    if (s.orders.size() == 1 && s.orders[0] == 4 * s.genus - 4) return true;
    return std::all_of(s.orders.begin(), s.orders.end(), [](int k) { return k % 2 == 0; });
}

} // namespace linvol
