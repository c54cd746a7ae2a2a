#pragma once

// Dense two-phase simplex with Bland's rule. Instantiated with Rational for
// exact feasibility questions and with MPFR reals (eps > 0) for the small
// Chebyshev fits in the cohomological solver.

#include <cstddef>
#include <optional>
#include <vector>

namespace linvol::lp {

enum class Relation { LessEq, Equal, GreaterEq };

template <class T>
struct Constraint {
    std::vector<T> coeffs;
    Relation relation;
    T rhs;
};

/// minimize objective . x subject to constraints, x >= 0.
template <class T>
struct Problem {
    std::size_t num_vars = 0;
    std::vector<T> objective;
    std::vector<Constraint<T>> constraints;
};

enum class Status { Optimal, Infeasible, Unbounded };

template <class T>
struct Result {
    Status status = Status::Infeasible;
    std::vector<T> x;
    T value{0};
};

namespace detail {

template <class T>
bool positive(const T& v, const T& eps) { return v > eps; }
template <class T>
bool negative(const T& v, const T& eps) { return v < -eps; }

template <class T>
class Tableau {
public:
    // rows_ x (cols_ + 1), last column = rhs
    std::vector<std::vector<T>> a;
    std::vector<std::size_t> basis;
    std::size_t cols = 0;
    T eps;

    void pivot(std::size_t r, std::size_t c) {
        T inv = T(1) / a[r][c];
        for (auto& v : a[r]) v *= inv;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r) continue;
            T f = a[i][c];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
        }
        basis[r] = c;
    }

    // Minimizes cost . x over the current basis; cost indexed by column.
    // Columns with allowed[c] == false never enter. Dantzig pricing, with
    // Bland's rule after a run of degenerate pivots so cycling cannot occur.
    Status optimize(const std::vector<T>& cost, const std::vector<bool>& allowed) {
        const std::size_t m = a.size();
        std::vector<T> rc(cost);
        rc.resize(cols + 1, T(0));
        for (std::size_t i = 0; i < m; ++i) {
            const T& cb = cost[basis[i]];
            if (cb == T(0)) continue;
            for (std::size_t j = 0; j <= cols; ++j) rc[j] -= cb * a[i][j];
        }
        std::size_t degenerate = 0;
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            const bool bland = degenerate > 20;
            std::optional<std::size_t> enter;
            for (std::size_t c = 0; c < cols; ++c) {
                if (!allowed[c] || !negative(rc[c], eps)) continue;
                if (!enter || (!bland && rc[c] < rc[*enter])) enter = c;
                if (bland) break;
            }
            if (!enter) return Status::Optimal;
            std::optional<std::size_t> leave;
            T best{0};
            for (std::size_t i = 0; i < m; ++i) {
                if (!positive(a[i][*enter], eps)) continue;
                T ratio = a[i][cols] / a[i][*enter];
                if (!leave || ratio < best - eps ||
                    (!(best + eps < ratio) && basis[i] < basis[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return Status::Unbounded;
            degenerate = positive(best, eps) ? 0 : degenerate + 1;
            pivot(*leave, *enter);
            const T f = rc[*enter];
            for (std::size_t j = 0; j <= cols; ++j) rc[j] -= f * a[*leave][j];
        }
        return Status::Unbounded;
    }
};

} // namespace detail

template <class T>
Result<T> solve(const Problem<T>& problem, T eps = T(0)) {
    const std::size_t n = problem.num_vars;
    const std::size_t m = problem.constraints.size();
    std::size_t slack_count = 0;
    for (const auto& c : problem.constraints)
        if (c.relation != Relation::Equal) ++slack_count;
    // a row starts on its slack when that slack ends up with coefficient +1
    std::vector<bool> needs_artificial(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = problem.constraints[i];
        const bool flip = c.rhs < T(0);
        needs_artificial[i] = c.relation == Relation::Equal || (c.relation == Relation::LessEq) == flip;
    }
    std::size_t artificial_count = 0;
    for (bool b : needs_artificial) artificial_count += b;
    const std::size_t first_artificial = n + slack_count;
    const std::size_t cols = first_artificial + artificial_count;
    detail::Tableau<T> tab;
    tab.cols = cols;
    tab.eps = eps;
    tab.a.assign(m, std::vector<T>(cols + 1, T(0)));
    tab.basis.assign(m, 0);
    std::size_t slack = n, artificial = first_artificial;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = problem.constraints[i];
        auto& row = tab.a[i];
        for (std::size_t j = 0; j < n && j < c.coeffs.size(); ++j) row[j] = c.coeffs[j];
        std::optional<std::size_t> own_slack;
        if (c.relation != Relation::Equal) {
            own_slack = slack;
            row[slack++] = c.relation == Relation::LessEq ? T(1) : T(-1);
        }
        row[cols] = c.rhs;
        if (row[cols] < T(0))
            for (auto& v : row) v = -v;
        if (needs_artificial[i]) {
            row[artificial] = T(1);
            tab.basis[i] = artificial++;
        } else {
            tab.basis[i] = *own_slack;
        }
    }
    std::vector<T> phase1(cols, T(0));
    for (std::size_t c = first_artificial; c < cols; ++c) phase1[c] = T(1);
    std::vector<bool> allowed(cols, true);
    tab.optimize(phase1, allowed);
    T infeas(0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] >= first_artificial) infeas += tab.a[i][cols];
    Result<T> result;
    if (detail::positive(infeas, eps * T(static_cast<double>(m + 1)))) {
        result.status = Status::Infeasible;
        return result;
    }
    // drive artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis[i] < first_artificial) continue;
        for (std::size_t c = 0; c < first_artificial; ++c)
            if (detail::positive(tab.a[i][c], eps) || detail::negative(tab.a[i][c], eps)) {
                tab.pivot(i, c);
                break;
            }
    }
    for (std::size_t c = first_artificial; c < cols; ++c) allowed[c] = false;
    std::vector<T> cost(cols, T(0));
    for (std::size_t j = 0; j < n && j < problem.objective.size(); ++j) cost[j] = problem.objective[j];
    auto status = tab.optimize(cost, allowed);
    result.status = status;
    result.x.assign(n, T(0));
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] < n) result.x[tab.basis[i]] = tab.a[i][cols];
    result.value = T(0);
    for (std::size_t j = 0; j < n && j < problem.objective.size(); ++j)
        result.value += problem.objective[j] * result.x[j];
    return result;
}

} // namespace linvol::lp
