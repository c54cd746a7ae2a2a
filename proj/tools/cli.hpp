#pragma once

// Command-line driver. Everything except argument parsing lives here so the
// tests can call run() directly.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "linvol/cohom.hpp"
#include "linvol/genperm.hpp"
#include "linvol/involution.hpp"
#include "linvol/measure.hpp"
#include "linvol/rauzy.hpp"
#include "linvol/roth.hpp"

namespace linvol::cli {

using json = nlohmann::ordered_json;
using QN = QuadraticNumber;

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"validate", "induct", "diagram", "roth", "lyapunov", "solve", "measure"};
    return c;
}

struct Config {
    std::string command;
    std::string perm;                 // inline JSON, a file holding it, or "a b / b a"
    std::size_t steps = 30;           // K: steps for induct, blocks elsewhere
    std::size_t samples = 500;        // N: Monte Carlo samples, orbit length for solve
    double epsilon = 0.5;
    double ceps = 10;
    double theta = 0.1;
    double tol = 1e-3;
    std::uint64_t seed = 1;
    std::string out = ".";
    std::string format = "json";      // what goes to stdout: the summary or the main table
    std::map<std::string, std::vector<std::string>> phi; // solve: letter -> local polynomial coefficients
    std::vector<std::string> subset;  // measure: A' for the Q_ext check
    std::size_t qext_depth = 0;       // measure: path length of the Q_ext check, 0 = off
    std::size_t threads = 1;

    bool operator==(const Config&) const = default;
};

// ---------------------------------------------------------------------------
// Formatting.

/// Shortest decimal string that reads back to the same double.
inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}
inline std::string num(const Rational& x) { return to_string(x); }
inline std::string num(const QN& x) { return x.str(); }
inline std::string num(const BigInt& x) { return x.str(); }

inline json error_record(const Error& e) {
    return {{"code", std::string(to_string(e.code()))}, {"message", e.message()}, {"context", e.context()}};
}

inline double parse_double(const std::string& s, const std::string& key) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        if (s == "inf") return INFINITY;
        throw Error(ErrorCode::InvalidInput, "not a number", key + "=" + s);
    }
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& s, const std::string& key) {
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidInput, "not a non-negative integer", key + "=" + s);
    return v;
}

// ---------------------------------------------------------------------------
// Config (de)serialization. Numbers are written as decimal strings; both
// strings and JSON numbers are accepted on input.

inline json to_json(const Config& c) {
    json j;
    j["command"] = c.command;
    j["perm"] = c.perm;
    j["steps"] = std::to_string(c.steps);
    j["samples"] = std::to_string(c.samples);
    j["epsilon"] = num(c.epsilon);
    j["ceps"] = num(c.ceps);
    j["theta"] = num(c.theta);
    j["tol"] = num(c.tol);
    j["seed"] = std::to_string(c.seed);
    j["out"] = c.out;
    j["format"] = c.format;
    j["phi"] = json::object();
    for (const auto& [k, v] : c.phi) j["phi"][k] = v;
    j["subset"] = c.subset;
    j["qext_depth"] = std::to_string(c.qext_depth);
    j["threads"] = std::to_string(c.threads);
    return j;
}

namespace detail {

inline std::string scalar_text(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return num(v.get<double>());
    throw Error(ErrorCode::InvalidInput, "expected a number or a string", key);
}

inline std::string string_of(const json& v, const std::string& key) {
    if (!v.is_string()) throw Error(ErrorCode::InvalidInput, "expected a string", key);
    return v.get<std::string>();
}

} // namespace detail

/// Overlays the keys of `j` on `base`. Unknown keys are rejected.
inline Config from_json(const json& j, Config base = {}) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        auto text = [&] { return detail::scalar_text(v, key); };
        if (key == "command") base.command = detail::string_of(v, key);
        else if (key == "perm") base.perm = v.is_string() ? v.get<std::string>() : v.dump();
        else if (key == "steps") base.steps = parse_unsigned(text(), key);
        else if (key == "samples") base.samples = parse_unsigned(text(), key);
        else if (key == "epsilon") base.epsilon = parse_double(text(), key);
        else if (key == "ceps") base.ceps = parse_double(text(), key);
        else if (key == "theta") base.theta = parse_double(text(), key);
        else if (key == "tol") base.tol = parse_double(text(), key);
        else if (key == "seed") base.seed = parse_unsigned(text(), key);
        else if (key == "out") base.out = detail::string_of(v, key);
        else if (key == "format") base.format = detail::string_of(v, key);
        else if (key == "qext_depth") base.qext_depth = parse_unsigned(text(), key);
        else if (key == "threads") base.threads = parse_unsigned(text(), key);
        else if (key == "phi") {
            if (!v.is_object()) throw Error(ErrorCode::InvalidInput, "phi maps letters to coefficient lists");
            base.phi.clear();
            for (const auto& [letter, coeffs] : v.items()) {
                if (!coeffs.is_array()) throw Error(ErrorCode::InvalidInput, "coefficients must be a list", letter);
                std::vector<std::string> cs;
                for (const auto& c : coeffs) cs.push_back(detail::scalar_text(c, "phi." + letter));
                base.phi[letter] = cs;
            }
        } else if (key == "subset") {
            if (!v.is_array()) throw Error(ErrorCode::InvalidInput, "subset must be a list of letters");
            base.subset.clear();
            for (const auto& a : v) base.subset.push_back(detail::string_of(a, key));
        } else {
            throw Error(ErrorCode::InvalidInput, "unknown config key", key);
        }
    }
    return base;
}

inline void check(const Config& c) {
    if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
        throw Error(ErrorCode::InvalidInput, "unknown command", c.command);
    if (c.perm.empty()) throw Error(ErrorCode::InvalidInput, "no permutation given", "--perm");
    if (c.format != "json" && c.format != "csv") throw Error(ErrorCode::InvalidInput, "format must be json or csv", c.format);
    if (!(c.epsilon > 0)) throw Error(ErrorCode::InvalidInput, "epsilon must be positive", num(c.epsilon));
    if (c.threads == 0) throw Error(ErrorCode::InvalidInput, "threads must be positive");
}

// ---------------------------------------------------------------------------
// Files.

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read file", path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Writes through a temporary file in the same directory and renames it.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing", tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed", tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "rename failed", path.string());
    }
}

/// Plain CSV table; cells must not contain commas.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
            out += "\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

struct Series {
    std::string x_name, x_unit, y_name, y_unit;
    std::vector<std::pair<double, double>> points;
};

/// Two-column CSV for external plotting. The header carries the units.
inline void emit_plotdata(const Series& s, const std::filesystem::path& path) {
    if (s.points.empty()) throw Error(ErrorCode::InvalidInput, "empty series", path.string());
    Table t;
    t.header = {s.x_name + " [" + s.x_unit + "]", s.y_name + " [" + s.y_unit + "]"};
    for (const auto& [x, y] : s.points) t.rows.push_back({num(x), num(y)});
    write_atomic(path, t.str());
}

// ---------------------------------------------------------------------------
// Permutation input.

struct Input {
    GeneralizedPermutation perm;
    std::optional<std::vector<QN>> lengths;
};

inline Input parse_input(const std::string& source) {
    std::string text = source;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw Error(ErrorCode::InvalidInput, "empty permutation");
    std::error_code ec;
    if (text[first] != '{' && (std::filesystem::is_regular_file(source, ec) || text.find('/') == std::string::npos))
        text = read_file(source);
    first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') return {parse_permutation(text), std::nullopt};
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidInput, "malformed permutation JSON", e.what());
    }
    std::vector<std::string> rows[2];
    for (const auto& [key, v] : j.items()) {
        if (key != "top" && key != "bottom" && key != "lengths")
            throw Error(ErrorCode::InvalidInput, "unknown permutation key", key);
    }
    for (int r = 0; r < 2; ++r) {
        const char* key = r == 0 ? "top" : "bottom";
        if (!j.contains(key) || !j[key].is_array()) throw Error(ErrorCode::InvalidInput, "missing row", key);
        for (const auto& a : j[key]) rows[r].push_back(detail::string_of(a, key));
    }
    Input in{validate(rows[0], rows[1]), std::nullopt};
    if (j.contains("lengths")) {
        const auto& l = j["lengths"];
        if (!l.is_object()) throw Error(ErrorCode::InvalidInput, "lengths map letters to numbers");
        std::vector<std::optional<QN>> v(in.perm.size());
        for (const auto& [letter, x] : l.items()) {
            Letter a = in.perm.find(letter);
            if (a < 0) throw Error(ErrorCode::InvalidInput, "length for an unknown letter", letter);
            v[static_cast<std::size_t>(a)] = parse_quadratic(detail::scalar_text(x, letter));
        }
        in.lengths.emplace();
        for (std::size_t a = 0; a < v.size(); ++a) {
            if (!v[a]) throw Error(ErrorCode::InvalidInput, "missing length", in.perm.name(static_cast<Letter>(a)));
            in.lengths->push_back(*v[a]);
        }
    }
    return in;
}

inline json perm_json(const GeneralizedPermutation& p) {
    json j;
    j["top"] = json::array();
    j["bottom"] = json::array();
    for (auto a : p.top()) j["top"].push_back(p.name(a));
    for (auto a : p.bottom()) j["bottom"].push_back(p.name(a));
    return j;
}

/// Given lengths, or a seeded exact sample from the balance polytope.
inline LinearInvolution<QN> involution_of(const Input& in, std::uint64_t seed) {
    if (in.lengths) return LinearInvolution<QN>(in.perm, *in.lengths);
    auto sample = sample_lengths(in.perm, seed, SampleMode::Rational, 512);
    std::vector<QN> l(sample.exact.begin(), sample.exact.end());
    return LinearInvolution<QN>(in.perm, l);
}

inline json lengths_json(const GeneralizedPermutation& p, const std::vector<QN>& lengths) {
    json j = json::object();
    for (std::size_t a = 0; a < lengths.size(); ++a) j[p.name(static_cast<Letter>(a))] = num(lengths[a]);
    return j;
}

// ---------------------------------------------------------------------------
// Subcommands. Each fills the result object and the tables, and returns the
// exit code of its verdict.

struct Report {
    json result = json::object();
    std::vector<std::pair<std::string, Table>> tables; // file name, table; first one is the main table
    std::vector<std::pair<std::string, Series>> plots;
    int exit_code = 0;
};

inline Report run_validate(const Config&, const Input& in) {
    Report r;
    const auto& p = in.perm;
    r.result["permutation"] = perm_json(p);
    r.result["d"] = std::to_string(p.size());
    r.result["type"] = {std::to_string(p.top_length()), std::to_string(p.bottom_length())};
    r.result["classical"] = p.is_classical();
    const bool irreducible = irreducibility_test(p);
    r.result["irreducible"] = irreducible;
    Table t{{"letter", "top", "bottom"}, {}};
    for (std::size_t a = 0; a < p.size(); ++a) {
        auto [s, u] = p.occurrences(static_cast<Letter>(a));
        int top = (p.row_of(s) == Row::Top) + (p.row_of(u) == Row::Top);
        t.rows.push_back({p.name(static_cast<Letter>(a)), std::to_string(top), std::to_string(2 - top)});
    }
    r.tables.emplace_back("letters.csv", t);
    if (!irreducible) {
        r.exit_code = 2;
        return r;
    }
    auto st = stratum(p);
    json orders = json::array();
    for (int k : st.orders) orders.push_back(std::to_string(k));
    r.result["stratum"] = st.str();
    r.result["orders"] = orders;
    r.result["genus"] = std::to_string(st.genus);
    r.result["excluded_stratum"] = is_excluded_stratum(st);
    auto dc = double_cover(p);
    r.result["double_cover"] = {{"plus_dimension", std::to_string(dc.plus_dimension)},
                                {"minus_dimension", std::to_string(dc.minus_dimension)},
                                {"connected", dc.connected}};
    return r;
}

inline Report run_induct(const Config& c, const Input& in) {
    Report r;
    auto t = involution_of(in, c.seed);
    const auto& p = t.permutation();
    r.result["permutation"] = perm_json(p);
    r.result["lengths"] = lengths_json(p, t.lengths());
    Table tab;
    tab.header = {"step", "row", "winner", "loser"};
    for (const auto& n : p.names()) tab.header.push_back(n);
    auto state = InductionState<QN>::from(t);
    for (std::size_t k = 1; k <= c.steps; ++k) {
        auto step = induction_step(state);
        state = step.next;
        const auto& a = step.move.arrow;
        std::vector<std::string> row{std::to_string(k), to_string(a.row), p.name(a.winner), p.name(a.loser)};
        for (const auto& x : state.lengths) row.push_back(num(x));
        tab.rows.push_back(std::move(row));
    }
    r.result["steps"] = std::to_string(c.steps);
    r.result["final_permutation"] = perm_json(state.perm());
    r.result["final_lengths"] = lengths_json(p, state.lengths);
    r.tables.emplace_back("induction.csv", tab);
    return r;
}

inline Report run_diagram(const Config&, const Input& in) {
    Report r;
    auto g = build_diagram(in.perm);
    Table vertices{{"vertex", "permutation"}, {}};
    for (std::size_t v = 0; v < g.vertices.size(); ++v) vertices.rows.push_back({std::to_string(v), g.vertices[v].key()});
    Table edges{{"edge", "source", "target", "row", "winner", "loser"}, {}};
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto& x = g.edges[e];
        const auto& p = g.vertices[x.source];
        edges.rows.push_back({std::to_string(e), std::to_string(x.source), std::to_string(x.target), to_string(x.arrow.row),
                              p.name(x.arrow.winner), p.name(x.arrow.loser)});
    }
    r.result["vertices"] = std::to_string(g.vertices.size());
    r.result["edges"] = std::to_string(g.edges.size());
    r.tables.emplace_back("edges.csv", edges);
    r.tables.emplace_back("vertices.csv", vertices);
    return r;
}

inline RothConfig roth_config(const Config& c) {
    RothConfig rc;
    rc.epsilon = c.epsilon;
    rc.c_epsilon = c.ceps;
    rc.theta = c.theta;
    rc.c = c.ceps;
    rc.horizon = c.steps;
    return rc;
}

inline Report run_roth(const Config& c, const Input& in) {
    Report r;
    auto t = involution_of(in, c.seed);
    r.result["lengths"] = lengths_json(t.permutation(), t.lengths());
    auto rep = roth_report(t, roth_config(c));
    r.result["blocks"] = std::to_string(rep.blocks);
    json a{{"c_matrix", num(rep.a.c_matrix)}, {"c_length", num(rep.a.c_length)}, {"pass", rep.verdict_a}};
    r.result["condition_a"] = a;
    json b{{"pass", rep.verdict_b}};
    if (rep.b) {
        b["theta_hat"] = num(rep.b->theta_hat);
        b["theta_min"] = num(rep.b->theta_min);
        b["c"] = num(rep.b->c);
    }
    r.result["condition_b"] = b;
    json cc{{"pass", rep.verdict_c}};
    if (rep.c) {
        cc["c_quotient"] = num(rep.c->c_quotient);
        cc["c_stable"] = num(rep.c->c_stable);
    }
    if (rep.stable) {
        cc["stable_dimension"] = std::to_string(rep.stable->dimension());
        cc["translation_bounded"] = rep.stable->translation_bounded;
    }
    r.result["condition_c"] = cc;
    r.result["notes"] = rep.notes;
    r.result["roth_type"] = rep.passes();
    Table tab{{"k", "norm_z", "norm_q", "ratio", "length_ratio", "length_form"}, {}};
    Series s{"k", "block", "ratio", "1", {}};
    for (const auto& row : rep.a.rows) {
        tab.rows.push_back({std::to_string(row.k), num(row.norm_z), num(row.norm_q), num(row.ratio), num(row.length_ratio),
                            num(row.length_form)});
        s.points.emplace_back(static_cast<double>(row.k), row.ratio);
    }
    r.tables.emplace_back("condition_a.csv", tab);
    r.plots.emplace_back("condition_a_ratio.csv", s);
    if (rep.b) {
        Table gap{{"k", "log_norm", "log_restricted_norm", "theta"}, {}};
        for (const auto& row : rep.b->rows)
            gap.rows.push_back({std::to_string(row.k), num(row.log_norm), num(row.log_restricted_norm), num(row.theta)});
        r.tables.emplace_back("condition_b.csv", gap);
    }
    r.exit_code = rep.passes() ? 0 : 2;
    return r;
}

inline Report run_lyapunov(const Config& c, const Input& in) {
    Report r;
    Table tab{{"family", "index", "exponent", "standard_error"}, {}};
    for (Family f : {Family::Plus, Family::Minus}) {
        auto est = lyapunov_exponents(in.perm, c.steps, f, c.seed);
        json e{{"blocks", std::to_string(est.blocks)}, {"bits", std::to_string(est.bits)}};
        json xs = json::array(), ses = json::array();
        for (std::size_t i = 0; i < est.exponents.size(); ++i) {
            xs.push_back(num(est.exponents[i]));
            ses.push_back(num(est.standard_errors[i]));
            tab.rows.push_back({to_string(f), std::to_string(i + 1), num(est.exponents[i]), num(est.standard_errors[i])});
        }
        e["exponents"] = xs;
        e["standard_errors"] = ses;
        r.result[to_string(f)] = e;
    }
    r.tables.emplace_back("exponents.csv", tab);
    return r;
}

inline Report run_solve(const Config& c, const Input& in) {
    Report r;
    auto t = involution_of(in, c.seed);
    const auto& p = t.permutation();
    r.result["lengths"] = lengths_json(p, t.lengths());
    std::vector<LetterSpec<QN>> specs;
    if (c.phi.empty()) {
        specs.push_back({p.name(0), LetterSpec<QN>::Kind::Poly, {QN(0), QN(1)}, {}, {}});
    }
    for (const auto& [letter, coeffs] : c.phi) {
        LetterSpec<QN> s{letter, LetterSpec<QN>::Kind::Poly, {}, {}, {}};
        for (const auto& x : coeffs) s.coeffs.push_back(parse_quadratic(x));
        specs.push_back(std::move(s));
    }
    auto phi = make_function(t, specs);
    SolveConfig sc;
    sc.horizon = c.steps;
    sc.tol = c.tol;
    sc.roth = roth_config(c);
    sc.orbit_length = c.samples;
    Solution<QN> sol;
    try {
        sol = solve(t, phi, sc);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DiagnosticsFailed) throw;
        r.result["refused"] = true;
        r.result["reason"] = error_record(e);
        r.exit_code = 2;
        return r;
    }
    r.result["refused"] = false;
    json chi = json::object(), chi_lp = json::object();
    for (std::size_t a = 0; a < sol.chi.size(); ++a) {
        chi[p.name(static_cast<Letter>(a))] = num(sol.chi[a]);
        chi_lp[p.name(static_cast<Letter>(a))] = num(sol.chi_lp[a]);
    }
    r.result["chi"] = chi;
    r.result["chi_lp"] = chi_lp;
    r.result["subtracted_mean"] = num(sol.subtracted_mean);
    r.result["convergence_gap"] = num(sol.convergence_gap);
    r.result["lp_value"] = num(sol.lp_value);
    r.result["stable_dimension"] = std::to_string(sol.stable_basis.size());
    r.result["bound"] = num(sol.bound);
    auto v = verify(t, phi, sol, sol.chi, c.samples);
    r.result["residual"] = num(v.residual);
    r.result["max_growth"] = num(v.max_growth);
    r.result["bounded"] = v.bounded;
    Table tab{{"lo", "hi", "max_abs", "growth"}, {}};
    Series s{"n", "iterations", "max_partial_sum", "1", {}};
    for (const auto& row : v.decades) {
        tab.rows.push_back({std::to_string(row.lo), std::to_string(row.hi), num(row.max_abs), num(row.growth)});
        s.points.emplace_back(static_cast<double>(row.hi), row.max_abs);
    }
    r.tables.emplace_back("decades.csv", tab);
    if (!s.points.empty()) r.plots.emplace_back("decades_plot.csv", s);
    r.exit_code = v.bounded ? 0 : 2;
    return r;
}

inline Report run_measure(const Config& c, const Input& in) {
    Report r;
    ConditionAConfig mc;
    mc.samples = c.samples;
    mc.horizon = c.steps;
    mc.epsilon = c.epsilon;
    mc.c_epsilon = c.ceps;
    mc.seed = c.seed;
    mc.threads = c.threads;
    auto res = montecarlo_condition_a(in.perm, mc);
    r.result["samples"] = std::to_string(mc.samples);
    r.result["valid"] = std::to_string(res.valid);
    r.result["passed"] = std::to_string(res.passed);
    r.result["ties"] = std::to_string(res.ties);
    r.result["fraction"] = num(res.fraction);
    r.result["wilson"] = {num(res.wilson.lo), num(res.wilson.hi)};
    Table tab{{"sample", "seed", "tie", "blocks", "c_matrix", "passed"}, {}};
    for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
        const auto& o = res.outcomes[i];
        tab.rows.push_back({std::to_string(i), std::to_string(o.seed), o.tie ? "1" : "0", std::to_string(o.blocks),
                            num(o.c_matrix), o.passed ? "1" : "0"});
    }
    r.tables.emplace_back("samples.csv", tab);
    if (c.qext_depth > 0) {
        auto g = build_diagram(in.perm);
        std::set<Letter> subset;
        for (const auto& n : c.subset) {
            Letter a = in.perm.find(n);
            if (a < 0) throw Error(ErrorCode::InvalidSubset, "unknown letter in subset", n);
            subset.insert(a);
        }
        auto q = check_qext_lemma(g, subset, c.qext_depth);
        json j{{"constant", std::to_string(q.constant)}, {"n_max", std::to_string(q.n_max)}, {"paths", std::to_string(q.paths)},
               {"prefixes", std::to_string(q.prefixes)}, {"max_ratio", num(q.max_ratio)}, {"pass", q.passes()},
               {"literal_max_ratio", num(q.literal_max_ratio)}, {"literal_violations", std::to_string(q.literal_violations)}};
        if (q.counterexample) {
            json e = json::array();
            for (auto x : q.counterexample->edges) e.push_back(std::to_string(x));
            j["counterexample"] = {{"start", std::to_string(q.counterexample->start)}, {"edges", e},
                                   {"q_ext", std::to_string(q.counterexample->q_ext)},
                                   {"q_prime", std::to_string(q.counterexample->q_prime)}};
        }
        r.result["qext"] = j;
        if (!q.passes()) r.exit_code = 2;
    }
    return r;
}

// ---------------------------------------------------------------------------

struct Outcome {
    int exit_code = 0;
    json summary; // {"config", "result"}; null on input errors
};

/// Runs one command, writes summary.json and the tables under config.out,
/// prints the summary (or the main table) to `out` and error records to
/// `err`. Exit 0 ok, 2 negative verdict, 1 input or runtime error.
inline Outcome run(const Config& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Outcome o;
    try {
        check(config);
        const Input in = parse_input(config.perm);
        Report rep;
        const auto& cmd = config.command;
        if (cmd == "validate") rep = run_validate(config, in);
        else if (cmd == "induct") rep = run_induct(config, in);
        else if (cmd == "diagram") rep = run_diagram(config, in);
        else if (cmd == "roth") rep = run_roth(config, in);
        else if (cmd == "lyapunov") rep = run_lyapunov(config, in);
        else if (cmd == "solve") rep = run_solve(config, in);
        else rep = run_measure(config, in);
        o.exit_code = rep.exit_code;
        o.summary = json{{"config", to_json(config)}, {"result", rep.result}};
        if (rep.exit_code == 2 && rep.result.contains("reason")) err << rep.result["reason"].dump() << "\n";
        const std::filesystem::path dir(config.out);
        for (const auto& [name, table] : rep.tables) write_atomic(dir / name, table.str());
        for (const auto& [name, series] : rep.plots) emit_plotdata(series, dir / name);
        write_atomic(dir / "summary.json", o.summary.dump(2) + "\n");
        if (config.format == "csv" && !rep.tables.empty()) out << rep.tables.front().second.str();
        else out << o.summary.dump(2) << "\n";
    } catch (const Error& e) {
        err << error_record(e).dump() << "\n";
        o.exit_code = e.code() == ErrorCode::DiagnosticsFailed ? 2 : 1;
    } catch (const std::exception& e) {
        err << json{{"code", "InvalidInput"}, {"message", e.what()}, {"context", ""}}.dump() << "\n";
        o.exit_code = 1;
    }
    return o;
}

} // namespace linvol::cli
