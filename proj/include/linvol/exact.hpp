#pragma once

// Exact number types used by the dynamical core: arbitrary-precision
// integers and rationals (GMP via Boost.Multiprecision) and elements of a
// real quadratic field Q(sqrt(D)).

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "linvol/error.hpp"

namespace linvol {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

inline Rational make_rational(const BigInt& p, const BigInt& q) {
    return Rational(p, q);
}

/// floor(r) for a rational r.
inline BigInt floor(const Rational& r) {
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (num < 0 && q * den != num) q -= 1;
    return q;
}

inline BigInt isqrt(const BigInt& n) {
    if (n <= 0) return BigInt(0);
    return boost::multiprecision::sqrt(n);
}

inline std::string to_string(const BigInt& n) { return n.str(); }

inline std::string to_string(const Rational& r) {
    BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + den.str();
}

/// Parses "p" or "p/q".
inline Rational parse_rational(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) throw Error(ErrorCode::InvalidInput, "empty rational literal");
    auto valid_int = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto as_int = [&](std::string_view s) {
        s = trim(s);
        if (!valid_int(s)) throw Error(ErrorCode::InvalidInput, "bad integer literal", std::string(s));
        if (s[0] == '+') s.remove_prefix(1);
        return BigInt(std::string(s));
    };
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(as_int(text));
    BigInt den = as_int(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::InvalidInput, "zero denominator", std::string(text));
    return Rational(as_int(text.substr(0, slash)), den);
}

/// Element a + b*sqrt(D) of a real quadratic field. D == 0 marks a plain
/// rational (b == 0); mixing two different radicands is an error.
class QuadraticNumber {
public:
    QuadraticNumber() = default;
    QuadraticNumber(int v) : a_(v) {}                     // NOLINT
    QuadraticNumber(long v) : a_(v) {}                    // NOLINT
    QuadraticNumber(long long v) : a_(v) {}               // NOLINT
    QuadraticNumber(const BigInt& v) : a_(v) {}           // NOLINT
    QuadraticNumber(const Rational& v) : a_(v) {}         // NOLINT
    QuadraticNumber(Rational a, Rational b, std::int64_t radicand)
        : a_(std::move(a)), b_(std::move(b)), d_(radicand) {
        if (b_ != 0 && d_ <= 1)
            throw Error(ErrorCode::InvalidInput, "radicand must be a positive non-square");
        if (b_ != 0) {
            auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(d_))));
            for (std::int64_t s = std::max<std::int64_t>(r - 2, 0); s <= r + 2; ++s)
                if (s * s == d_) throw Error(ErrorCode::InvalidInput, "radicand is a perfect square");
        }
        if (b_ == 0) d_ = 0;
    }

    static QuadraticNumber sqrt_of(std::int64_t radicand) {
        return QuadraticNumber(Rational(0), Rational(1), radicand);
    }

    const Rational& rational_part() const { return a_; }
    const Rational& radical_part() const { return b_; }
    std::int64_t radicand() const { return d_; }
    bool is_rational() const { return b_ == 0; }

    int sign() const {
        int sa = a_.sign();
        int sb = b_.sign();
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        Rational lhs = a_ * a_;
        Rational rhs = b_ * b_ * Rational(d_);
        return lhs > rhs ? sa : sb;
    }

    QuadraticNumber operator-() const { return raw(-a_, -b_, d_); }

    friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
        return raw(x.a_ + y.a_, x.b_ + y.b_, common(x, y));
    }
    friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) {
        return raw(x.a_ - y.a_, x.b_ - y.b_, common(x, y));
    }
    friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
        std::int64_t d = common(x, y);
        return raw(x.a_ * y.a_ + x.b_ * y.b_ * Rational(d), x.a_ * y.b_ + x.b_ * y.a_, d);
    }
    friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
        std::int64_t d = common(x, y);
        Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * Rational(d);
        if (norm == 0) throw Error(ErrorCode::InvalidInput, "division by zero");
        QuadraticNumber conj = raw(y.a_, -y.b_, d);
        QuadraticNumber num = x * conj;
        return raw(num.a_ / norm, num.b_ / norm, d);
    }
    QuadraticNumber& operator+=(const QuadraticNumber& o) { return *this = *this + o; }
    QuadraticNumber& operator-=(const QuadraticNumber& o) { return *this = *this - o; }
    QuadraticNumber& operator*=(const QuadraticNumber& o) { return *this = *this * o; }
    QuadraticNumber& operator/=(const QuadraticNumber& o) { return *this = *this / o; }

    friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && (x.b_ == 0 || x.d_ == y.d_);
    }
    friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) { return (x - y).sign() < 0; }
    friend bool operator>(const QuadraticNumber& x, const QuadraticNumber& y) { return y < x; }
    friend bool operator<=(const QuadraticNumber& x, const QuadraticNumber& y) { return !(y < x); }
    friend bool operator>=(const QuadraticNumber& x, const QuadraticNumber& y) { return !(x < y); }

    double to_double() const {
        return a_.convert_to<double>() + b_.convert_to<double>() * std::sqrt(static_cast<double>(d_));
    }

    /// floor(a + b sqrt(D)), exact.
    BigInt floor() const {
        if (b_ == 0) return linvol::floor(a_);
        // floor(|b| sqrt D) = isqrt(floor(b^2 D)); the true floor lies within
        // a couple of units of floor(a) +/- that value.
        BigInt root = isqrt(linvol::floor(b_ * b_ * Rational(d_)));
        BigInt guess = linvol::floor(a_) + (b_ > 0 ? root : BigInt(-root));
        BigInt n = guess - 3;
        while (QuadraticNumber(Rational(n + 1)) <= *this) n += 1;
        return n;
    }

    std::string str() const {
        if (b_ == 0) return to_string(a_);
        std::string out;
        if (a_ != 0) out = to_string(a_);
        Rational mag = b_ < 0 ? Rational(-b_) : b_;
        if (b_ < 0) out += "-";
        else if (!out.empty()) out += "+";
        if (mag != 1) out += to_string(mag);
        out += "√" + std::to_string(d_);
        return out;
    }

private:
    static QuadraticNumber raw(Rational a, Rational b, std::int64_t d) {
        QuadraticNumber q;
        q.a_ = std::move(a);
        q.b_ = std::move(b);
        q.d_ = q.b_ == 0 ? 0 : d;
        return q;
    }
    static std::int64_t common(const QuadraticNumber& x, const QuadraticNumber& y) {
        if (x.d_ == 0) return y.d_;
        if (y.d_ == 0 || x.d_ == y.d_) return x.d_;
        throw Error(ErrorCode::FieldMismatch, "operands live in different quadratic fields");
    }

    Rational a_{0};
    Rational b_{0};
    std::int64_t d_ = 0;
};

inline std::string to_string(const QuadraticNumber& q) { return q.str(); }

/// Parses "p/q", "a+b√D", "a-b√D", "b√D", "√D" ("sqrt" accepted for "√").
inline QuadraticNumber parse_quadratic(std::string_view text) {
    std::string s;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == ' ') continue;
        if (text.compare(i, 3, "√") == 0) { s += 'r'; i += 2; continue; }
        if (text.compare(i, 4, "sqrt") == 0) { s += 'r'; i += 3; continue; }
        s += text[i];
    }
    auto r = s.find('r');
    if (r == std::string::npos) return QuadraticNumber(parse_rational(s));
    std::string radicand = s.substr(r + 1);
    if (!radicand.empty() && radicand.front() == '(' && radicand.back() == ')')
        radicand = radicand.substr(1, radicand.size() - 2);
    if (radicand.empty()) throw Error(ErrorCode::InvalidInput, "missing radicand", std::string(text));
    std::int64_t d = 0;
    try {
        d = std::stoll(radicand);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, "bad radicand", std::string(text));
    }
    std::string head = s.substr(0, r);
    // split head into rational part and coefficient at the last sign that is
    // not in leading position
    std::size_t split = std::string::npos;
    for (std::size_t i = head.size(); i-- > 1;)
        if (head[i] == '+' || head[i] == '-') { split = i; break; }
    Rational a(0), b(1);
    std::string coeff = split == std::string::npos ? head : head.substr(split);
    if (split != std::string::npos) a = parse_rational(head.substr(0, split));
    if (coeff.empty() || coeff == "+") b = 1;
    else if (coeff == "-") b = -1;
    else b = parse_rational(coeff);
    return QuadraticNumber(a, b, d);
}

// Uniform access for the number types the core is instantiated with.
template <class T>
struct NumberTraits;

template <>
struct NumberTraits<BigInt> {
    static BigInt floor_div(const BigInt& a, const BigInt& b) {
        BigInt q = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
        return q;
    }
    static double to_double(const BigInt& x) { return x.convert_to<double>(); }
    static std::string str(const BigInt& x) { return x.str(); }
    static Rational to_rational(const BigInt& x) { return Rational(x); }
    static int sign(const BigInt& x) { return x.sign(); }
    static constexpr bool is_field = false;
};

template <>
struct NumberTraits<Rational> {
    static BigInt floor_div(const Rational& a, const Rational& b) { return linvol::floor(a / b); }
    static double to_double(const Rational& x) { return x.convert_to<double>(); }
    static std::string str(const Rational& x) { return to_string(x); }
    static Rational to_rational(const Rational& x) { return x; }
    static int sign(const Rational& x) { return x.sign(); }
    static constexpr bool is_field = true;
};

template <>
struct NumberTraits<QuadraticNumber> {
    static BigInt floor_div(const QuadraticNumber& a, const QuadraticNumber& b) { return (a / b).floor(); }
    static double to_double(const QuadraticNumber& x) { return x.to_double(); }
    static std::string str(const QuadraticNumber& x) { return x.str(); }
    static Rational to_rational(const QuadraticNumber& x) {
        if (!x.is_rational()) throw Error(ErrorCode::FieldMismatch, "value is irrational");
        return x.rational_part();
    }
    static int sign(const QuadraticNumber& x) { return x.sign(); }
    static constexpr bool is_field = true;
};

template <class T>
double to_double(const T& x) { return NumberTraits<T>::to_double(x); }

/// Exact rational value of a finite double.
inline Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite value");
    int exp = 0;
    double mant = std::frexp(v, &exp);
    // 2^53 * mant is an integer
    auto m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(m);
    if (exp > 0) r *= Rational(BigInt(1) << exp);
    else if (exp < 0) r /= Rational(BigInt(1) << (-exp));
    return r;
}

} // namespace linvol
