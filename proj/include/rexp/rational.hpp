#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace rexp {

// Exact rational arithmetic for cylinder masses and total-variation sums.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

// "3/4" for proper fractions, "3" for integers.
inline std::string fraction_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

// Every finite double is a dyadic rational; the conversion is exact.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
    return Rational(x);
}

// Parses "3/4", "2" or a decimal literal like "0.05" (exact: 5/100).
inline Rational parse_fraction(const std::string& s) {
    // cpp_int reads a leading 0 as an octal prefix; parse digit strings in
    // base 10 explicitly.
    auto parse_int = [](std::string t) -> BigInt {
        bool neg = false;
        if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
            neg = t[0] == '-';
            t = t.substr(1);
        }
        if (t.empty()) throw std::invalid_argument("parse_fraction: empty number");
        BigInt v = 0;
        for (char c : t) {
            if (c < '0' || c > '9')
                throw std::invalid_argument("parse_fraction: bad digit in '" + t + "'");
            v = v * 10 + (c - '0');
        }
        return neg ? BigInt(-v) : v;
    };
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num = parse_int(s.substr(0, slash));
        BigInt den = parse_int(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_fraction: zero denominator in '" + s + "'");
        return Rational(num, den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        size_t frac_len = s.size() - dot - 1;
        BigInt num = parse_int(digits);
        BigInt den = 1;
        for (size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(num, den);
    }
    return Rational(parse_int(s));
}

inline Rational pow2(long long e) {
    if (e >= 0) return Rational(BigInt(1) << e);
    return Rational(1, BigInt(1) << (-e));
}

}  // namespace rexp
