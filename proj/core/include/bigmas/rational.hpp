#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace bigmas {

/// Exact rational arithmetic for expression evaluation. Canonical form:
/// denominator > 0, gcd(|num|, den) == 1. All operations go through
/// 128-bit intermediates and fail (nullopt) instead of overflowing.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    bool is_integer() const { return den == 1; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }

    std::string str() const;
};

namespace rational {

inline __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

inline __int128 gcd128(__int128 a, __int128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// Normalizes num/den, rejecting results whose numerator or denominator
/// magnitude exceeds `limit`. den == 0 is the caller's error.
std::optional<Rational> make(__int128 num, __int128 den, std::int64_t limit);

std::optional<Rational> add(const Rational& a, const Rational& b, std::int64_t limit);
std::optional<Rational> sub(const Rational& a, const Rational& b, std::int64_t limit);
std::optional<Rational> mul(const Rational& a, const Rational& b, std::int64_t limit);
/// nullopt on overflow; division by zero must be screened by the caller.
std::optional<Rational> div(const Rational& a, const Rational& b, std::int64_t limit);

/// n! for 0 <= n <= max_operand, within the magnitude limit.
std::optional<std::int64_t> factorial(std::int64_t n, std::int64_t max_operand, std::int64_t limit);
/// n!! with 0!! = 1!! = 1 and n!! = n * (n-2)!!.
std::optional<std::int64_t> double_factorial(std::int64_t n, std::int64_t max_operand, std::int64_t limit);

} // namespace rational
} // namespace bigmas
