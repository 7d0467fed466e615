#pragma once

#include <gmpxx.h>

#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

namespace posrate {

/// Exact rational track. All incidence-algebra identities are checked here.
using Rational = mpq_class;

/// Parses "p/q", "p", or a finite decimal such as "0.35" or "-1e-3" exactly.
Rational parse_rational(std::string_view text);

/// Always "p/q" in lowest terms, with q = 1 written explicitly.
std::string to_string(const Rational& value);

Rational rational_from_double(double value);  // exact binary expansion
Rational pow(const Rational& base, unsigned exponent);
Rational binomial(unsigned n, unsigned k);

inline double to_double(const Rational& value) { return value.get_d(); }
inline double to_double(double value) { return value; }

template <class T>
concept Scalar = std::same_as<T, Rational> || std::same_as<T, double>;

template <Scalar T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <Scalar T>
T scalar_from(const Rational& value) {
  if constexpr (is_exact_v<T>) {
    return value;
  } else {
    return value.get_d();
  }
}

template <Scalar T>
T abs_value(const T& value) {
  if constexpr (is_exact_v<T>) {
    return abs(value);
  } else {
    return value < 0 ? -value : value;
  }
}

}  // namespace posrate
