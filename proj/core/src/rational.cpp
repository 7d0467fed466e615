#include "posrate/rational.hpp"

#include <cctype>
#include <cmath>

#include "posrate/error.hpp"

namespace posrate {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Rational parse_integer(std::string_view s) {
  std::string_view body = s;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    body.remove_prefix(1);
  }
  if (!all_digits(body)) raise(ErrorKind::Parse, "not an integer: '" + std::string(s) + "'");
  std::string owned(s);
  if (!owned.empty() && owned.front() == '+') owned.erase(0, 1);
  return Rational(mpz_class(owned, 10));
}

Rational parse_decimal(std::string_view s) {
  bool negative = false;
  std::string_view rest = s;
  if (!rest.empty() && (rest.front() == '-' || rest.front() == '+')) {
    negative = rest.front() == '-';
    rest.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = rest.find_first_of("eE"); e != std::string_view::npos) {
    Rational ex = parse_integer(rest.substr(e + 1));
    exponent = ex.get_num().get_si();
    rest = rest.substr(0, e);
  }
  std::string digits;
  long frac_len = 0;
  bool seen_point = false;
  for (char c : rest) {
    if (c == '.') {
      if (seen_point) raise(ErrorKind::Parse, "bad decimal '" + std::string(s) + "'");
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_len;
    } else {
      raise(ErrorKind::Parse, "bad decimal '" + std::string(s) + "'");
    }
  }
  if (digits.empty()) raise(ErrorKind::Parse, "bad decimal '" + std::string(s) + "'");
  Rational value{mpz_class(digits, 10)};
  long shift = exponent - frac_len;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  if (shift >= 0) {
    value *= Rational(ten_pow);
  } else {
    value /= Rational(ten_pow);
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) raise(ErrorKind::Parse, "empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_integer(text.substr(0, slash));
    Rational den = parse_integer(text.substr(slash + 1));
    if (den == 0) raise(ErrorKind::Parse, "zero denominator in '" + std::string(text) + "'");
    Rational out = num / den;
    out.canonicalize();
    return out;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) raise(ErrorKind::InvalidArgument, "non-finite double");
  return Rational(value);
}

Rational pow(const Rational& base, unsigned exponent) {
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

Rational binomial(unsigned n, unsigned k) {
  if (k > n) return Rational(0);
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return Rational(out);
}

}  // namespace posrate
