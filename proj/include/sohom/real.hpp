#pragma once

// Exact rationals, high-precision floats, and the tagged scalar that moves
// between them.  Everything in the piecewise-linear world stays in Rat;
// Float only appears once an irrational power is touched.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace sohom {

namespace mp = boost::multiprecision;

using Int = mp::number<mp::gmp_int, mp::et_off>;
using Rat = mp::number<mp::gmp_rational, mp::et_off>;
// 50 decimal digits, roughly 166 bits of mantissa.
using Float = mp::number<mp::mpfr_float_backend<50>, mp::et_off>;

/// Malformed textual input (rationals, JSON documents, CLI values).
struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A value outside the domain of an operation (negative x, epsilon <= 0, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Rat helpers

inline Int floor_rat(const Rat& q) {
  Int n = mp::numerator(q);
  Int d = mp::denominator(q);
  Int r;
  mpz_fdiv_q(r.backend().data(), n.backend().data(), d.backend().data());
  return r;
}

inline Int ceil_rat(const Rat& q) {
  Int n = mp::numerator(q);
  Int d = mp::denominator(q);
  Int r;
  mpz_cdiv_q(r.backend().data(), n.backend().data(), d.backend().data());
  return r;
}

inline std::string to_string(const Int& z) { return z.str(); }

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rat& q) {
  if (mp::denominator(q) == 1) return mp::numerator(q).str();
  return mp::numerator(q).str() + "/" + mp::denominator(q).str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline Int parse_int_digits(std::string_view s) {
  if (!all_digits(s)) throw ParseError("not an integer: '" + std::string(s) + "'");
  return Int(std::string(s));
}

}  // namespace detail

/// Accepts "p/q", "p", and plain decimals such as "-0.125" (converted exactly).
inline Rat parse_rat(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rat value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Int num = detail::parse_int_digits(s.substr(0, slash));
    Int den = detail::parse_int_digits(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    value = Rat(num, den);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw ParseError("not a number: '" + std::string(text) + "'");
    Int w = whole.empty() ? Int(0) : detail::parse_int_digits(whole);
    Int f = frac.empty() ? Int(0) : detail::parse_int_digits(frac);
    Int scale = mp::pow(Int(10), static_cast<unsigned>(frac.size()));
    value = Rat(w * scale + f, scale);
  } else {
    value = Rat(detail::parse_int_digits(s));
  }
  return negative ? Rat(-value) : value;
}

/// Exact k-th root of a nonnegative rational, when one exists.
inline std::optional<Rat> exact_root(const Rat& q, unsigned long k) {
  if (q < 0) return std::nullopt;
  if (k == 1) return q;
  Int n = mp::numerator(q);
  Int d = mp::denominator(q);
  Int rn, rd;
  if (!mpz_root(rn.backend().data(), n.backend().data(), k)) return std::nullopt;
  if (!mpz_root(rd.backend().data(), d.backend().data(), k)) return std::nullopt;
  return Rat(rn, rd);
}

/// The exact rational value of a binary float.
inline Rat exact_value(const Float& f) {
  Rat q;
  mpfr_get_q(q.backend().data(), f.backend().data());
  return q;
}

inline Float to_float(const Rat& q) { return Float(q); }

// ---------------------------------------------------------------------------
// Real: an exact rational, optionally plus a high-precision float tail.
//
// Keeping the exact part separate means huge exact values (eta over a
// geometric sequence far out) still cancel exactly in differences; only the
// tail carries rounding error.

class Real {
 public:
  Real() = default;
  Real(const Rat& q) : q_(q) {}                      // NOLINT(google-explicit-constructor)
  Real(const Float& f) : tail_(f) {}                 // NOLINT(google-explicit-constructor)
  Real(const Int& z) : q_(z) {}                      // NOLINT(google-explicit-constructor)
  Real(long long i) : q_(i) {}                       // NOLINT(google-explicit-constructor)
  Real(int i) : q_(i) {}                             // NOLINT(google-explicit-constructor)
  Real(const Rat& q, const Float& tail) : q_(q), tail_(tail) {}

  bool exact() const { return !tail_.has_value(); }

  const Rat& rat() const {
    if (!exact()) throw std::logic_error("Real::rat() on an inexact value");
    return q_;
  }

  /// Exact part and float tail (zero when exact).
  const Rat& exact_part() const { return q_; }
  Float tail() const { return tail_ ? *tail_ : Float(0); }

  Float as_float() const {
    if (!tail_) return to_float(q_);
    if (q_ == 0) return *tail_;
    return to_float(q_) + *tail_;
  }

  /// Exact rational value of whatever is stored (floats are dyadic).
  Rat as_rat() const {
    if (!tail_) return q_;
    return q_ + exact_value(*tail_);
  }

  double to_double() const { return as_float().convert_to<double>(); }

  int sign() const {
    if (!tail_) return q_.sign();
    if (q_ == 0) return tail_->sign();
    return as_rat().sign();
  }

  Real operator-() const {
    Real r;
    r.q_ = -q_;
    if (tail_) r.tail_ = Float(-*tail_);
    return r;
  }

  friend Real operator+(const Real& a, const Real& b) {
    Real r;
    r.q_ = a.q_ + b.q_;
    if (a.tail_ || b.tail_) r.tail_ = Float(a.tail() + b.tail());
    return r;
  }
  friend Real operator-(const Real& a, const Real& b) { return a + -b; }
  friend Real operator*(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return Real(Rat(a.q_ * b.q_));
    // Exact zero annihilates without degrading to float.
    if (a.exact() && a.q_ == 0) return Real(0);
    if (b.exact() && b.q_ == 0) return Real(0);
    // (p + s)(q + t) = pq + (pt + sq + st)
    Real r;
    r.q_ = a.q_ * b.q_;
    Float t = 0;
    if (b.tail_) t += to_float(a.q_) * *b.tail_;
    if (a.tail_) t += *a.tail_ * to_float(b.q_);
    if (a.tail_ && b.tail_) t += *a.tail_ * *b.tail_;
    r.tail_ = t;
    return r;
  }
  friend Real operator/(const Real& a, const Real& b) {
    if (b.sign() == 0) throw DomainError("division by zero");
    if (a.exact() && b.exact()) return Real(Rat(a.q_ / b.q_));
    if (a.exact() && a.q_ == 0) return Real(0);
    if (b.exact()) {
      Real r;
      r.q_ = a.q_ / b.q_;
      r.tail_ = Float(*a.tail_ / to_float(b.q_));
      return r;
    }
    return Real(Float(a.as_float() / b.as_float()));
  }
  Real& operator+=(const Real& o) { return *this = *this + o; }
  Real& operator-=(const Real& o) { return *this = *this - o; }
  Real& operator*=(const Real& o) { return *this = *this * o; }

  // Comparisons are exact: a float is compared through its dyadic value.
  friend bool operator==(const Real& a, const Real& b) {
    if (a.exact() && b.exact()) return a.q_ == b.q_;
    return (a - b).sign() == 0;
  }
  friend std::strong_ordering operator<=>(const Real& a, const Real& b) {
    int s;
    if (a.exact() && b.exact()) s = a.q_ < b.q_ ? -1 : (b.q_ < a.q_ ? 1 : 0);
    else s = (a - b).sign();
    if (s < 0) return std::strong_ordering::less;
    if (s > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// Decimal rendering with `digits` significant digits.
  std::string decimal(int digits = 12) const {
    return as_float().str(digits, std::ios_base::fmtflags(0));
  }

  /// "p/q" when exact, 12-digit decimal otherwise.
  std::string str(bool force_decimal = false) const {
    if (exact() && !force_decimal) return to_string(q_);
    return decimal(12);
  }

  friend std::ostream& operator<<(std::ostream& os, const Real& r) { return os << r.str(); }

 private:
  Rat q_ = 0;
  std::optional<Float> tail_;
};

inline Real abs(const Real& r) { return r.sign() < 0 ? -r : r; }
inline const Real& max(const Real& a, const Real& b) { return a < b ? b : a; }
inline const Real& min(const Real& a, const Real& b) { return b < a ? b : a; }

/// Nudges an inexact value upward by a relative 2^-120 of its float tail, so
/// that rounding in the last place can never make it an underestimate.
inline Real round_up(const Real& r) {
  if (r.exact()) return r;
  const Float t = r.tail();
  Float bump = mp::ldexp(Float(mp::abs(t)), -120);
  if (bump == 0) bump = mp::ldexp(Float(1), -150);
  return Real(r.exact_part(), Float(t + bump));
}

inline Real round_down(const Real& r) {
  if (r.exact()) return r;
  return -round_up(-r);
}

/// base^(p/q) for base >= 0; exact whenever base is a perfect q-th power.
inline Real pow_rat(const Real& base, const Rat& exponent) {
  if (base.sign() < 0) throw DomainError("pow_rat: negative base");
  if (base.sign() == 0) return exponent > 0 ? Real(0) : throw DomainError("pow_rat: 0^e with e <= 0");
  const Int p = mp::numerator(exponent);
  const Int q = mp::denominator(exponent);
  const Int mag = mp::abs(p);
  if (base.exact() && q.convert_to<unsigned long long>() == q && mag <= Int(std::uint64_t(1) << 20)) {
    if (auto root = exact_root(base.rat(), q.convert_to<unsigned long>())) {
      const auto e = mag.convert_to<unsigned>();
      const Int num = mp::pow(mp::numerator(*root), e);
      const Int den = mp::pow(mp::denominator(*root), e);
      return p.sign() < 0 ? Real(Rat(den, num)) : Real(Rat(num, den));
    }
  }
  const Float b = base.as_float();
  if (mag <= 64 && q <= Int(1u << 30)) {
    // b^(p/q) as the q-th root of b^|p|; much cheaper than exp(log()).
    Float r;
    mpfr_pow_ui(r.backend().data(), b.backend().data(), mag.convert_to<unsigned long>(), MPFR_RNDN);
    mpfr_rootn_ui(r.backend().data(), r.backend().data(), q.convert_to<unsigned long>(), MPFR_RNDN);
    if (p.sign() < 0) r = Float(1) / r;
    return Real(r);
  }
  return Real(Float(mp::pow(b, to_float(exponent))));
}

inline Real sqrt(const Real& r) { return pow_rat(r, Rat(1, 2)); }

/// Smallest integer >= r.  Inexact values are nudged up first, so the result
/// is never below the true ceiling.
inline Int ceil_real(const Real& r) {
  if (r.exact()) return ceil_rat(r.rat());
  return ceil_rat(round_up(r).as_rat());
}

inline Int floor_real(const Real& r) { return floor_rat(r.as_rat()); }

/// Rational upper bound of r; exact values pass through, floats are rounded
/// up to a dyadic with `bits` fractional bits.
inline Rat rat_upper_bound(const Real& r, unsigned bits = 64) {
  if (r.exact()) return r.rat();
  const Int scale = mp::pow(Int(2), bits);
  return Rat(ceil_rat(Rat(round_up(r).as_rat() * scale)), scale);
}

inline Rat rat_lower_bound(const Real& r, unsigned bits = 64) { return Rat(-rat_upper_bound(-r, bits)); }

/// |a - b| <= tol * max(1, |a|, |b|); exact equality when both are exact.
inline bool close(const Real& a, const Real& b, double tol) {
  if (a.exact() && b.exact()) return a.rat() == b.rat();
  const Float diff = mp::abs((a - b).as_float());
  const Float fa = mp::abs(a.as_float());
  const Float fb = mp::abs(b.as_float());
  Float scale = 1;
  if (scale < fa) scale = fa;
  if (scale < fb) scale = fb;
  return diff <= Float(tol) * scale;
}

/// Magnitude of the rounding-prone part of r (zero when exact).
inline Float tail_scale(const Real& r) { return mp::abs(r.tail()); }

inline Real parse_real(std::string_view text) { return Real(parse_rat(text)); }

}  // namespace sohom
