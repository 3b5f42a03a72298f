#pragma once

// Exact arithmetic in Q and in real quadratic fields Q(sqrt D).
// Used to carry rotation angles (in turns, i.e. units of 2*pi) so that the
// floors and ceilings of the iteration formulas never depend on rounding.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "errors.hpp"

namespace maslov {

using i128 = __int128;

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : n_(n), d_(1) {}  // NOLINT: implicit on purpose
  Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num() const { return n_; }
  std::int64_t den() const { return d_; }
  double to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }
  long double to_long_double() const {
    return static_cast<long double>(n_) / static_cast<long double>(d_);
  }
  bool is_zero() const { return n_ == 0; }
  int sign() const { return (n_ > 0) - (n_ < 0); }

  std::int64_t floor() const {
    std::int64_t q = n_ / d_;
    if (n_ % d_ != 0 && n_ < 0) --q;
    return q;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.n_) * b.d_ + i128(b.n_) * a.d_, i128(a.d_) * b.d_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.n_) * b.d_ - i128(b.n_) * a.d_, i128(a.d_) * b.d_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.n_ == 0) throw InputError("rational division by zero");
    return make(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
  }
  Rational operator-() const { return make(-i128(n_), d_); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.n_ == b.n_ && a.d_ == b.d_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.n_) * b.d_ < i128(b.n_) * a.d_;
  }

  std::string str() const {
    return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_);
  }

 private:
  static Rational make(i128 n, i128 d) {
    if (d == 0) throw InputError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    i128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr i128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim) throw ResonanceError("exact arithmetic overflow");
    Rational r;
    r.n_ = static_cast<std::int64_t>(n);
    r.d_ = static_cast<std::int64_t>(d);
    return r;
  }

  std::int64_t n_ = 0;
  std::int64_t d_ = 1;
};

// a + b*sqrt(radicand); radicand is a squarefree integer > 1, or 0 when b == 0.
class QuadSurd {
 public:
  QuadSurd() = default;
  QuadSurd(Rational a) : a_(a) {}  // NOLINT
  QuadSurd(Rational a, Rational b, std::int64_t radicand) : a_(a), b_(b), r_(radicand) {
    if (radicand < 2 && !b.is_zero()) throw InputError("quadratic surd needs a radicand >= 2");
    normalize();
  }

  static QuadSurd sqrt_of(std::int64_t radicand) { return {Rational(0), Rational(1), radicand}; }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  std::int64_t radicand() const { return r_; }
  bool is_rational() const { return b_.is_zero(); }

  long double to_long_double() const {
    return a_.to_long_double() + b_.to_long_double() * std::sqrt(static_cast<long double>(r_));
  }
  double value() const { return static_cast<double>(to_long_double()); }

  // Exact sign of a + b*sqrt(r).
  int sign() const {
    int sa = a_.sign(), sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    // opposite signs: compare a^2 with b^2 r
    Rational a2 = a_ * a_, b2r = b_ * b_ * Rational(r_);
    return b2r < a2 ? sa : sb;
  }

  std::int64_t floor() const {
    if (is_rational()) return a_.floor();
    auto n = static_cast<std::int64_t>(std::floor(to_long_double()));
    while ((*this - QuadSurd(Rational(n))).sign() < 0) --n;
    while ((*this - QuadSurd(Rational(n + 1))).sign() >= 0) ++n;
    return n;
  }
  std::int64_t ceil() const { return -(-*this).floor(); }

  QuadSurd frac() const { return *this - QuadSurd(Rational(floor())); }

  QuadSurd operator-() const { return {-a_, -b_, r_}; }
  friend QuadSurd operator+(const QuadSurd& x, const QuadSurd& y) {
    return {x.a_ + y.a_, x.b_ + y.b_, common(x, y)};
  }
  friend QuadSurd operator-(const QuadSurd& x, const QuadSurd& y) { return x + (-y); }
  friend QuadSurd operator*(const QuadSurd& x, const QuadSurd& y) {
    std::int64_t r = common(x, y);
    return {x.a_ * y.a_ + x.b_ * y.b_ * Rational(r), x.a_ * y.b_ + x.b_ * y.a_, r};
  }
  friend QuadSurd operator/(const QuadSurd& x, const QuadSurd& y) {
    std::int64_t r = common(x, y);
    Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * Rational(r);
    if (norm.is_zero()) throw InputError("quadratic surd division by zero");
    QuadSurd conj{y.a_, -y.b_, r};
    QuadSurd p = x * conj;
    return {p.a_ / norm, p.b_ / norm, r};
  }
  friend bool operator==(const QuadSurd& x, const QuadSurd& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && (x.b_.is_zero() || x.r_ == y.r_);
  }

  std::string str() const {
    if (is_rational()) return a_.str();
    return a_.str() + "+" + b_.str() + "*sqrt(" + std::to_string(r_) + ")";
  }

 private:
  static std::int64_t common(const QuadSurd& x, const QuadSurd& y) {
    if (x.b_.is_zero()) return y.r_;
    if (y.b_.is_zero()) return x.r_;
    if (x.r_ != y.r_) throw InputError("mixing different quadratic fields");
    return x.r_;
  }
  void normalize() {
    if (b_.is_zero()) r_ = 0;
  }

  Rational a_;
  Rational b_;
  std::int64_t r_ = 0;
};

// A rotation amount in turns (units of 2*pi), optionally known exactly.
struct Turns {
  double value = 0.0;
  std::optional<QuadSurd> exact;

  Turns() = default;
  Turns(double v) : value(v) {}  // NOLINT
  Turns(const QuadSurd& q) : value(q.value()), exact(q) {}  // NOLINT

  Turns times(std::int64_t k) const {
    if (exact) return Turns(*exact * QuadSurd(Rational(k)));
    return Turns(value * static_cast<double>(k));
  }
  Turns frac() const {
    if (exact) return Turns(exact->frac());
    double f = value - std::floor(value);
    return Turns(f >= 1.0 ? 0.0 : f);
  }
  Turns complement() const {  // 1 - x
    if (exact) return Turns(QuadSurd(Rational(1)) - *exact);
    return Turns(1.0 - value);
  }
};

// Is x a rational p/q with q <= q_max?
struct RootTest {
  bool rational = false;
  std::int64_t p = 0;
  std::int64_t q = 0;
  bool exact = false;  // decided by exact arithmetic rather than by the bound
};

inline constexpr std::int64_t kDefaultQmax = 1'000'000;
inline constexpr double kRootTol = 1e-13;

inline RootTest rational_turns(const Turns& x, std::int64_t q_max = kDefaultQmax) {
  RootTest out;
  if (x.exact) {
    out.exact = true;
    if (!x.exact->is_rational()) return out;
    out.rational = true;
    out.p = x.exact->a().num();
    out.q = x.exact->a().den();
    return out;
  }
  long double v = x.value;
  long double fl = std::floor(v);
  long double rem = v - fl;
  // continued-fraction convergents h/k of v
  std::int64_t h0 = 1, h1 = static_cast<std::int64_t>(fl), k0 = 0, k1 = 1;
  for (int it = 0; it < 64; ++it) {
    if (std::fabs(static_cast<double>(v - static_cast<long double>(h1) / k1)) <= kRootTol) {
      out.rational = true;
      out.p = h1;
      out.q = k1;
      return out;
    }
    if (rem < 1e-300L) break;
    long double inv = 1.0L / rem;
    long double a = std::floor(inv);
    rem = inv - a;
    if (a > 1e12L) break;
    auto ai = static_cast<std::int64_t>(a);
    i128 h2 = i128(ai) * h1 + h0, k2 = i128(ai) * k1 + k0;
    if (k2 > q_max) break;
    h0 = h1;
    h1 = static_cast<std::int64_t>(h2);
    k0 = k1;
    k1 = static_cast<std::int64_t>(k2);
  }
  return out;
}

inline constexpr double kCeilGuard = 1e-9;

// Exact value if known, else a rational surrogate when the angle is p/q with
// q <= q_max (continued fractions), else nothing.
inline std::optional<QuadSurd> exact_or_surrogate(const Turns& x) {
  if (x.exact) return x.exact;
  RootTest rt = rational_turns(x);
  if (rt.rational) return QuadSurd(Rational(rt.p, rt.q));
  return std::nullopt;
}

namespace detail {
inline long double guarded_product(const Turns& x, std::int64_t k, const char* what) {
  long double y = static_cast<long double>(x.value) * k;
  long double r = std::nearbyint(y);
  if (std::fabs(static_cast<double>(y - r)) < kCeilGuard)
    throw ResonanceError(std::string("resonant ") + what + ": k*theta/2pi = " + std::to_string(static_cast<double>(y)) +
                         " is within 1e-9 of an integer; exact angle input required");
  return y;
}
}  // namespace detail

// ceil(k*x), exact when possible, otherwise refused inside the guard band.
inline std::int64_t ceil_times(const Turns& x, std::int64_t k) {
  if (auto q = exact_or_surrogate(x)) return (*q * QuadSurd(Rational(k))).ceil();
  return static_cast<std::int64_t>(std::ceil(detail::guarded_product(x, k, "ceiling")));
}

inline std::int64_t floor_times(const Turns& x, std::int64_t k) {
  if (auto q = exact_or_surrogate(x)) return (*q * QuadSurd(Rational(k))).floor();
  return static_cast<std::int64_t>(std::floor(detail::guarded_product(x, k, "floor")));
}

// exp(2 pi i x)^k == 1 ?
inline bool is_kth_root(const Turns& x, std::int64_t k) {
  if (auto q = exact_or_surrogate(x)) {
    QuadSurd y = *q * QuadSurd(Rational(k));
    return y.is_rational() && y.a().den() == 1;
  }
  detail::guarded_product(x, k, "root-of-unity test");
  return false;
}

}  // namespace maslov
