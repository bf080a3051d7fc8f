#pragma once

// The concave piecewise-linear function eta_a built from a strictly
// increasing sequence a:
//
//   eta_a(x) = x + 1                               on [0, a_2]
//   eta_a(x) = eta_a(a_n) + (x - a_n) / n          on [a_n, a_{n+1}], n >= 2
//
// An optional depth d truncates the construction to the finite stage eta^d
// (eta^0 = tau, and eta^d keeps slope 1/d from a_d onward).
//
// Prefix values eta_a(a_n) are accumulated lazily and memoized at
// checkpoints; breakpoints are only materialized up to the largest query.
// Far out on an affine sequence the prefix is a harmonic number, and eval()
// switches to the digamma closed form in Float instead.

#include "sohom/real.hpp"
#include "sohom/seq.hpp"

#include <cstddef>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace sohom {

class EtaFunction {
 public:
  // Exact prefix values needed beyond this index throw DomainError; the
  // rational denominators grow like lcm(1..n).
  static constexpr std::size_t kPrefixBudget = 200'000;
  // Affine sequences go inexact past this index.
  static constexpr std::size_t kExactAffine = 50'000;

  explicit EtaFunction(Seq seq, std::optional<std::size_t> depth = std::nullopt)
      : seq_(std::move(seq)), depth_(depth) {}

  const Seq& seq() const { return seq_; }
  const std::optional<std::size_t>& depth() const { return depth_; }

  std::size_t cap() const { return depth_ ? *depth_ : static_cast<std::size_t>(-1); }

  /// Index n of the segment [a_n, a_{n+1}) containing x, capped by depth;
  /// 0 means x < a_1 (or depth 0).
  std::size_t segment(const Rat& x) const { return seq_.count_le(x, cap()); }

  /// eta_a(a_n) for n >= 1.
  Rat prefix(std::size_t n) const {
    if (n > kPrefixBudget)
      throw DomainError("eta evaluation needs more than " + std::to_string(kPrefixBudget) + " breakpoints");
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto& c = *cache_;
    if (c.frontier_n == 0) {
      c.frontier_n = 1;
      c.frontier = Rat(seq_.at(1)) + 1;
      c.checkpoints.emplace(1, c.frontier);
    }
    if (n >= c.frontier_n) {
      while (c.frontier_n < n) advance(c.frontier, c.frontier_n);
      return c.frontier;
    }
    auto it = std::prev(c.checkpoints.upper_bound(n));
    std::size_t k = it->first;
    Rat value = it->second;
    while (k < n) advance_local(value, k);
    return value;
  }

  /// Slope of the segment starting at a_n (n = 0 means before a_1).
  Rat slope_of_segment(std::size_t n) const { return n <= 1 ? Rat(1) : Rat(1, static_cast<long>(n)); }

  /// eta(x), exact.  Throws DomainError once the prefix budget is exceeded.
  Rat value(const Rat& x) const {
    if (x < 0) throw DomainError("eta evaluated at negative x");
    const std::size_t n = segment(x);
    if (n <= 1) return x + 1;
    if (seq_.kind() == SeqKind::Affine && n > kExactAffine)
      throw DomainError("exact eta evaluation needs more than " + std::to_string(kExactAffine) + " breakpoints");
    return prefix(n) + (x - Rat(seq_.at(n))) / Rat(static_cast<long>(n));
  }

  /// True when value(x) can be computed exactly within the budget.
  bool exact_at(const Rat& x) const {
    if (x < 0) return true;
    const std::size_t n = segment(x);
    return n <= (seq_.kind() == SeqKind::Affine ? kExactAffine : kPrefixBudget);
  }

  /// eta(x): exact when exact_at(x), otherwise a Float from
  /// eta(a_n) = a_1 + 1 + step * H_{n-1} with H_m = digamma(m + 1) + gamma.
  Real eval(const Rat& x) const {
    if (exact_at(x)) return Real(value(x));
    return closed_form(x);
  }

  /// Like eval(), but takes the closed form early on affine sequences, where
  /// exact prefixes are costly.  For callers that want floats anyway.
  Real eval_fast(const Rat& x) const {
    if (seq_.kind() == SeqKind::Affine && x >= 0 && affine_index(x) > Int(kFastAffine)) return closed_form(x);
    return eval(x);
  }

  /// Right-hand slope at x, an upper bound for the slope on [x, infinity).
  Rat right_slope(const Rat& x) const {
    if (seq_.kind() == SeqKind::Affine && !depth_ && x >= Rat(seq_.start())) {
      const Int n = floor_rat(Rat((x - Rat(seq_.start())) / Rat(seq_.step()))) + 1;
      return n <= 1 ? Rat(1) : Rat(Int(1), n);
    }
    return slope_of_segment(segment(x));
  }

  /// Smallest breakpoint a_n (n >= 2, n <= depth) strictly inside (lo, hi).
  std::optional<Rat> first_breakpoint_in(const Rat& lo, const Rat& hi) const {
    if (seq_.kind() == SeqKind::Affine) {
      const Rat start(seq_.start()), step(seq_.step());
      Int n = lo < start ? Int(1) : floor_rat(Rat((lo - start) / step)) + 2;
      if (n < 2) n = 2;
      if (depth_ && n > Int(*depth_)) return std::nullopt;
      const Rat a(seq_.start() + seq_.step() * (n - 1));
      if (lo < a && a < hi) return a;
      return std::nullopt;
    }
    const std::size_t n = std::max<std::size_t>(segment(lo) + 1, 2);
    if (n > cap() || !seq_.can_index(n)) return std::nullopt;
    const Rat a(seq_.at(n));
    if (lo < a && a < hi) return a;
    return std::nullopt;
  }

  /// Breakpoints a_n (n >= 2, n <= depth) lying strictly inside (lo, hi).
  std::vector<Rat> breakpoints_in(const Rat& lo, const Rat& hi) const {
    std::vector<Rat> out;
    std::size_t n = std::max<std::size_t>(segment(lo) + 1, 2);
    const std::size_t last = cap();
    while (n <= last && seq_.can_index(n)) {
      Rat a(seq_.at(n));
      if (!(a < hi)) break;
      if (lo < a) out.push_back(std::move(a));
      ++n;
    }
    return out;
  }

 private:
  static constexpr std::size_t kFastAffine = 128;

  // Segment index on an affine sequence, as an Int: it can pass 2^64.
  Int affine_index(const Rat& x) const {
    if (x < Rat(seq_.start())) return Int(0);
    Int n = floor_rat(Rat((x - Rat(seq_.start())) / Rat(seq_.step()))) + 1;
    if (depth_ && n > Int(*depth_)) n = Int(*depth_);
    return n;
  }

  // eta(a_n) = a_1 + 1 + step * H_{n-1}, H_m = digamma(m + 1) + gamma.
  Real closed_form(const Rat& x) const {
    const Int n = affine_index(x);
    if (n <= 1) return Real(Rat(x + 1));
    const Float harmonic = harmonic_before(n);
    const Rat a_n(seq_.start() + seq_.step() * (n - 1));
    const Rat exact_part = Rat(seq_.start()) + 1 + (x - a_n) / Rat(n);
    return Real(exact_part, Float(to_float(Rat(seq_.step())) * harmonic));
  }

  // H_{n-1} = digamma(n) + gamma.  Past n = 128 the asymptotic series
  //   digamma(n) = ln n - 1/(2n) - sum_k B_2k / (2k n^2k)
  // with 15 terms is below the float resolution.
  static Float harmonic_before(const Int& n) {
    // Neighbouring queries usually share a segment.
    thread_local Int last_n = 0;
    thread_local Float last_h;
    if (n == last_n) return last_h;
    static const Float euler = [] {
      Float g;
      mpfr_const_euler(g.backend().data(), MPFR_RNDN);
      return g;
    }();
    const Float x(n);
    Float psi;
    if (n <= 128) {
      mpfr_digamma(psi.backend().data(), x.backend().data(), MPFR_RNDN);
    } else {
      // B_2k / 2k for k = 1..15.
      static const std::vector<Float> coeff = [] {
        const Rat b[] = {Rat(1, 6),        Rat(-1, 30),           Rat(1, 42),       Rat(-1, 30),
                         Rat(5, 66),       Rat(-691, 2730),       Rat(7, 6),        Rat(-3617, 510),
                         Rat(43867, 798),  Rat(-174611, 330),     Rat(854513, 138), Rat(-236364091, 2730),
                         Rat(8553103, 6),  Rat(Int("-23749461029"), Int(870)),    Rat(Int("8615841276005"), Int(14322))};
        std::vector<Float> out;
        for (long k = 1; k <= 15; ++k) out.push_back(to_float(Rat(b[k - 1] / Rat(2 * k))));
        return out;
      }();
      const Float inv2 = Float(1) / (x * x);
      Float power = inv2;
      Float series = 0;
      for (const Float& c : coeff) {
        series += c * power;
        power *= inv2;
      }
      psi = mp::log(x) - Float(1) / (2 * x) - series;
    }
    last_n = n;
    last_h = psi + euler;
    return last_h;
  }

  // Dense checkpoints early on, sparse once the rationals get long.
  static bool checkpoint_at(std::size_t k) {
    return (k - 1) % (k <= 65'536 ? 16 : 512) == 0;
  }

  struct Cache {
    std::mutex mu;
    std::size_t frontier_n = 0;  // highest n with a computed prefix
    Rat frontier;                // eta(a_{frontier_n})
    std::map<std::size_t, Rat> checkpoints;  // n -> eta(a_n)
  };

  // P_{k+1} = P_k + (a_{k+1} - a_k) / k
  void advance(Rat& value, std::size_t& k) const {
    advance_local(value, k);
    if (checkpoint_at(k)) cache_->checkpoints.emplace(k, value);
  }

  void advance_local(Rat& value, std::size_t& k) const {
    value += Rat(seq_.at(k + 1) - seq_.at(k)) / Rat(static_cast<long>(k));
    ++k;
  }

  Seq seq_;
  std::optional<std::size_t> depth_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace sohom
