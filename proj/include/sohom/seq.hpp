#pragma once

// Strictly increasing sequences of naturals, 1-indexed.
//
// Closed-form kinds (affine, geometric) index in O(1); explicit lists are
// finite and refuse to extrapolate; rule-backed sequences are generated
// lazily from a_{n} = next(n, a_{n-1}) and memoized.

#include "sohom/real.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sohom {

/// Raised when a finite (explicit) sequence is indexed past its end, or a
/// lazy sequence would have to be materialized beyond the term budget.
struct SeqExhausted : std::out_of_range {
  using std::out_of_range::out_of_range;
};

enum class SeqKind { Explicit, Affine, Geometric, Rule };

class Seq {
 public:
  using Next = std::function<Int(std::size_t n, const Int& prev)>;

  // Upper bound on terms a rule-backed sequence will materialize.
  static constexpr std::size_t kTermBudget = 2'000'000;

  static Seq explicit_list(std::vector<Int> values) {
    if (values.empty()) throw DomainError("explicit sequence must be nonempty");
    if (values.front() < 1) throw DomainError("sequence terms must be natural numbers (>= 1)");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i - 1] < values[i])) throw DomainError("sequence must be strictly increasing");
    auto impl = std::make_shared<Impl>();
    impl->kind = SeqKind::Explicit;
    impl->values = std::move(values);
    return Seq(std::move(impl));
  }

  static Seq affine(Int start, Int step) {
    if (start < 1) throw DomainError("affine sequence start must be >= 1");
    if (step < 1) throw DomainError("affine sequence step must be >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = SeqKind::Affine;
    impl->start = std::move(start);
    impl->param = std::move(step);
    return Seq(std::move(impl));
  }

  static Seq geometric(Int start, Int ratio) {
    if (start < 1) throw DomainError("geometric sequence start must be >= 1");
    if (ratio < 2) throw DomainError("geometric sequence ratio must be >= 2");
    auto impl = std::make_shared<Impl>();
    impl->kind = SeqKind::Geometric;
    impl->start = std::move(start);
    impl->param = std::move(ratio);
    return Seq(std::move(impl));
  }

  /// a_n = next(n, a_{n-1}) with a_0 = seed.  `next` must produce a strictly
  /// increasing sequence of naturals; violations throw std::logic_error.
  static Seq rule(std::string description, Next next, Int seed = 0) {
    auto impl = std::make_shared<Impl>();
    impl->kind = SeqKind::Rule;
    impl->description = std::move(description);
    impl->next = std::move(next);
    impl->start = std::move(seed);
    return Seq(std::move(impl));
  }

  SeqKind kind() const { return impl_->kind; }
  const std::string& description() const { return impl_->description; }

  /// Parameters of closed-form kinds.
  const Int& start() const { return impl_->start; }
  const Int& step() const { return impl_->param; }
  const Int& ratio() const { return impl_->param; }
  const std::vector<Int>& values() const { return impl_->values; }

  /// Number of terms, for explicit lists only.
  std::optional<std::size_t> length() const {
    if (impl_->kind == SeqKind::Explicit) return impl_->values.size();
    return std::nullopt;
  }

  bool can_index(std::size_t n) const {
    return n >= 1 && (impl_->kind != SeqKind::Explicit || n <= impl_->values.size());
  }

  static constexpr std::size_t kMaxGeometricExponent = std::size_t(1) << 24;

  /// a_n, 1-indexed.
  Int at(std::size_t n) const {
    if (n == 0) throw std::out_of_range("sequences are 1-indexed");
    switch (impl_->kind) {
      case SeqKind::Explicit:
        if (n > impl_->values.size())
          throw SeqExhausted("explicit sequence has " + std::to_string(impl_->values.size()) +
                             " terms; index " + std::to_string(n) + " requested");
        return impl_->values[n - 1];
      case SeqKind::Affine:
        return impl_->start + impl_->param * Int(n - 1);
      case SeqKind::Geometric:
        // Beyond 2^24 terms the values run to megabytes of digits.
        if (n - 1 > kMaxGeometricExponent)
          throw DomainError("geometric term a_" + std::to_string(n) + " is too large to materialize");
        return impl_->start * mp::pow(impl_->param, static_cast<unsigned>(n - 1));
      case SeqKind::Rule:
        return rule_at(n);
    }
    throw std::logic_error("unreachable");
  }

  /// Largest n <= cap with a_n <= x (0 when x < a_1).  The cap lets finite
  /// lists answer queries that only concern their first `cap` terms.
  std::size_t count_le(const Rat& x, std::size_t cap = static_cast<std::size_t>(-1)) const {
    if (cap == 0) return 0;
    switch (impl_->kind) {
      case SeqKind::Explicit: {
        const auto& v = impl_->values;
        const std::size_t usable = std::min(cap, v.size());
        const auto it = std::upper_bound(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(usable), x,
                                         [](const Rat& lhs, const Int& rhs) { return lhs < Rat(rhs); });
        const auto n = static_cast<std::size_t>(it - v.begin());
        // Every listed term is <= x, but an unlisted a_{m+1} might be too.
        if (n == v.size() && n < cap && Rat(v.back()) < x)
          throw SeqExhausted("explicit sequence ends at " + v.back().str() + "; cannot locate x = " +
                             to_string(x));
        return n;
      }
      case SeqKind::Affine: {
        if (x < Rat(impl_->start)) return 0;
        const Int n = floor_rat(Rat((x - Rat(impl_->start)) / Rat(impl_->param))) + 1;
        return clamp_count(n, cap);
      }
      case SeqKind::Geometric: {
        if (x < Rat(impl_->start)) return 0;
        std::size_t n = 1;
        Int term = impl_->start;
        while (n < cap) {
          term *= impl_->param;
          if (Rat(term) > x) break;
          ++n;
        }
        return n;
      }
      case SeqKind::Rule: {
        // Exponential probe, then bisection on the memoized prefix.
        // Invariant: a_lo <= x (lo = 0 means none), and hi is past the answer.
        std::size_t lo = 0;
        std::size_t hi = 1;
        while (true) {
          if (hi > cap) {
            hi = cap + 1;
            break;
          }
          if (Rat(rule_at(hi)) > x) break;
          lo = hi;
          hi *= 2;
        }
        while (hi - lo > 1) {
          const std::size_t mid = lo + (hi - lo) / 2;
          if (Rat(rule_at(mid)) <= x) lo = mid;
          else hi = mid;
        }
        return lo;
      }
    }
    throw std::logic_error("unreachable");
  }

  /// First n terms.
  std::vector<Int> prefix(std::size_t n) const {
    std::vector<Int> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n && can_index(i); ++i) out.push_back(at(i));
    return out;
  }

  /// Identity of the underlying sequence object (rule sequences compare by it).
  const void* identity() const { return impl_.get(); }

 private:
  struct Impl {
    SeqKind kind = SeqKind::Explicit;
    std::vector<Int> values;  // explicit
    Int start;                // affine, geometric, rule seed a_0
    Int param;                // step or ratio
    std::string description;  // rule
    Next next;                // rule
    mutable std::mutex mu;    // guards `memo`
    mutable std::vector<Int> memo;
  };

  explicit Seq(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  static std::size_t clamp_count(const Int& n, std::size_t cap) {
    if (n > Int(static_cast<unsigned long long>(cap))) return cap;
    return n.convert_to<std::size_t>();
  }

  Int rule_at(std::size_t n) const {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto& memo = impl_->memo;
    if (n > kTermBudget) throw SeqExhausted("rule sequence term budget exceeded");
    while (memo.size() < n) {
      const Int& prev = memo.empty() ? impl_->start : memo.back();
      Int next = impl_->next(memo.size() + 1, prev);
      if (next < 1 || (!memo.empty() && !(prev < next)))
        throw std::logic_error("rule sequence '" + impl_->description + "' is not strictly increasing");
      memo.push_back(std::move(next));
    }
    return memo[n - 1];
  }

  std::shared_ptr<const Impl> impl_;
};

}  // namespace sohom
