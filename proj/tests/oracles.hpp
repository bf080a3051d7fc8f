#pragma once

// Test-only reference computations.  These deliberately avoid the library's
// evaluation paths: eta is computed by literally unwinding the finite-stage
// recursion, windows by dense sampling.

#include "sohom/real.hpp"

#include <vector>

namespace sohom::oracle {

/// eta^n_a(x) straight from the recursion
///   eta^0 = tau,
///   eta^n(x) = eta^{n-1}(x)                           for x < a_n,
///   eta^n(x) = eta^{n-1}(a_n) + (x - a_n) / n         for x >= a_n.
/// `a` holds a_1..a_m with m >= n.
inline Rat eta_stage(const std::vector<Rat>& a, std::size_t n, const Rat& x) {
  if (n == 0) return x + 1;
  const Rat& an = a[n - 1];
  if (x < an) return eta_stage(a, n - 1, x);
  return eta_stage(a, n - 1, an) + (x - an) / Rat(static_cast<long>(n));
}

}  // namespace sohom::oracle
