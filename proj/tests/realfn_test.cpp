#include "oracles.hpp"
#include "sohom/eval.hpp"
#include "sohom/json_io.hpp"
#include "sohom/testing/generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sohom;
using namespace sohom::gen;

namespace {

Real ev(const FnExpr& f, Rat x) { return eval(f, Real(std::move(x))); }

std::vector<Rat> seq_prefix_rats(const Seq& s, std::size_t n) {
  std::vector<Rat> out;
  for (std::size_t i = 1; i <= n; ++i) out.emplace_back(s.at(i));
  return out;
}

}  // namespace

// Worked examples ---------------------------------------------------------------

TEST(Eval, EtaAffineTwoTwo) {
  const FnExpr e = eta(Seq::affine(2, 2));
  // Frozen from the finite-stage recursion oracle (depth 5).
  const auto a = seq_prefix_rats(Seq::affine(2, 2), 5);
  EXPECT_EQ(oracle::eta_stage(a, 5, Rat(4)), Rat(5));
  EXPECT_EQ(oracle::eta_stage(a, 5, Rat(10)), Rat(43, 6));
  EXPECT_EQ(ev(e, Rat(4)).rat(), Rat(5));
  EXPECT_EQ(ev(e, Rat(10)).rat(), Rat(43, 6));
  EXPECT_EQ(ev(e, Rat(6)).rat(), Rat(6));
  EXPECT_EQ(ev(e, Rat(0)).rat(), Rat(1));
}

TEST(Eval, Atoms) {
  EXPECT_EQ(ev(tau(), Rat(0)).rat(), Rat(1));
  EXPECT_EQ(ev(abs(constant(Rat(-4))), Rat(7)).rat(), Rat(4));
  const FnExpr pl = piecewise_linear({{Rat(0), Rat(1)}, {Rat(4), Rat(5)}}, Rat(1, 2));
  EXPECT_EQ(ev(pl, Rat(2)).rat(), Rat(3));
  EXPECT_EQ(ev(pl, Rat(8)).rat(), Rat(7));
  const Real r = ev(tau_pow(Rat(1, 2)), Rat(3));
  ASSERT_TRUE(r.exact());
  EXPECT_EQ(r.rat(), Rat(2));
  EXPECT_FALSE(ev(tau_pow(Rat(1, 2)), Rat(1)).exact());
}

TEST(Eval, NegativeArgumentIsDomainError) {
  EXPECT_THROW(eval(tau(), Real(-1)), DomainError);
  EXPECT_THROW(window_extrema(tau(), Real(-1), Real(1)), DomainError);
  EXPECT_THROW(sup_abs_on(tau(), Real(-1)), DomainError);
}

TEST(Eval, InexactArgumentGivesInexactResult) {
  const Real x(Float(Rat(5, 2)));
  EXPECT_FALSE(eval(tau(), x).exact());
  EXPECT_EQ(eval(tau(), x).as_rat(), Rat(7, 2));
}

TEST(Eval, TauPowIsARestrictedExponent) {
  EXPECT_THROW(tau_pow(Rat(1)), DomainError);
  EXPECT_THROW(tau_pow(Rat(0)), DomainError);
  EXPECT_THROW(piecewise_linear({{Rat(1), Rat(0)}}, Rat(0)), DomainError);
  EXPECT_THROW(piecewise_linear({{Rat(0), Rat(0)}, {Rat(0), Rat(1)}}, Rat(0)), DomainError);
}

TEST(WindowExtrema, WorkedExamples) {
  auto w = window_extrema(tau(), Real(10), Real(3));
  EXPECT_EQ(w.min.rat(), Rat(11));
  EXPECT_EQ(w.max.rat(), Rat(14));
  EXPECT_TRUE(w.exact);

  w = window_extrema(constant(Rat(5)), Real(0), Real(100));
  EXPECT_EQ(w.min.rat(), Rat(5));
  EXPECT_EQ(w.max.rat(), Rat(5));

  // Window [4, 8] crosses a_3 = 6, so the maximum is eta(8) = 6 + 2/3.
  w = window_extrema(eta(Seq::affine(2, 2)), Real(4), Real(4));
  EXPECT_EQ(w.min.rat(), Rat(5));
  EXPECT_EQ(w.max.rat(), Rat(20, 3));
  EXPECT_EQ(w.max.rat(), oracle::eta_stage(seq_prefix_rats(Seq::affine(2, 2), 10), 10, Rat(8)));
  EXPECT_EQ(window_diam(eta(Seq::affine(2, 2)), Real(4), Real(4)).rat(), Rat(5, 3));
  // The sub-window [4, 6] stays on one segment.
  EXPECT_EQ(window_diam(eta(Seq::affine(2, 2)), Real(4), Real(2)).rat(), Rat(1));
}

TEST(WindowExtrema, JoinCrossingIsExact) {
  // max(2 - x, x - 2) on [0, 4] has its minimum 0 at the crossing x = 2.
  const FnExpr down = piecewise_linear({{Rat(0), Rat(2)}}, Rat(-1));
  const FnExpr up = piecewise_linear({{Rat(0), Rat(-2)}}, Rat(1));
  auto w = window_extrema(join(down, up), Real(0), Real(4));
  ASSERT_TRUE(w.exact);
  EXPECT_EQ(w.min.rat(), Rat(0));
  EXPECT_EQ(w.max.rat(), Rat(2));
  w = window_extrema(abs(piecewise_linear({{Rat(0), Rat(-1)}}, Rat(3))), Real(0), Real(1));
  EXPECT_EQ(w.min.rat(), Rat(0));
  EXPECT_EQ(w.max.rat(), Rat(2));
}

TEST(SupAbsOn, WorkedExamples) {
  EXPECT_EQ(sup_abs_on(constant(Rat(-4)), Real(10)).rat(), Rat(4));
  EXPECT_EQ(sup_abs_on(tau(), Real(9)).rat(), Rat(10));
  const Real s = sup_abs_on(tau_pow(Rat(1, 2)), Real(257));
  EXPECT_FALSE(s.exact());  // flagged as a bound
  // Upper bound within 2^-64 of sqrt(258).
  EXPECT_GT(s.as_rat() * s.as_rat(), Rat(258));
  const Float gap = s.as_float() - mp::sqrt(Float(258));
  EXPECT_GE(gap, 0);
  EXPECT_LT(gap, mp::ldexp(Float(1), -64));
}

TEST(SupAbsOn, NonMonotoneMixedIsAnUpperBound) {
  // |sqrt(tau) - 3| on [0, 20]: max is 3 - 1 = 2 at x = 0 (vs sqrt(21) - 3 ~ 1.58).
  const FnExpr f = abs(add(tau_pow(Rat(1, 2)), constant(Rat(-3))));
  const Real s = sup_abs_on(f, Real(20));
  EXPECT_GE(s, Real(2));
  // Bisection stops within 2^-40 of the observed spread on each side.
  EXPECT_LT(s.to_double() - 2.0, 2.0 * std::ldexp(2.0, -40));
  // meet(sqrt(tau), 4) on [0, 100] reaches its plateau.
  const auto w = window_extrema(meet(tau_pow(Rat(1, 2)), constant(Rat(4))), Real(0), Real(100));
  EXPECT_GE(w.max + w.resolution, Real(4));
  EXPECT_LE(w.max, Real(4));
  EXPECT_LE(w.min, Real(1));
  EXPECT_GE(w.min, Real(1) - w.resolution);
}

// Invariants ------------------------------------------------------------------

TEST(Properties, LatticeIdentityAbsEqualsPositiveMinusNegativePart) {
  Rng rng(20240601);
  ExprOptions opt{.allow_tau_pow = true, .allow_tau = true, .max_depth = 3};
  const FnExpr zero = constant(Rat(0));
  for (int i = 0; i < 200; ++i) {
    const FnExpr f = random_expr(rng, opt);
    const FnExpr lhs = abs(f);
    const FnExpr rhs = add(join(f, zero), scale(Rat(-1), meet(f, zero)));
    const bool exact = is_piecewise_linear(f);
    for (int k = 0; k < 50; ++k) {
      const Rat x = random_rat(rng, 0, 60, 16);
      const Real a = ev(lhs, x);
      const Real b = ev(rhs, x);
      if (exact) {
        ASSERT_TRUE(a.exact() && b.exact());
        ASSERT_EQ(a.rat(), b.rat()) << serialize(f);
      } else {
        ASSERT_LE(mp::abs(Float(a.as_float() - b.as_float())), Float(1e-12));
      }
    }
  }
}

TEST(Properties, EtaMatchesFiniteRecursion) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Seq s = trial % 3 == 0 ? random_explicit_seq(rng, 60) : random_seq(rng);
    const FnExpr e = eta(s);
    const auto a = seq_prefix_rats(s, 50);
    for (std::size_t n : {1u, 2u, 3u, 7u, 20u, 50u}) {
      for (int k = 0; k < 20; ++k) {
        const Rat x = Rat(uniform_int(rng, 0, 1000), 1000) * a[n - 1];
        ASSERT_EQ(ev(e, x).rat(), oracle::eta_stage(a, n, x));
      }
      ASSERT_EQ(ev(e, a[n - 1]).rat(), oracle::eta_stage(a, n, a[n - 1]));
    }
  }
}

TEST(Properties, EtaShape) {
  for (const Seq& s : {Seq::affine(2, 2), Seq::affine(1, 1), Seq::geometric(1, 2), Seq::affine(5, 3)}) {
    const FnExpr e = eta(s);
    Rat prev_val = 0;
    Rat prev_slope = 2;
    for (int i = 0; i <= 1000; ++i) {
      const Rat x(i, 4);
      const Rat v = ev(e, x).rat();
      EXPECT_GE(v, Rat(1));
      EXPECT_LE(v, x + 1);
      if (i > 0) {
        EXPECT_GE(v, prev_val);
        const Rat slope = (v - prev_val) * 4;
        EXPECT_LE(slope, prev_slope) << "concavity at x=" << x;
        prev_slope = slope;
      }
      prev_val = v;
    }
  }
}

TEST(Properties, FiniteStagesAreOrdered) {
  const Seq s = Seq::explicit_list({Int(2), Int(4)});
  const FnExpr e0 = eta(s, 0), e1 = eta(s, 1), e2 = eta(s, 2);
  for (int i = 0; i <= 32; ++i) {
    const Rat x(i, 4);
    const Rat v0 = ev(e0, x).rat(), v1 = ev(e1, x).rat(), v2 = ev(e2, x).rat();
    EXPECT_GE(v0, v1);
    EXPECT_GE(v1, v2);
    EXPECT_GE(v2, Rat(1));
  }
  EXPECT_EQ(ev(e2, Rat(8)).rat(), Rat(7));  // 5 + (8-4)/2
  EXPECT_THROW(ev(eta(s), Rat(5)), SeqExhausted);
}

TEST(Properties, WindowExtremaOnPLMatchesDenseSampling) {
  Rng rng(99);
  ExprOptions opt{.allow_tau_pow = false, .allow_tau = true, .max_depth = 3};
  for (int i = 0; i < 60; ++i) {
    const FnExpr f = random_expr(rng, opt);
    const Rat x0 = random_rat(rng, 0, 20, 4);
    const Rat r = random_positive_rat(rng, 4, 2);
    const auto w = window_extrema(f, Real(x0), Real(r));
    ASSERT_TRUE(w.exact);
    // Dense sampling at step 1e-3; the sampling error is at most L * step.
    const Rat step(1, 1000);
    Rat lo = ev(f, x0).rat(), hi = lo;
    for (Rat x = x0; x <= x0 + r; x += step) {
      const Rat v = ev(f, x).rat();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const Rat v_end = ev(f, Rat(x0 + r)).rat();
    lo = std::min(lo, v_end);
    hi = std::max(hi, v_end);
    const Rat lip = max_slope_on(f, x0, Rat(x0 + r)).rat();
    ASSERT_LE(w.min.rat(), lo);
    ASSERT_GE(w.max.rat(), hi);
    ASSERT_LE(lo - w.min.rat(), lip * step);
    ASSERT_LE(w.max.rat() - hi, lip * step);
  }
}

TEST(Properties, MixedExtremaBracketSampling) {
  Rng rng(1234);
  ExprOptions opt{.allow_tau_pow = true, .allow_tau = true, .max_depth = 3};
  for (int i = 0; i < 40; ++i) {
    const FnExpr f = random_expr(rng, opt);
    const Rat x0 = random_rat(rng, 0, 20, 4);
    const Rat r = random_positive_rat(rng, 4, 2);
    const auto w = window_extrema(f, Real(x0), Real(r));
    for (int k = 0; k <= 400; ++k) {
      const Real v = ev(f, x0 + r * Rat(k, 400));
      ASSERT_LE(w.min - w.resolution, v);
      ASSERT_LE(v, w.max + w.resolution);
    }
  }
}

TEST(Eval, FarAffineEtaSwitchesToClosedForm) {
  const Seq a = Seq::affine(3, 2);
  const EtaFunction fn(a);
  const std::size_t n = EtaFunction::kExactAffine + 1;
  const Rat x = Rat(a.at(n)) + Rat(1, 3);
  ASSERT_FALSE(fn.exact_at(x));
  const Real far = fn.eval(x);
  EXPECT_FALSE(far.exact());
  // The exact prefix is still reachable through the raw recursion.
  const Rat exact = fn.prefix(n) + Rat(1, 3) / Rat(static_cast<long>(n));
  EXPECT_TRUE(close(far, Real(exact), 1e-40));
  EXPECT_THROW(fn.value(x), DomainError);

  // Windows far out fall back to bisection and stay monotone-consistent.
  const FnExpr f = join(eta(Seq::affine(1, 1)), constant(Rat(3)));
  const auto w = window_extrema(f, Real(1'000'000), Real(1));
  EXPECT_FALSE(w.exact);
  EXPECT_LT(w.min, w.max);
  EXPECT_TRUE(close(w.max - w.min, Real(Rat(1, 1'000'000)), 1e-9));
}

TEST(Eval, ClosedFormMatchesExactPrefixes) {
  // eval_fast switches to the series past index 128; compare against the
  // exact recursion on either side of the switch and further out.
  const Seq a = Seq::affine(2, 3);
  const EtaFunction fn(a);
  for (std::size_t n : {100, 129, 130, 500, 4000}) {
    const Rat x = Rat(a.at(n)) + Rat(1, 7);
    const Real fast = fn.eval_fast(x);
    EXPECT_TRUE(close(fast, Real(fn.value(x)), 1e-45)) << n;
  }
}
