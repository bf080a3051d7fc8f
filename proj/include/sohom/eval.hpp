#pragma once

// Evaluation and window analysis of FnExpr.
//
// On the piecewise-linear fragment (no tau^alpha atom) everything is exact:
// a window [u, v] is restricted to an explicit list of breakpoints, with
// crossing points of join/meet/abs inserted exactly, and extrema are read off
// the breakpoints.  Expressions touching tau^alpha fall back to a
// branch-and-bound over the window driven by interval and slope bounds; the
// returned resolution bounds how far the reported extrema can be from the
// true ones.

#include "sohom/fnexpr.hpp"
#include "sohom/real.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

namespace sohom {

// ---------------------------------------------------------------------------
// Pointwise evaluation

namespace detail {

inline Rat eval_pl(const atom::PL& pl, const Rat& x) {
  const auto it = std::upper_bound(pl.xs.begin(), pl.xs.end(), x);
  const auto i = static_cast<std::size_t>(it - pl.xs.begin()) - 1;  // xs[0] = 0 <= x
  if (i + 1 == pl.xs.size()) return pl.ys[i] + pl.final_slope * (x - pl.xs[i]);
  const Rat t = (x - pl.xs[i]) / (pl.xs[i + 1] - pl.xs[i]);
  return pl.ys[i] + t * (pl.ys[i + 1] - pl.ys[i]);
}

// `fast` lets eta atoms use their float closed form where exact prefixes
// are expensive.
inline Real eval_at(const FnExpr& f, const Rat& x, bool fast = false) {
  return std::visit(overloaded{
                        [&](const atom::Const& c) { return Real(c.value); },
                        [&](const atom::Tau&) { return Real(Rat(x + 1)); },
                        [&](const atom::TauPow& t) { return pow_rat(Real(Rat(x + 1)), t.alpha); },
                        [&](const atom::Eta& e) { return fast ? e.fn->eval_fast(x) : e.fn->eval(x); },
                        [&](const atom::PL& pl) { return Real(eval_pl(pl, x)); },
                        [&](const op::Add& n) { return eval_at(n.lhs, x, fast) + eval_at(n.rhs, x, fast); },
                        [&](const op::Scale& n) { return Real(n.lambda) * eval_at(n.arg, x, fast); },
                        [&](const op::Join& n) { return max(eval_at(n.lhs, x, fast), eval_at(n.rhs, x, fast)); },
                        [&](const op::Meet& n) { return min(eval_at(n.lhs, x, fast), eval_at(n.rhs, x, fast)); },
                        [&](const op::Abs& n) { return abs(eval_at(n.arg, x, fast)); },
                    },
                    f.node().v);
}

}  // namespace detail

/// f(x) for x >= 0.  Exact whenever x is exact and no tau^alpha atom is
/// touched (tau^alpha itself stays exact at perfect powers).
inline Real eval(const FnExpr& f, const Real& x) {
  if (x.sign() < 0) throw DomainError("eval: x must be nonnegative, got " + x.str());
  Real value = detail::eval_at(f, x.as_rat());
  if (!x.exact() && value.exact()) return Real(value.as_float());
  return value;
}

// ---------------------------------------------------------------------------
// Exact restriction of a piecewise-linear expression to a window

/// Continuous piecewise-linear function on [xs.front(), xs.back()], linear
/// between consecutive points.
struct Piecewise {
  std::vector<Rat> xs;
  std::vector<Rat> ys;

  Rat value_at(const Rat& x) const {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    auto i = static_cast<std::size_t>(it - xs.begin()) - 1;
    if (i + 1 >= xs.size()) return ys.back();
    const Rat t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
  }

  Rat min() const { return *std::min_element(ys.begin(), ys.end()); }
  Rat max() const { return *std::max_element(ys.begin(), ys.end()); }

  /// Largest |slope| over the pieces.
  Rat max_abs_slope() const {
    Rat best = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      Rat s = mp::abs(Rat((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])));
      if (s > best) best = s;
    }
    return best;
  }
};

namespace detail {

inline std::vector<Rat> merge_grids(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  std::vector<Rat> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Values of p at the sorted points xs (all inside p's span).
inline std::vector<Rat> resample(const Piecewise& p, const std::vector<Rat>& xs) {
  std::vector<Rat> out;
  out.reserve(xs.size());
  std::size_t i = 0;
  for (const Rat& x : xs) {
    while (i + 1 < p.xs.size() && p.xs[i + 1] <= x) ++i;
    if (i + 1 == p.xs.size() || p.xs[i] == x) {
      out.push_back(p.ys[i]);
    } else {
      const Rat t = (x - p.xs[i]) / (p.xs[i + 1] - p.xs[i]);
      out.push_back(p.ys[i] + t * (p.ys[i + 1] - p.ys[i]));
    }
  }
  return out;
}

/// Pointwise max (pick_max) or min of two restrictions, with exact
/// crossing points inserted wherever the pieces swap order.
inline Piecewise combine_extremal(const Piecewise& f, const Piecewise& g, bool pick_max) {
  const std::vector<Rat> xs = merge_grids(f.xs, g.xs);
  const std::vector<Rat> fy = resample(f, xs);
  const std::vector<Rat> gy = resample(g, xs);
  Piecewise out;
  auto pick = [&](const Rat& a, const Rat& b) -> const Rat& { return (pick_max ? (a < b) : (b < a)) ? b : a; };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) {
      const Rat d0 = fy[i - 1] - gy[i - 1];
      const Rat d1 = fy[i] - gy[i];
      if (d0.sign() * d1.sign() < 0) {
        const Rat t = d0 / (d0 - d1);
        out.xs.push_back(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        out.ys.push_back(fy[i - 1] + t * (fy[i] - fy[i - 1]));
      }
    }
    out.xs.push_back(xs[i]);
    out.ys.push_back(pick(fy[i], gy[i]));
  }
  return out;
}

inline Piecewise endpoints(const Rat& u, const Rat& v, std::vector<Rat> interior = {}) {
  Piecewise p;
  p.xs.push_back(u);
  for (auto& x : interior) p.xs.push_back(std::move(x));
  if (v != u) p.xs.push_back(v);
  return p;
}

}  // namespace detail

/// Every eta atom of f can be evaluated exactly up to x.
inline bool exact_on(const FnExpr& f, const Rat& x) {
  return std::visit(overloaded{
                        [&](const atom::Eta& e) { return e.fn->exact_at(x); },
                        [&](const op::Add& n) { return exact_on(n.lhs, x) && exact_on(n.rhs, x); },
                        [&](const op::Join& n) { return exact_on(n.lhs, x) && exact_on(n.rhs, x); },
                        [&](const op::Meet& n) { return exact_on(n.lhs, x) && exact_on(n.rhs, x); },
                        [&](const op::Scale& n) { return exact_on(n.arg, x); },
                        [&](const op::Abs& n) { return exact_on(n.arg, x); },
                        [](const auto&) { return true; },
                    },
                    f.node().v);
}

/// Exact restriction of a piecewise-linear expression to [u, v].
inline Piecewise restrict_pl(const FnExpr& f, const Rat& u, const Rat& v) {
  using detail::endpoints;
  return std::visit(
      overloaded{
          [&](const atom::Const& c) {
            Piecewise p = endpoints(u, v);
            p.ys.assign(p.xs.size(), c.value);
            return p;
          },
          [&](const atom::Tau&) {
            Piecewise p = endpoints(u, v);
            for (const Rat& x : p.xs) p.ys.push_back(x + 1);
            return p;
          },
          [&](const atom::TauPow&) -> Piecewise {
            throw std::logic_error("restrict_pl: tau^alpha is not piecewise linear");
          },
          [&](const atom::Eta& e) {
            Piecewise p = endpoints(u, v, e.fn->breakpoints_in(u, v));
            for (const Rat& x : p.xs) p.ys.push_back(e.fn->value(x));
            return p;
          },
          [&](const atom::PL& pl) {
            std::vector<Rat> inner;
            for (const Rat& x : pl.xs)
              if (u < x && x < v) inner.push_back(x);
            Piecewise p = endpoints(u, v, std::move(inner));
            for (const Rat& x : p.xs) p.ys.push_back(detail::eval_pl(pl, x));
            return p;
          },
          [&](const op::Add& n) {
            const Piecewise a = restrict_pl(n.lhs, u, v);
            const Piecewise b = restrict_pl(n.rhs, u, v);
            Piecewise p;
            p.xs = detail::merge_grids(a.xs, b.xs);
            const auto ay = detail::resample(a, p.xs);
            const auto by = detail::resample(b, p.xs);
            for (std::size_t i = 0; i < p.xs.size(); ++i) p.ys.push_back(ay[i] + by[i]);
            return p;
          },
          [&](const op::Scale& n) {
            Piecewise p = restrict_pl(n.arg, u, v);
            for (Rat& y : p.ys) y *= n.lambda;
            return p;
          },
          [&](const op::Join& n) {
            return detail::combine_extremal(restrict_pl(n.lhs, u, v), restrict_pl(n.rhs, u, v), true);
          },
          [&](const op::Meet& n) {
            return detail::combine_extremal(restrict_pl(n.lhs, u, v), restrict_pl(n.rhs, u, v), false);
          },
          [&](const op::Abs& n) {
            Piecewise p = restrict_pl(n.arg, u, v);
            Piecewise m = p;
            for (Rat& y : m.ys) y = -y;
            return detail::combine_extremal(p, m, true);
          },
      },
      f.node().v);
}

// ---------------------------------------------------------------------------
// Interval range and slope bounds (used outside the exact fragment)

/// Lower and upper bounds of f on [lo, hi]; exact per atom, conservative for
/// combinations.
struct Range {
  Real lo, hi;
};

inline Range range_on(const FnExpr& f, const Rat& lo, const Rat& hi) {
  return std::visit(
      overloaded{
          [&](const atom::Const& c) { return Range{Real(c.value), Real(c.value)}; },
          [&](const atom::Tau&) { return Range{Real(Rat(lo + 1)), Real(Rat(hi + 1))}; },
          [&](const atom::TauPow& t) {
            return Range{round_down(pow_rat(Real(Rat(lo + 1)), t.alpha)),
                         round_up(pow_rat(Real(Rat(hi + 1)), t.alpha))};
          },
          [&](const atom::Eta& e) { return Range{round_down(e.fn->eval_fast(lo)), round_up(e.fn->eval_fast(hi))}; },
          [&](const atom::PL&) {
            const Piecewise p = restrict_pl(f, lo, hi);
            return Range{Real(p.min()), Real(p.max())};
          },
          [&](const op::Add& n) {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            return Range{round_down(a.lo + b.lo), round_up(a.hi + b.hi)};
          },
          [&](const op::Scale& n) {
            const Range a = range_on(n.arg, lo, hi);
            const Real l(n.lambda);
            if (n.lambda.sign() >= 0) return Range{round_down(l * a.lo), round_up(l * a.hi)};
            return Range{round_down(l * a.hi), round_up(l * a.lo)};
          },
          [&](const op::Join& n) {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            return Range{max(a.lo, b.lo), max(a.hi, b.hi)};
          },
          [&](const op::Meet& n) {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            return Range{min(a.lo, b.lo), min(a.hi, b.hi)};
          },
          [&](const op::Abs& n) {
            const Range a = range_on(n.arg, lo, hi);
            if (a.lo.sign() >= 0) return a;
            if (a.hi.sign() <= 0) return Range{-a.hi, -a.lo};
            return Range{Real(0), max(-a.lo, a.hi)};
          },
      },
      f.node().v);
}

/// Upper bound on the Lipschitz constant of f over [lo, hi].  Join/meet use
/// the interval ranges to drop a child that cannot be active.
inline Real slope_bound(const FnExpr& f, const Rat& lo, const Rat& hi) {
  return std::visit(
      overloaded{
          [&](const atom::Const&) { return Real(0); },
          [&](const atom::Tau&) { return Real(1); },
          [&](const atom::TauPow& t) {
            // d/dx (x+1)^alpha = alpha (x+1)^(alpha-1), decreasing in x.
            return round_up(Real(t.alpha) * pow_rat(Real(Rat(lo + 1)), Rat(t.alpha - 1)));
          },
          [&](const atom::Eta& e) { return Real(e.fn->right_slope(lo)); },
          [&](const atom::PL& pl) {
            Rat best = 0;
            for (std::size_t i = 0; i + 1 < pl.xs.size(); ++i) {
              if (pl.xs[i + 1] <= lo || hi <= pl.xs[i]) continue;
              Rat s = mp::abs(Rat((pl.ys[i + 1] - pl.ys[i]) / (pl.xs[i + 1] - pl.xs[i])));
              if (s > best) best = s;
            }
            if (hi > pl.xs.back()) best = std::max(best, Rat(mp::abs(pl.final_slope)));
            return Real(best);
          },
          [&](const op::Add& n) { return round_up(slope_bound(n.lhs, lo, hi) + slope_bound(n.rhs, lo, hi)); },
          [&](const op::Scale& n) { return round_up(Real(Rat(mp::abs(n.lambda))) * slope_bound(n.arg, lo, hi)); },
          [&](const op::Join& n) {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            if (b.hi < a.lo) return slope_bound(n.lhs, lo, hi);
            if (a.hi < b.lo) return slope_bound(n.rhs, lo, hi);
            return max(slope_bound(n.lhs, lo, hi), slope_bound(n.rhs, lo, hi));
          },
          [&](const op::Meet& n) {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            if (a.hi < b.lo) return slope_bound(n.lhs, lo, hi);
            if (b.hi < a.lo) return slope_bound(n.rhs, lo, hi);
            return max(slope_bound(n.lhs, lo, hi), slope_bound(n.rhs, lo, hi));
          },
          [&](const op::Abs& n) { return slope_bound(n.arg, lo, hi); },
      },
      f.node().v);
}

/// Smallest kink of an eta or piecewise-linear atom strictly inside (lo, hi).
inline std::optional<Rat> first_kink_in(const FnExpr& f, const Rat& lo, const Rat& hi) {
  auto earliest = [](std::optional<Rat> a, std::optional<Rat> b) {
    if (!a) return b;
    if (!b) return a;
    return std::optional<Rat>(std::min(*a, *b));
  };
  return std::visit(
      overloaded{
          [&](const atom::Eta& e) { return e.fn->first_breakpoint_in(lo, hi); },
          [&](const atom::PL& pl) -> std::optional<Rat> {
            for (const Rat& x : pl.xs)
              if (lo < x && x < hi) return x;
            return std::nullopt;
          },
          [&](const op::Add& n) { return earliest(first_kink_in(n.lhs, lo, hi), first_kink_in(n.rhs, lo, hi)); },
          [&](const op::Join& n) { return earliest(first_kink_in(n.lhs, lo, hi), first_kink_in(n.rhs, lo, hi)); },
          [&](const op::Meet& n) { return earliest(first_kink_in(n.lhs, lo, hi), first_kink_in(n.rhs, lo, hi)); },
          [&](const op::Scale& n) { return first_kink_in(n.arg, lo, hi); },
          [&](const op::Abs& n) { return first_kink_in(n.arg, lo, hi); },
          [](const auto&) -> std::optional<Rat> { return std::nullopt; },
      },
      f.node().v);
}

/// Bound on |f''| over (lo, hi) when f is smooth there: no atom kinks inside
/// and a single active branch for every join, meet and absolute value.
inline std::optional<Real> curvature_bound(const FnExpr& f, const Rat& lo, const Rat& hi) {
  auto sum = [](const std::optional<Real>& a, const std::optional<Real>& b) -> std::optional<Real> {
    if (!a || !b) return std::nullopt;
    return round_up(*a + *b);
  };
  return std::visit(
      overloaded{
          [](const atom::Const&) -> std::optional<Real> { return Real(0); },
          [](const atom::Tau&) -> std::optional<Real> { return Real(0); },
          [&](const atom::TauPow& t) -> std::optional<Real> {
            // |d2/dx2 (x+1)^alpha| = alpha (1-alpha) (x+1)^(alpha-2), decreasing in x.
            return round_up(Real(Rat(t.alpha * (1 - t.alpha))) * pow_rat(Real(Rat(lo + 1)), Rat(t.alpha - 2)));
          },
          [&](const atom::Eta& e) -> std::optional<Real> {
            if (e.fn->first_breakpoint_in(lo, hi)) return std::nullopt;
            return Real(0);
          },
          [&](const atom::PL& pl) -> std::optional<Real> {
            for (const Rat& x : pl.xs)
              if (lo < x && x < hi) return std::nullopt;
            return Real(0);
          },
          [&](const op::Add& n) { return sum(curvature_bound(n.lhs, lo, hi), curvature_bound(n.rhs, lo, hi)); },
          [&](const op::Scale& n) -> std::optional<Real> {
            auto k = curvature_bound(n.arg, lo, hi);
            if (!k) return std::nullopt;
            return round_up(Real(Rat(mp::abs(n.lambda))) * *k);
          },
          [&](const op::Join& n) -> std::optional<Real> {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            if (b.hi < a.lo) return curvature_bound(n.lhs, lo, hi);
            if (a.hi < b.lo) return curvature_bound(n.rhs, lo, hi);
            return std::nullopt;
          },
          [&](const op::Meet& n) -> std::optional<Real> {
            const Range a = range_on(n.lhs, lo, hi);
            const Range b = range_on(n.rhs, lo, hi);
            if (a.hi < b.lo) return curvature_bound(n.lhs, lo, hi);
            if (b.hi < a.lo) return curvature_bound(n.rhs, lo, hi);
            return std::nullopt;
          },
          [&](const op::Abs& n) -> std::optional<Real> {
            const Range a = range_on(n.arg, lo, hi);
            if (a.lo.sign() > 0 || a.hi.sign() < 0) return curvature_bound(n.arg, lo, hi);
            return std::nullopt;
          },
      },
      f.node().v);
}

/// Interval containing f' on (lo, hi) when f is smooth there (same
/// conditions as curvature_bound).
inline std::optional<Range> derivative_range(const FnExpr& f, const Rat& lo, const Rat& hi) {
  using Opt = std::optional<Range>;
  auto branch = [&](const FnExpr& a, const FnExpr& b, bool want_max) -> Opt {
    const Range ra = range_on(a, lo, hi);
    const Range rb = range_on(b, lo, hi);
    const bool a_wins = want_max ? rb.hi < ra.lo : ra.hi < rb.lo;
    const bool b_wins = want_max ? ra.hi < rb.lo : rb.hi < ra.lo;
    if (a_wins) return derivative_range(a, lo, hi);
    if (b_wins) return derivative_range(b, lo, hi);
    return std::nullopt;
  };
  return std::visit(
      overloaded{
          [](const atom::Const&) -> Opt { return Range{Real(0), Real(0)}; },
          [](const atom::Tau&) -> Opt { return Range{Real(1), Real(1)}; },
          [&](const atom::TauPow& t) -> Opt {
            const Real a(t.alpha);
            return Range{round_down(a * pow_rat(Real(Rat(hi + 1)), Rat(t.alpha - 1))),
                         round_up(a * pow_rat(Real(Rat(lo + 1)), Rat(t.alpha - 1)))};
          },
          [&](const atom::Eta& e) -> Opt {
            if (e.fn->first_breakpoint_in(lo, hi)) return std::nullopt;
            const Real s(e.fn->right_slope(lo));
            return Range{s, s};
          },
          [&](const atom::PL& pl) -> Opt {
            for (const Rat& x : pl.xs)
              if (lo < x && x < hi) return std::nullopt;
            const Rat s = (detail::eval_pl(pl, hi) - detail::eval_pl(pl, lo)) / (hi - lo);
            return Range{Real(s), Real(s)};
          },
          [&](const op::Add& n) -> Opt {
            const Opt a = derivative_range(n.lhs, lo, hi);
            if (!a) return std::nullopt;
            const Opt b = derivative_range(n.rhs, lo, hi);
            if (!b) return std::nullopt;
            return Range{round_down(a->lo + b->lo), round_up(a->hi + b->hi)};
          },
          [&](const op::Scale& n) -> Opt {
            const Opt a = derivative_range(n.arg, lo, hi);
            if (!a) return std::nullopt;
            const Real l(n.lambda);
            if (n.lambda.sign() >= 0) return Range{round_down(l * a->lo), round_up(l * a->hi)};
            return Range{round_down(l * a->hi), round_up(l * a->lo)};
          },
          [&](const op::Join& n) { return branch(n.lhs, n.rhs, true); },
          [&](const op::Meet& n) { return branch(n.lhs, n.rhs, false); },
          [&](const op::Abs& n) -> Opt {
            const Range r = range_on(n.arg, lo, hi);
            if (r.lo.sign() > 0) return derivative_range(n.arg, lo, hi);
            if (r.hi.sign() < 0) {
              const Opt a = derivative_range(n.arg, lo, hi);
              if (!a) return std::nullopt;
              return Range{-a->hi, -a->lo};
            }
            return std::nullopt;
          },
      },
      f.node().v);
}

/// +1 if f is known nondecreasing, -1 if known nonincreasing, 0 otherwise.
/// Constants report +1.
inline int monotonicity(const FnExpr& f) {
  return std::visit(overloaded{
                        [](const atom::Const&) { return 1; },
                        [](const atom::Tau&) { return 1; },
                        [](const atom::TauPow&) { return 1; },
                        [](const atom::Eta&) { return 1; },
                        [](const atom::PL& pl) {
                          bool up = pl.final_slope.sign() >= 0;
                          bool down = pl.final_slope.sign() <= 0;
                          for (std::size_t i = 0; i + 1 < pl.ys.size(); ++i) {
                            up = up && pl.ys[i] <= pl.ys[i + 1];
                            down = down && pl.ys[i + 1] <= pl.ys[i];
                          }
                          return up ? 1 : (down ? -1 : 0);
                        },
                        [](const op::Add& n) {
                          const int a = monotonicity(n.lhs);
                          return a == monotonicity(n.rhs) ? a : 0;
                        },
                        [](const op::Scale& n) { return n.lambda.sign() < 0 ? -monotonicity(n.arg) : monotonicity(n.arg); },
                        [](const op::Join& n) {
                          const int a = monotonicity(n.lhs);
                          return a == monotonicity(n.rhs) ? a : 0;
                        },
                        [](const op::Meet& n) {
                          const int a = monotonicity(n.lhs);
                          return a == monotonicity(n.rhs) ? a : 0;
                        },
                        [](const op::Abs&) { return 0; },
                    },
                    f.node().v);
}

// ---------------------------------------------------------------------------
// Window extrema

struct WindowExtrema {
  Real min;
  Real max;
  bool exact = true;
  // The true extrema lie within [min - resolution, min] and
  // [max, max + resolution].  Zero when exact.
  Real resolution;
  std::size_t evaluations = 0;
};

namespace detail {

// Branch-and-bound over [u, v] for expressions outside the exact fragment.
inline WindowExtrema bisect_extrema(const FnExpr& f, const Rat& u, const Rat& v, std::size_t budget) {
  struct Cell {
    Rat lo, hi;
    Real flo, fhi;
  };
  WindowExtrema out;
  Real flo = eval_at(f, u, true);
  Real fhi = eval_at(f, v, true);
  out.min = min(flo, fhi);
  out.max = max(flo, fhi);
  out.evaluations = 2;

  // Relative to the spread seen so far, floored near the float precision of
  // the values themselves.
  auto tolerance = [&] {
    const Float spread = mp::ldexp((out.max - out.min).as_float(), -40);
    Float scale = 1;
    if (scale < tail_scale(out.min)) scale = tail_scale(out.min);
    if (scale < tail_scale(out.max)) scale = tail_scale(out.max);
    scale = mp::ldexp(scale, -120);
    return Real(spread < scale ? scale : spread);
  };
  // Bounds of f on a cell from both the interval range and the slope bound.
  auto cell_bounds = [&](const Cell& c) {
    if (const auto d = derivative_range(f, c.lo, c.hi); d && (d->lo.sign() > 0 || d->hi.sign() < 0)) {
      // Monotone on the cell: the endpoints are the extrema.
      return std::pair{min(c.flo, c.fhi), max(c.flo, c.fhi)};
    }
    const Range r = range_on(f, c.lo, c.hi);
    const Real k = slope_bound(f, c.lo, c.hi);
    const Real half_span = Real(Rat((c.hi - c.lo) / 2));
    const Real mid = (c.flo + c.fhi) / Real(2);
    Real ub = min(r.hi, round_up(mid + k * half_span));
    Real lb = max(r.lo, round_down(mid - k * half_span));
    if (const auto curv = curvature_bound(f, c.lo, c.hi)) {
      // Within K w^2 / 8 of the chord.
      const Real sag = round_up(*curv * Real(Rat(half_span.rat() * half_span.rat() / 2)));
      ub = min(ub, round_up(max(c.flo, c.fhi) + sag));
      lb = max(lb, round_down(min(c.flo, c.fhi) - sag));
    }
    return std::pair{lb, ub};
  };

  std::deque<Cell> work;
  work.push_back(Cell{u, v, flo, fhi});
  Real residual = 0;
  while (!work.empty()) {
    Cell c = std::move(work.front());
    work.pop_front();
    const auto [lb, ub] = cell_bounds(c);
    const Real tol = tolerance();
    const bool settled_max = ub <= out.max + tol;
    const bool settled_min = out.min - tol <= lb;
    if (settled_max && settled_min) continue;
    if (out.evaluations >= budget) {
      residual = max(residual, max(ub - out.max, out.min - lb));
      continue;
    }
    const auto kink = first_kink_in(f, c.lo, c.hi);
    const Rat mid = kink ? *kink : Rat((c.lo + c.hi) / 2);
    Real fm = eval_at(f, mid, true);
    ++out.evaluations;
    out.min = min(out.min, fm);
    out.max = max(out.max, fm);
    work.push_back(Cell{c.lo, mid, c.flo, fm});
    work.push_back(Cell{mid, c.hi, fm, c.fhi});
  }
  out.exact = false;
  out.resolution = round_up(max(residual, tolerance()));
  return out;
}

}  // namespace detail

/// Extrema of f over [x, x + r].
inline WindowExtrema window_extrema(const FnExpr& f, const Real& x, const Real& r, std::size_t budget = 4096) {
  if (x.sign() < 0) throw DomainError("window_extrema: x must be nonnegative");
  if (r.sign() < 0) throw DomainError("window_extrema: window length must be nonnegative");
  const Rat u = x.as_rat();
  const Rat v = u + r.as_rat();

  WindowExtrema out;
  if (const int mono = monotonicity(f); mono != 0) {
    Real a = detail::eval_at(f, u);
    Real b = detail::eval_at(f, v);
    out.min = mono > 0 ? a : b;
    out.max = mono > 0 ? b : a;
    out.evaluations = 2;
    out.exact = a.exact() && b.exact();
  } else if (is_piecewise_linear(f) && exact_on(f, v)) {
    const Piecewise p = restrict_pl(f, u, v);
    out.min = Real(p.min());
    out.max = Real(p.max());
    out.evaluations = p.xs.size();
  } else {
    out = detail::bisect_extrema(f, u, v, budget);
  }
  if (!out.exact && out.resolution.sign() == 0) {
    // Endpoint values are correctly rounded to ~166 bits.
    Float scale = 1;
    if (scale < tail_scale(out.min)) scale = tail_scale(out.min);
    if (scale < tail_scale(out.max)) scale = tail_scale(out.max);
    out.resolution = round_up(Real(Float(mp::ldexp(scale, -150))));
  }
  const bool inexact_input = !x.exact() || !r.exact();
  if (inexact_input && out.exact) {
    out.min = Real(out.min.as_float());
    out.max = Real(out.max.as_float());
    out.exact = false;
  }
  return out;
}

/// max - min of f over [x, x + r].
inline Real window_diam(const FnExpr& f, const Real& x, const Real& r) {
  const WindowExtrema w = window_extrema(f, x, r);
  return w.max - w.min;
}

/// Upper bound of the diameter: exact on the piecewise-linear fragment,
/// otherwise widened by the resolution on both sides.
inline Real window_diam_upper(const FnExpr& f, const Real& x, const Real& r) {
  const WindowExtrema w = window_extrema(f, x, r);
  if (w.exact) return w.max - w.min;
  return round_up(w.max - w.min + w.resolution + w.resolution);
}

/// sup |f| over [0, t].  Exact on the piecewise-linear fragment; otherwise an
/// upper bound (inexact Real) that is never an underestimate.
inline Real sup_abs_on(const FnExpr& f, const Real& t) {
  if (t.sign() < 0) throw DomainError("sup_abs_on: T must be nonnegative");
  const WindowExtrema w = window_extrema(f, Real(0), t);
  const Real s = max(abs(w.min), abs(w.max));
  if (w.exact) return s;
  return round_up(s + w.resolution);
}

/// Largest |slope| of f over [lo, hi]: exact on the piecewise-linear
/// fragment, a structural upper bound otherwise.
inline Real max_slope_on(const FnExpr& f, const Rat& lo, const Rat& hi) {
  if (is_piecewise_linear(f) && exact_on(f, hi)) {
    if (lo == hi) return slope_bound(f, lo, hi);
    return Real(restrict_pl(f, lo, hi).max_abs_slope());
  }
  return slope_bound(f, lo, hi);
}

}  // namespace sohom
