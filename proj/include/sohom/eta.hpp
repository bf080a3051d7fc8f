#pragma once

// Envelopes and dominators built from eta_a.
//
// build_envelope(f) picks a with |f| <= L eta_a, taking
//   a_n = max(a_{n-1} + 1, ceil(M(2, (n+1)^-4)) + 1),   a_0 = 0,
//   L   = 1 + sup{|f(x)| : x <= a_1},
// and build_dominator(a) picks b with eta_b / eta_a unbounded:
//   b_0 = a_1,
//   b_n = max(b_{n-1} + 1, ceil(n^2 eta_a(b_{n-1}) + b_{n-1} + a_{(n+1)^3})).
// Both sequences are lazy and memoized.

#include "sohom/eval.hpp"
#include "sohom/fnexpr.hpp"
#include "sohom/json_io.hpp"
#include "sohom/somod.hpp"

#include <algorithm>
#include <memory>
#include <utility>
#include <vector>

namespace sohom {

inline FnExpr build_eta(const Seq& a) { return eta(a); }

struct Envelope {
  Seq seq;
  Real L;       // 1 + sup |f| on [0, a_1]; inexact when f is
  Rat L_bound;  // rational L' >= L, used when L has to scale an expression
  FnExpr source;
};

struct Dominator {
  Seq base;
  Seq result;
  Int b0;
};

inline Envelope build_envelope(const FnExpr& f) {
  const SOVerdict v = modulus_of(f);
  if (!v.certified()) throw DomainError("build_envelope: expression is not certified slowly oscillating");
  auto m = std::make_shared<const SOModulus>(*v.modulus);
  Seq a = Seq::rule("max(a_{n-1}+1, ceil(M(2,(n+1)^-4))+1)", [m](std::size_t n, const Int& prev) {
    const Int k = Int(static_cast<unsigned long long>(n + 1));
    const Rat eps(Int(1), k * k * k * k);
    return std::max(Int(prev + 1), Int(ceil_rat((*m)(Rat(2), eps)) + 1));
  });
  const Real sup = sup_abs_on(f, Real(Rat(a.at(1))));
  Envelope env{a, Real(1) + sup, Rat(0), f};
  env.L_bound = rat_upper_bound(env.L);
  return env;
}

inline Dominator build_dominator(const Seq& a) {
  auto eta_a = std::make_shared<const EtaFunction>(a);
  const Int b0 = a.at(1);
  Seq b = Seq::rule(
      "max(b_{n-1}+1, ceil(n^2 eta_a(b_{n-1}) + b_{n-1} + a_{(n+1)^3}))",
      [a, eta_a](std::size_t n, const Int& prev) {
        const std::size_t deep = (n + 1) * (n + 1) * (n + 1);
        if (!a.can_index(deep))
          throw SeqExhausted("dominator needs a_" + std::to_string(deep) + " but the base sequence is shorter");
        const Rat nn(static_cast<long>(n * n));
        const Real target = Real(nn) * eta_a->eval(Rat(prev)) + Real(Rat(prev)) + Real(Rat(a.at(deep)));
        return std::max(Int(prev + 1), ceil_real(target));
      },
      b0);
  return Dominator{a, b, b0};
}

/// c_n = max(a_n, b_n).  Two explicit lists merge to the shorter length.
inline Seq merge_sequences(const Seq& a, const Seq& b) {
  if (a.identity() == b.identity()) return a;
  if (a.length() && b.length()) {
    const std::size_t n = std::min(*a.length(), *b.length());
    std::vector<Int> c;
    for (std::size_t i = 1; i <= n; ++i) c.push_back(std::max(a.at(i), b.at(i)));
    return Seq::explicit_list(std::move(c));
  }
  return Seq::rule("max(a_n, b_n)", [a, b](std::size_t n, const Int&) { return std::max(a.at(n), b.at(n)); });
}

struct WitnessPair {
  FnExpr lo, hi;
  Envelope envelope;
  Dominator dominator;
};

/// |f| <= lo <= hi with hi/lo unbounded on the integers.
inline WitnessPair witness_pair(const FnExpr& f) {
  Envelope env = build_envelope(f);
  Dominator dom = build_dominator(env.seq);
  FnExpr lo = scale(env.L_bound, eta(env.seq));
  FnExpr hi = scale(env.L_bound, eta(dom.result));
  return WitnessPair{std::move(lo), std::move(hi), std::move(env), std::move(dom)};
}

// Grid checks and certificates ------------------------------------------------

struct GridCheck {
  Rat xmax;
  std::size_t points = 0;
  std::size_t violations = 0;
  std::optional<Rat> first_violation;
};

/// Horizon min(cap, s_k), or cap when s_k is out of reach.
inline Rat grid_horizon(const Seq& s, std::size_t k, const Rat& cap = Rat(10'000)) {
  try {
    if (!s.can_index(k)) return cap;
    return std::min(cap, Rat(s.at(k)));
  } catch (const SeqExhausted&) {
    return cap;
  }
}

/// |f(x)| <= L' eta_a(x) at `points` evenly spaced exact x in [0, xmax].
inline GridCheck check_envelope(const Envelope& env, std::size_t points = 1000, std::optional<Rat> xmax = {}) {
  GridCheck g;
  g.xmax = xmax ? *xmax : grid_horizon(env.seq, 20);
  g.points = points;
  const EtaFunction eta_a(env.seq);
  const Real L(env.L_bound);
  for (std::size_t i = 0; i < points; ++i) {
    const Rat x = g.xmax * Rat(static_cast<long>(i), static_cast<long>(points - 1));
    const Real lhs = abs(eval(env.source, Real(x)));
    if (L * eta_a.eval(x) < lhs) {
      if (!g.first_violation) g.first_violation = x;
      ++g.violations;
    }
  }
  return g;
}

/// eta_b(x) >= eta_a(x) on an evenly spaced grid.
inline GridCheck check_domination(const Seq& a, const Seq& b, std::size_t points, const Rat& xmax) {
  GridCheck g;
  g.xmax = xmax;
  g.points = points;
  const EtaFunction ea(a), eb(b);
  for (std::size_t i = 0; i < points; ++i) {
    const Rat x = xmax * Rat(static_cast<long>(i), static_cast<long>(points - 1));
    if (eb.eval(x) < ea.eval(x)) {
      if (!g.first_violation) g.first_violation = x;
      ++g.violations;
    }
  }
  return g;
}

/// eta_b(b_n) / eta_a(b_n) for n = 1..count.
inline std::vector<std::pair<std::size_t, Real>> dominator_ratios(const Dominator& d, std::size_t count) {
  const EtaFunction ea(d.base), eb(d.result);
  std::vector<std::pair<std::size_t, Real>> out;
  for (std::size_t n = 1; n <= count; ++n) {
    const Rat x(d.result.at(n));
    out.emplace_back(n, eb.eval(x) / ea.eval(x));
  }
  return out;
}

namespace detail {

// Explicit prefix of a lazy sequence, stopping after the first term with
// more than `max_digits` digits.
inline Json seq_prefix_json(const Seq& s, std::size_t count, std::size_t max_digits = 60) {
  if (s.kind() != SeqKind::Rule) return seq_to_json(s);
  Json values = Json::array();
  for (std::size_t i = 1; i <= count; ++i) {
    const Int v = s.at(i);
    values.push_back(int_to_json(v));
    if (v.str().size() > max_digits) break;
  }
  return Json{{"kind", "explicit"}, {"values", std::move(values)}, {"rule", s.description()}};
}

inline Json real_to_json(const Real& r) { return r.exact() ? rat_to_json(r.rat()) : Json(r.decimal(20)); }

}  // namespace detail

inline Json envelope_to_json(const Envelope& env, const GridCheck& g) {
  Json j{{"type", "envelope"}, {"L", rat_to_json(env.L_bound)}};
  if (!env.L.exact()) j["L_approx"] = env.L.decimal(20);
  j["seq"] = detail::seq_prefix_json(env.seq, 20);
  j["grid"] = Json{{"xmax", rat_to_json(g.xmax)}, {"points", g.points}, {"violations", g.violations}};
  return j;
}

inline Json dominator_to_json(const Dominator& d, std::size_t count, const GridCheck& g) {
  Json ratios = Json::array();
  for (const auto& [n, r] : dominator_ratios(d, count))
    ratios.push_back(Json{{"n", n}, {"b_n", int_to_json(d.result.at(n))}, {"ratio", detail::real_to_json(r)},
                          {"ratio_approx", r.decimal(12)}});
  return Json{{"type", "dominator"},
              {"b0", int_to_json(d.b0)},
              {"base", detail::seq_prefix_json(d.base, 20)},
              {"seq", detail::seq_prefix_json(d.result, count)},
              {"ratios", std::move(ratios)},
              {"grid", Json{{"xmax", rat_to_json(g.xmax)}, {"points", g.points}, {"violations", g.violations}}}};
}

}  // namespace sohom
