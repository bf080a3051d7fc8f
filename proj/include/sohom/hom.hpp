#pragma once

// Homomorphisms of the lattice of slowly oscillating functions.  Every one
// is either zero or c * delta_x with c > 0, so a Hom is that tagged pair.
// classify() recovers the pair from a black-box oracle:
//   c = phi(1),  x = (phi(sqrt tau) / c)^2 - 1,
// then cross-checks with eta atoms and lattice laws on a fixed probe set.

#include "sohom/eta.hpp"
#include "sohom/eval.hpp"
#include "sohom/fnexpr.hpp"
#include "sohom/json_io.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace sohom {

class Hom {
 public:
  static Hom zero() { return Hom(); }

  static Hom scaled(Real c, Real x) {
    if (c.sign() <= 0) throw DomainError("Scaled hom needs c > 0, got " + c.str());
    if (x.sign() < 0) throw DomainError("Scaled hom needs x >= 0, got " + x.str());
    Hom h;
    h.zero_ = false;
    h.c_ = std::move(c);
    h.x_ = std::move(x);
    return h;
  }

  static Hom delta(Real x) { return scaled(Real(1), std::move(x)); }

  bool is_zero() const { return zero_; }
  const Real& c() const { return c_; }
  const Real& x() const { return x_; }

  std::string str() const { return zero_ ? "Zero" : "Scaled(" + c_.str() + ", " + x_.str() + ")"; }

 private:
  Hom() = default;
  bool zero_ = true;
  Real c_ = Real(0), x_ = Real(0);
};

inline Real apply(const Hom& h, const FnExpr& f) {
  if (h.is_zero()) return Real(0);
  return h.c() * eval(f, h.x());
}

inline Json hom_to_json(const Hom& h) {
  if (h.is_zero()) return Json{{"hom", "zero"}};
  auto num = [](const Real& r) { return r.exact() ? rat_to_json(r.rat()) : Json(r.decimal(30)); };
  return Json{{"hom", "scaled"}, {"c", num(h.c())}, {"x", num(h.x())}};
}

inline Hom hom_from_json(const Json& j) {
  const std::string kind = detail::require_string(j, "hom", "hom");
  if (kind == "zero") return Hom::zero();
  if (kind == "scaled")
    return Hom::scaled(Real(rat_from_json(detail::require(j, "c", "hom"), "hom.c")),
                       Real(rat_from_json(detail::require(j, "x", "hom"), "hom.x")));
  throw ParseError("hom: unknown kind \"" + kind + "\"");
}

// Axioms ----------------------------------------------------------------------

struct AxiomViolation {
  std::string axiom;
  FnExpr f, g;
  Real lhs, rhs;
};

struct AxiomReport {
  std::size_t checks = 0;
  std::vector<AxiomViolation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

// Exact equality when both sides are exact, else |a-b| <= tol max(1,|a|,|b|).
inline bool axiom_equal(const Real& a, const Real& b, double tol) { return close(a, b, tol); }

inline bool axiom_le(const Real& a, const Real& b, double tol) {
  if (a.exact() && b.exact()) return a <= b;
  return a <= b || axiom_equal(a, b, tol);
}

}  // namespace detail

/// Checks, over `pairs` random pairs from the corpus:
///   (i) joins and meets, (ii) linearity for random rational lambda, mu,
///   (iii) absolute values, (iv) order on pairs f <= f v g and f ^ g <= f,
///   (v) positivity on |f| and f v 0.
inline AxiomReport axiom_suite(const Hom& h, const std::vector<FnExpr>& corpus, std::size_t pairs,
                               std::uint64_t seed = 1, double tol = 1e-12) {
  AxiomReport r;
  if (corpus.empty()) return r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  std::uniform_int_distribution<long> num(-12, 12), den(1, 6);
  auto check = [&](bool ok, const char* axiom, const FnExpr& f, const FnExpr& g, const Real& lhs, const Real& rhs) {
    ++r.checks;
    if (!ok) r.violations.push_back({axiom, f, g, lhs, rhs});
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    const FnExpr& f = corpus[pick(rng)];
    const FnExpr& g = corpus[pick(rng)];
    const Real pf = apply(h, f), pg = apply(h, g);

    const Real pj = apply(h, join(f, g)), pm = apply(h, meet(f, g));
    check(detail::axiom_equal(pj, max(pf, pg), tol), "(i) join", f, g, pj, max(pf, pg));
    check(detail::axiom_equal(pm, min(pf, pg), tol), "(i) meet", f, g, pm, min(pf, pg));

    const Rat lambda(num(rng), den(rng)), mu(num(rng), den(rng));
    const Real pl = apply(h, add(scale(lambda, f), scale(mu, g)));
    const Real rl = Real(lambda) * pf + Real(mu) * pg;
    check(detail::axiom_equal(pl, rl, tol), "(ii) linear", f, g, pl, rl);

    const Real pa = apply(h, abs(f));
    check(detail::axiom_equal(pa, abs(pf), tol), "(iii) abs", f, f, pa, abs(pf));

    check(detail::axiom_le(pf, pj, tol), "(iv) order", f, join(f, g), pf, pj);
    check(detail::axiom_le(pm, pf, tol), "(iv) order", meet(f, g), f, pm, pf);

    const Real pp = apply(h, join(f, constant(Rat(0))));
    check(detail::axiom_le(Real(0), pa, tol), "(v) positive", abs(f), abs(f), pa, Real(0));
    check(detail::axiom_le(Real(0), pp, tol), "(v) positive", join(f, constant(Rat(0))), f, pp, Real(0));
  }
  return r;
}

// Classification ----------------------------------------------------------------

using HomOracle = std::function<Real(const FnExpr&)>;

inline HomOracle model_oracle(const Hom& h) {
  return [h](const FnExpr& f) { return apply(h, f); };
}

struct Probe {
  std::string name;
  FnExpr f;
};

/// Twelve fixed probes: constants, sqrt tau, two eta atoms, and lattice
/// combinations of them.
inline const std::vector<Probe>& probe_corpus() {
  static const std::vector<Probe> probes = [] {
    const FnExpr one = constant(Rat(1)), two = constant(Rat(2)), r = sqrt_tau();
    const FnExpr ea = eta(Seq::affine(1, 1)), eb = eta(Seq::affine(2, 3));
    return std::vector<Probe>{
        {"1", one},
        {"2", two},
        {"sqrt_tau", r},
        {"eta_a", ea},
        {"eta_b", eb},
        {"sqrt_tau v 2", join(r, two)},
        {"sqrt_tau ^ 2", meet(r, two)},
        {"eta_a v eta_b", join(ea, eb)},
        {"eta_a ^ eta_b", meet(ea, eb)},
        {"sqrt_tau v eta_a", join(r, ea)},
        {"sqrt_tau ^ eta_b", meet(r, eb)},
        {"|sqrt_tau - 2|", abs(add(r, constant(Rat(-2))))},
    };
  }();
  return probes;
}

struct Classification {
  enum class Kind { Zero, Scaled, Inconsistent, NegativeUnit };
  Kind kind = Kind::Inconsistent;
  std::optional<Hom> hom;
  std::string reason;
  bool ok() const { return kind == Kind::Zero || kind == Kind::Scaled; }
};

inline const char* kind_name(Classification::Kind k) {
  switch (k) {
    case Classification::Kind::Zero: return "zero";
    case Classification::Kind::Scaled: return "scaled";
    case Classification::Kind::Inconsistent: return "inconsistent";
    case Classification::Kind::NegativeUnit: return "negative_unit";
  }
  return "?";
}

namespace detail {

inline bool near(const Real& a, const Real& b, double tol) { return close(a, b, tol); }

inline Classification inconsistent(std::string why) {
  return Classification{Classification::Kind::Inconsistent, std::nullopt, std::move(why)};
}

// Lattice and linearity laws among the probes themselves.
inline std::optional<std::string> probe_law_failure(const std::vector<Real>& v, double tol) {
  auto fails = [&](std::size_t combo, const Real& expected) { return !near(v[combo], expected, tol); };
  if (fails(1, Real(2) * v[0])) return "phi(2) != 2 phi(1)";
  if (fails(5, max(v[2], v[1]))) return "join probe: phi(sqrt_tau v 2) != max";
  if (fails(6, min(v[2], v[1]))) return "meet probe: phi(sqrt_tau ^ 2) != min";
  if (fails(7, max(v[3], v[4]))) return "join probe: phi(eta_a v eta_b) != max";
  if (fails(8, min(v[3], v[4]))) return "meet probe: phi(eta_a ^ eta_b) != min";
  if (fails(9, max(v[2], v[3]))) return "join probe: phi(sqrt_tau v eta_a) != max";
  if (fails(10, min(v[2], v[4]))) return "meet probe: phi(sqrt_tau ^ eta_b) != min";
  if (fails(11, abs(v[2] - v[1]))) return "abs probe: phi(|sqrt_tau - 2|) != |phi(sqrt_tau) - phi(2)|";
  return std::nullopt;
}

}  // namespace detail

/// Recovers Zero or Scaled(c, x) from an oracle, or reports why it cannot be
/// a homomorphism.
inline Classification classify(const HomOracle& oracle, double tol = 1e-9) {
  const auto& probes = probe_corpus();
  std::vector<Real> v;
  v.reserve(probes.size());
  for (const Probe& p : probes) v.push_back(oracle(p.f));

  const Real& c = v[0];
  if (mp::abs(c.as_float()) <= Float(tol)) {
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (mp::abs(v[i].as_float()) > Float(tol))
        return detail::inconsistent("phi(1) = 0 but phi(" + probes[i].name + ") = " + v[i].str());
    return Classification{Classification::Kind::Zero, Hom::zero(), "phi(1) = 0 and every probe vanishes"};
  }
  if (c.sign() < 0)
    return Classification{Classification::Kind::NegativeUnit, std::nullopt, "phi(1) = " + c.str() + " < 0"};

  if (auto law = detail::probe_law_failure(v, tol)) return detail::inconsistent(*law);

  const Real root = v[2] / c;
  Real x = root * root - Real(1);
  if (x.sign() < 0) {
    if (mp::abs(x.as_float()) > Float(tol)) return detail::inconsistent("phi(sqrt_tau) / phi(1) < 1");
    x = Real(0);
  }
  const Hom h = Hom::scaled(c, x);
  // Second recovery: phi(eta_a) / c = eta_a(x), and every probe matches c f(x).
  for (std::size_t i = 1; i < probes.size(); ++i) {
    const Real expected = apply(h, probes[i].f);
    if (!detail::near(v[i], expected, tol))
      return detail::inconsistent("phi(" + probes[i].name + ") = " + v[i].str() + " but c f(x) = " + expected.str() +
                                  " at x = " + x.str());
  }
  return Classification{Classification::Kind::Scaled, h, "x = (phi(sqrt_tau)/c)^2 - 1 confirmed by eta probes"};
}

inline Json classification_to_json(const Classification& c) {
  Json j{{"verdict", kind_name(c.kind)}, {"reason", c.reason}};
  if (c.hom) j["hom"] = hom_to_json(*c.hom);
  return j;
}

// Vanishing ---------------------------------------------------------------------

struct VanishingReport {
  Rat threshold;
  bool reached = false;
  Int n;                     // smallest integer with hi(n)/lo(n) >= threshold
  std::size_t interval = 0;  // k with n in [b_{k-1}, b_k] (0 means [0, b_2])
  Real ratio;
  Int horizon;  // b_8
  Rat L;
  bool zero_hom_vanishes = false;  // classify(phi(1)=0 model) is Zero and Zero(f) = 0
};

/// Smallest integer n with hi(n) >= threshold lo(n) for the witness pair of f.
/// hi/lo = eta_b/eta_a, and on each piece where eta_b is linear,
/// eta_b - t eta_a is convex, so its sign changes at most once upward there.
inline VanishingReport vanishing_demo(const FnExpr& f, const Rat& threshold) {
  if (threshold <= 0) throw DomainError("vanishing_demo: threshold must be positive");
  const WitnessPair w = witness_pair(f);
  VanishingReport r;
  r.threshold = threshold;
  r.L = w.envelope.L_bound;
  const Seq& b = w.dominator.result;
  r.horizon = b.at(8);
  const EtaFunction ea(w.envelope.seq), eb(b);
  const Real t(threshold);
  auto ratio_at = [&](const Int& n) { return eb.eval(Rat(n)) / ea.eval(Rat(n)); };
  auto good = [&](const Int& n) { return eb.eval(Rat(n)) >= t * ea.eval(Rat(n)); };

  const Classification z = classify([](const FnExpr&) { return Real(0); });
  r.zero_hom_vanishes = z.kind == Classification::Kind::Zero && apply(*z.hom, f).sign() == 0;

  if (good(Int(1))) {
    r.reached = true;
    r.n = 1;
    r.ratio = ratio_at(Int(1));
    return r;
  }
  // Pieces [1, b_2], [b_2, b_3], ..., [b_7, b_8].
  Int lo = 1;
  for (std::size_t k = 2; k <= 8; ++k) {
    Int hi = b.at(k);
    if (good(hi)) {
      while (lo + 1 < hi) {
        const Int mid = (lo + hi) / 2;
        (good(mid) ? hi : lo) = mid;
      }
      r.reached = true;
      r.n = hi;
      r.interval = k;
      r.ratio = ratio_at(hi);
      return r;
    }
    lo = hi;
  }
  return r;
}

inline Json vanishing_to_json(const VanishingReport& r) {
  Json j{{"threshold", rat_to_json(r.threshold)}, {"reached", r.reached}, {"horizon", int_to_json(r.horizon)},
         {"L", rat_to_json(r.L)}};
  if (r.reached) {
    j["n"] = int_to_json(r.n);
    j["ratio"] = r.ratio.exact() ? rat_to_json(r.ratio.rat()) : Json(r.ratio.decimal(20));
  }
  j["conclusion"] = r.zero_hom_vanishes ? "a hom with phi(1) = 0 classifies as Zero, so phi(f) = 0"
                                        : "zero-unit oracle did not classify as Zero";
  return j;
}

}  // namespace sohom
