#pragma once

// Slow oscillation: f is SO when for every window length R and tolerance eps
// there is a horizon M with diam f([x, x+R]) < eps for all x > M.
//
// modulus_of() certifies this structurally, producing M(R, eps) as a tree
// that mirrors the expression.  Every expression in the algebra is
// eventually s*x + h with h slowly oscillating, so a nonzero asymptotic slope
// s refutes slow oscillation: windows of length 1 eventually have diameter
// above |s|/2.

#include "sohom/eval.hpp"
#include "sohom/fnexpr.hpp"
#include "sohom/json_io.hpp"
#include "sohom/real.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sohom {

class SOModulus {
 public:
  struct Zero {};
  struct Power {  // tau^alpha
    Rat alpha;
  };
  struct EtaTail {
    std::shared_ptr<const EtaFunction> fn;
  };
  struct Fixed {  // flat beyond a known point
    Rat horizon;
  };
  struct Sum {
    std::shared_ptr<const SOModulus> lhs, rhs;
  };
  struct Scaled {
    Rat lambda;
    std::shared_ptr<const SOModulus> arg;
  };
  struct Max {
    std::shared_ptr<const SOModulus> lhs, rhs;
  };
  using Variant = std::variant<Zero, Power, EtaTail, Fixed, Sum, Scaled, Max>;

  explicit SOModulus(Variant v) : v_(std::move(v)) {}

  const Variant& node() const { return v_; }

  /// A horizon M >= 0 such that diam f([x, x+R]) < eps for every x > M.
  Rat operator()(const Rat& R, const Rat& eps) const {
    if (R <= 0 || eps <= 0) throw DomainError("modulus: R and eps must be positive");
    return std::visit(
        overloaded{
            [](const Zero&) { return Rat(0); },
            [&](const Power& p) {
              // diam <= R * alpha * (x+1)^(alpha-1) < eps once (x+1)^(1-alpha) > alpha R / eps.
              const Rat base = p.alpha * R / eps;
              return rat_upper_bound(pow_rat(Real(base), Rat(1 / (1 - p.alpha))));
            },
            [&](const EtaTail& e) {
              // Past a_n every slope is at most 1/n.
              const Int k = ceil_rat(Rat(R / eps)) + 1;
              const std::size_t n = k < 2 ? 2 : k.convert_to<std::size_t>();
              return Rat(e.fn->seq().at(n));
            },
            [](const Fixed& f) { return f.horizon; },
            [&](const Sum& s) {
              const Rat half = eps / 2;
              return std::max((*s.lhs)(R, half), (*s.rhs)(R, half));
            },
            [&](const Scaled& s) {
              if (s.lambda == 0) return Rat(0);
              return (*s.arg)(R, Rat(eps / mp::abs(s.lambda)));
            },
            [&](const Max& m) { return std::max((*m.lhs)(R, eps), (*m.rhs)(R, eps)); },
        },
        v_);
  }

  std::string describe() const {
    return std::visit(
        overloaded{
            [](const Zero&) { return std::string("0"); },
            [](const Power& p) { return "(alpha R/eps)^(1/(1-alpha)) alpha=" + to_string(p.alpha); },
            [](const EtaTail& e) { return "a_max(2,ceil(R/eps)+1) of " + seq_to_json(e.fn->seq(), 5).dump(); },
            [](const Fixed& f) { return "flat after " + to_string(f.horizon); },
            [](const Sum& s) { return "max(" + s.lhs->describe() + " @eps/2, " + s.rhs->describe() + " @eps/2)"; },
            [](const Scaled& s) { return s.arg->describe() + " @eps/" + to_string(Rat(mp::abs(s.lambda))); },
            [](const Max& m) { return "max(" + m.lhs->describe() + ", " + m.rhs->describe() + ")"; },
        },
        v_);
  }

 private:
  Variant v_;
};

/// Result of an empirical window scan.
struct EmpiricalReport {
  Rat R, eps, horizon, step;
  std::size_t windows = 0;
  std::vector<Rat> violations;  // grid points x with diam f([x, x+R]) >= eps
  std::optional<Rat> last_violation;
  bool inconclusive = false;  // the last grid point still violates

  /// Smallest admissible horizon observed on the grid.
  Rat horizon_found() const { return last_violation ? *last_violation : Rat(0); }
};

struct NotSOWitness {
  Rat slope;  // asymptotic slope s != 0
  Rat R, eps;
};

struct SOVerdict {
  enum class Kind { Certified, NotSO, Unknown };
  Kind kind = Kind::Unknown;
  std::optional<SOModulus> modulus;
  std::optional<NotSOWitness> witness;
  std::optional<EmpiricalReport> report;
  std::string reason;

  bool certified() const { return kind == Kind::Certified; }
};

/// Scan window_diam(f, x, R) for x = 0, step, 2 step, ... <= horizon, with
/// step = min(R/4, 1).
inline EmpiricalReport check_so_empirical(const FnExpr& f, const Rat& R, const Rat& eps, const Rat& horizon) {
  if (R <= 0 || eps <= 0 || horizon <= 0) throw DomainError("check_so: R, eps and horizon must be positive");
  EmpiricalReport rep;
  rep.R = R;
  rep.eps = eps;
  rep.horizon = horizon;
  rep.step = std::min(Rat(R / 4), Rat(1));
  const Real e(eps);
  bool last_bad = false;
  for (Rat x = 0; x <= horizon; x += rep.step) {
    ++rep.windows;
    last_bad = !(window_diam(f, Real(x), Real(R)) < e);
    if (last_bad) {
      rep.violations.push_back(x);
      rep.last_violation = x;
    }
  }
  rep.inconclusive = last_bad;
  return rep;
}

namespace detail {

struct Structural {
  SOVerdict::Kind kind;
  std::optional<Rat> slope;  // asymptotic slope, when known
  std::shared_ptr<const SOModulus> modulus;
  std::string reason;
};

inline std::shared_ptr<const SOModulus> mod(SOModulus::Variant v) { return std::make_shared<const SOModulus>(std::move(v)); }

inline Structural certified(SOModulus::Variant v) { return {SOVerdict::Kind::Certified, Rat(0), mod(std::move(v)), {}}; }

inline Structural linear(const Rat& s, std::string why) {
  if (s == 0) return {SOVerdict::Kind::Unknown, Rat(0), nullptr, std::move(why)};
  return {SOVerdict::Kind::NotSO, s, nullptr, std::move(why)};
}

// Combines children: certified if all are; otherwise decided by the slope.
template <class Make>
Structural combine(const Structural& a, const Structural* b, const std::optional<Rat>& slope, Make make_modulus) {
  const bool all_cert = a.kind == SOVerdict::Kind::Certified && (!b || b->kind == SOVerdict::Kind::Certified);
  if (all_cert) return {SOVerdict::Kind::Certified, Rat(0), mod(make_modulus()), {}};
  if (!slope) {
    const std::string& why = !a.reason.empty() || !b ? a.reason : b->reason;
    return {SOVerdict::Kind::Unknown, std::nullopt, nullptr, why};
  }
  if (*slope != 0) return {SOVerdict::Kind::NotSO, slope, nullptr, "asymptotic slope " + to_string(*slope)};
  return {SOVerdict::Kind::Unknown, Rat(0), nullptr, "slope cancels between non-certified parts"};
}

inline std::optional<Rat> lift(const std::optional<Rat>& a, const std::optional<Rat>& b, Rat (*op)(const Rat&, const Rat&)) {
  if (!a || !b) return std::nullopt;
  return op(*a, *b);
}

inline Structural structural(const FnExpr& f) {
  return std::visit(
      overloaded{
          [](const atom::Const&) { return certified(SOModulus::Zero{}); },
          [](const atom::Tau&) { return linear(Rat(1), "tau has slope 1"); },
          [](const atom::TauPow& t) { return certified(SOModulus::Power{t.alpha}); },
          [&](const atom::Eta& e) -> Structural {
            const Seq& s = e.fn->seq();
            if (const auto& d = e.fn->depth()) {
              if (s.length() && *s.length() < *d)
                return {SOVerdict::Kind::Unknown, std::nullopt, nullptr, "finite stage deeper than its sequence"};
              const Rat slope = *d <= 1 ? Rat(1) : Rat(1, static_cast<long>(*d));
              return linear(slope, "finite stage keeps slope " + to_string(slope));
            }
            if (s.length())
              return {SOVerdict::Kind::Unknown, std::nullopt, nullptr, "eta over a finite sequence is undefined far out"};
            return certified(SOModulus::EtaTail{e.fn});
          },
          [](const atom::PL& pl) {
            if (pl.final_slope != 0) return linear(pl.final_slope, "final slope " + to_string(pl.final_slope));
            return certified(SOModulus::Fixed{pl.xs.back()});
          },
          [](const op::Add& n) {
            const Structural a = structural(n.lhs), b = structural(n.rhs);
            return combine(a, &b, lift(a.slope, b.slope, [](const Rat& x, const Rat& y) { return Rat(x + y); }),
                           [&] { return SOModulus::Variant(SOModulus::Sum{a.modulus, b.modulus}); });
          },
          [](const op::Scale& n) {
            const Structural a = structural(n.arg);
            std::optional<Rat> s;
            if (a.slope) s = Rat(n.lambda * *a.slope);
            if (n.lambda == 0) return certified(SOModulus::Zero{});
            return combine(a, nullptr, s, [&] { return SOModulus::Variant(SOModulus::Scaled{n.lambda, a.modulus}); });
          },
          [](const op::Join& n) {
            const Structural a = structural(n.lhs), b = structural(n.rhs);
            return combine(a, &b, lift(a.slope, b.slope, [](const Rat& x, const Rat& y) { return std::max(x, y); }),
                           [&] { return SOModulus::Variant(SOModulus::Max{a.modulus, b.modulus}); });
          },
          [](const op::Meet& n) {
            const Structural a = structural(n.lhs), b = structural(n.rhs);
            return combine(a, &b, lift(a.slope, b.slope, [](const Rat& x, const Rat& y) { return std::min(x, y); }),
                           [&] { return SOModulus::Variant(SOModulus::Max{a.modulus, b.modulus}); });
          },
          [](const op::Abs& n) {
            const Structural a = structural(n.arg);
            std::optional<Rat> s;
            if (a.slope) s = Rat(mp::abs(*a.slope));
            return combine(a, nullptr, s, [&] { return a.modulus->node(); });
          },
      },
      f.node().v);
}

}  // namespace detail

/// Window and tolerance used for the empirical report attached to Unknown
/// verdicts.
struct UnknownProbe {
  Rat R = 1;
  Rat eps = Rat(1, 4);
  Rat horizon = 100;
};

inline SOVerdict modulus_of(const FnExpr& f, const UnknownProbe& probe = {}) {
  const detail::Structural s = detail::structural(f);
  SOVerdict v;
  v.kind = s.kind;
  v.reason = s.reason;
  switch (s.kind) {
    case SOVerdict::Kind::Certified:
      v.modulus = *s.modulus;
      break;
    case SOVerdict::Kind::NotSO:
      v.witness = NotSOWitness{*s.slope, Rat(1), Rat(mp::abs(*s.slope) / 2)};
      break;
    case SOVerdict::Kind::Unknown:
      try {
        v.report = check_so_empirical(f, probe.R, probe.eps, probe.horizon);
      } catch (const std::exception& e) {
        v.reason += std::string("; scan failed: ") + e.what();
      }
      break;
  }
  return v;
}

/// Outcome of the uniform-continuity check on [0, T].
struct UCResult {
  Real delta;
  Real slope_bound;      // Lipschitz bound on [0, T + delta]
  bool exact = false;    // slope bound exact (piecewise-linear fragment)
  std::size_t pairs = 0;
  Real worst;            // largest |f(x) - f(y)| seen over sampled pairs
  bool ok = true;        // every sampled pair stayed below eps
};

namespace detail {

inline UCResult sample_uc(const FnExpr& f, const Rat& eps, const Rat& T, const Real& delta, UCResult r,
                          std::size_t samples) {
  // Pairs (x, x + theta delta) with x on a uniform grid and theta just below 1.
  const Real theta(Rat(1023, 1024));
  const Real e(eps);
  r.worst = Real(0);
  for (std::size_t i = 0; i <= samples; ++i) {
    const Rat x = T * Rat(static_cast<long>(i), static_cast<long>(samples));
    const Real y = Real(x) + theta * delta;
    const Real d = abs(eval(f, y) - eval(f, Real(x)));
    ++r.pairs;
    if (r.worst < d) r.worst = d;
    if (!(d < e)) r.ok = false;
  }
  return r;
}

}  // namespace detail

/// Finds delta with |f(x) - f(y)| < eps whenever |x - y| < delta in [0, T]:
/// delta = min(1, eps / L) with L a Lipschitz bound, exact on the
/// piecewise-linear fragment.  The choice is then confirmed by sampling.
inline UCResult uc_check(const FnExpr& f, const Rat& eps, const Rat& T, std::size_t samples = 1000) {
  if (eps <= 0 || T <= 0) throw DomainError("uc_check: eps and T must be positive");
  if (!modulus_of(f).certified()) throw DomainError("uc_check: expression is not certified slowly oscillating");
  UCResult r;
  const Rat hi = T + 1;
  r.exact = is_piecewise_linear(f) && exact_on(f, hi);
  r.slope_bound = max_slope_on(f, Rat(0), hi);
  if (r.slope_bound.sign() == 0) {
    r.delta = Real(1);
  } else {
    r.delta = min(Real(1), Real(eps) / r.slope_bound);
    if (!r.delta.exact()) r.delta = Real(rat_lower_bound(r.delta));
  }
  return detail::sample_uc(f, eps, T, r.delta, r, samples);
}

/// Sampling-only check of a caller-supplied delta.
inline UCResult uc_accepts(const FnExpr& f, const Rat& eps, const Rat& T, const Rat& delta, std::size_t samples = 1000) {
  if (eps <= 0 || T <= 0 || delta <= 0) throw DomainError("uc_accepts: eps, T and delta must be positive");
  UCResult r;
  r.delta = Real(delta);
  r.slope_bound = max_slope_on(f, Rat(0), T + delta);
  return detail::sample_uc(f, eps, T, r.delta, r, samples);
}

// JSON certificates -----------------------------------------------------------

inline const std::vector<std::pair<Rat, Rat>>& default_modulus_probe() {
  static const std::vector<std::pair<Rat, Rat>> grid = {
      {Rat(1), Rat(1, 2)}, {Rat(1), Rat(1, 10)}, {Rat(2), Rat(1, 16)}, {Rat(5), Rat(1, 2)}, {Rat(5), Rat(1, 100)}};
  return grid;
}

inline Json report_to_json(const EmpiricalReport& r) {
  Json j{{"R", rat_to_json(r.R)},
         {"eps", rat_to_json(r.eps)},
         {"horizon", rat_to_json(r.horizon)},
         {"step", rat_to_json(r.step)},
         {"windows", r.windows},
         {"violations", r.violations.size()}};
  j["last_violation"] = r.last_violation ? rat_to_json(*r.last_violation) : Json(nullptr);
  j["M"] = rat_to_json(r.horizon_found());
  j["inconclusive"] = r.inconclusive;
  return j;
}

inline Json verdict_to_json(const SOVerdict& v,
                            const std::vector<std::pair<Rat, Rat>>& probe = default_modulus_probe()) {
  switch (v.kind) {
    case SOVerdict::Kind::Certified: {
      Json rows = Json::array();
      for (const auto& [R, eps] : probe)
        rows.push_back(Json::array({rat_to_json(R), rat_to_json(eps), rat_to_json((*v.modulus)(R, eps))}));
      return Json{{"verdict", "certified"}, {"modulus_probe", std::move(rows)}, {"modulus", v.modulus->describe()}};
    }
    case SOVerdict::Kind::NotSO:
      return Json{{"verdict", "not_so"},
                  {"slope", rat_to_json(v.witness->slope)},
                  {"R", rat_to_json(v.witness->R)},
                  {"eps", rat_to_json(v.witness->eps)},
                  {"reason", v.reason}};
    case SOVerdict::Kind::Unknown: {
      Json j{{"verdict", "unknown"}, {"reason", v.reason}};
      if (v.report) j["report"] = report_to_json(*v.report);
      return j;
    }
  }
  return Json();
}

}  // namespace sohom
