#pragma once

// The homeomorphism between nonzero homs and H x (0, inf):
//   Phi(c delta_x) = (x, c),   Phi(0) = origin,
// basic neighborhoods V(phi; f_1..f_n; eps), the zero-point base
//   {(x, y) : y <= eps / eta_a(x)} u {0},
// and the radii that make Phi and its inverse continuous.

#include "sohom/eta_function.hpp"
#include "sohom/eval.hpp"
#include "sohom/hom.hpp"
#include "sohom/json_io.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace sohom {

class Point {
 public:
  static Point origin() { return Point(); }

  static Point at(Real x, Real s) {
    if (x.sign() < 0) throw DomainError("point needs x >= 0, got " + x.str());
    if (s.sign() <= 0) throw DomainError("point needs s > 0, got " + s.str());
    Point p;
    p.origin_ = false;
    p.x_ = std::move(x);
    p.s_ = std::move(s);
    return p;
  }

  bool is_origin() const { return origin_; }
  const Real& x() const { return x_; }
  const Real& s() const { return s_; }

  bool operator==(const Point& o) const {
    if (origin_ || o.origin_) return origin_ == o.origin_;
    return x_ == o.x_ && s_ == o.s_;
  }

  std::string str() const { return origin_ ? "Origin" : "At(" + x_.str() + ", " + s_.str() + ")"; }

 private:
  Point() = default;
  bool origin_ = true;
  Real x_ = Real(0), s_ = Real(0);
};

inline Point phi(const Hom& h) { return h.is_zero() ? Point::origin() : Point::at(h.x(), h.c()); }

inline Hom phi_inv(const Point& p) { return p.is_origin() ? Hom::zero() : Hom::scaled(p.s(), p.x()); }

/// Taxicab distance |dx| + |ds| between two points of H x (0, inf).
inline Real taxicab(const Point& p, const Point& q) {
  if (p.is_origin() || q.is_origin()) throw DomainError("taxicab: origin has no coordinates");
  return abs(p.x() - q.x()) + abs(p.s() - q.s());
}

// Neighborhoods -----------------------------------------------------------------

struct BasicNbhd {
  Hom center;
  std::vector<FnExpr> tests;
  Rat eps;
};

struct ZeroBaseNbhd {
  Rat eps;
  Seq seq;
};

using NbhdSpec = std::variant<BasicNbhd, ZeroBaseNbhd>;

/// |psi(f_i) - phi(f_i)| < eps for every test f_i.
inline bool in_nbhd(const Hom& candidate, const BasicNbhd& spec) {
  if (spec.eps <= 0) throw DomainError("neighborhood eps must be positive");
  if (spec.tests.empty()) throw DomainError("neighborhood needs at least one test function");
  const Real eps(spec.eps);
  for (const FnExpr& f : spec.tests)
    if (!(abs(apply(candidate, f) - apply(spec.center, f)) < eps)) return false;
  return true;
}

/// Origin, or y <= eps / eta_a(x) (non-strict).
inline bool zero_base_member(const Point& p, const Rat& eps, const Seq& seq) {
  if (eps <= 0) throw DomainError("zero base eps must be positive");
  if (p.is_origin()) return true;
  const EtaFunction e(seq);
  const Real value = p.x().exact() ? e.eval(p.x().rat()) : Real(e.eval(p.x().as_rat()).as_float());
  return p.s() * value <= Real(eps);
}

inline bool in_nbhd(const Hom& candidate, const NbhdSpec& spec) {
  return std::visit(overloaded{
                        [&](const BasicNbhd& b) { return in_nbhd(candidate, b); },
                        [&](const ZeroBaseNbhd& z) { return zero_base_member(phi(candidate), z.eps, z.seq); },
                    },
                    spec);
}

inline Json nbhd_to_json(const NbhdSpec& spec) {
  return std::visit(overloaded{
                        [](const BasicNbhd& b) {
                          Json tests = Json::array();
                          for (const FnExpr& f : b.tests) tests.push_back(to_json(f));
                          return Json{{"kind", "basic"},
                                      {"center", hom_to_json(b.center)},
                                      {"tests", std::move(tests)},
                                      {"eps", rat_to_json(b.eps)}};
                        },
                        [](const ZeroBaseNbhd& z) {
                          return Json{{"kind", "zero_base"}, {"eps", rat_to_json(z.eps)}, {"seq", seq_to_json(z.seq)}};
                        },
                    },
                    spec);
}

inline NbhdSpec nbhd_from_json(const Json& j) {
  const std::string kind = detail::require_string(j, "kind", "nbhd");
  const Rat eps = rat_from_json(detail::require(j, "eps", "nbhd"), "nbhd.eps");
  if (eps <= 0) throw ParseError("nbhd: eps must be positive");
  if (kind == "basic") {
    const Json& tests = detail::require(j, "tests", "nbhd");
    if (!tests.is_array() || tests.empty()) throw ParseError("nbhd: tests must be a nonempty array");
    BasicNbhd b{hom_from_json(detail::require(j, "center", "nbhd")), {}, eps};
    for (const Json& t : tests) b.tests.push_back(from_json(t));
    return b;
  }
  if (kind == "zero_base") return ZeroBaseNbhd{eps, seq_from_json(detail::require(j, "seq", "nbhd"))};
  throw ParseError("nbhd: unknown kind \"" + kind + "\"");
}

// Continuity radii --------------------------------------------------------------

struct Radii {
  Rat eps1, eps2;
};

/// eps1 = 1/2 min(e/2, s e / (2(x+1))),  eps2 = 1/2 (s e / 2 - eps1 (x+1)),
/// with e = min(eps, 1).  Any psi = t delta_y with |t - s| < eps1 and
/// |t(y+1) - s(x+1)| < eps2 then has |x - y| + |s - t| < eps.
inline Radii continuity_radii(const Rat& x, const Rat& s, const Rat& eps) {
  if (x < 0) throw DomainError("continuity_radii: x must be nonnegative");
  if (s <= 0 || eps <= 0) throw DomainError("continuity_radii: s and eps must be positive");
  // Without the cap t can fall far below s and y run off (s=1, x=0, eps=100,
  // t=1/100, y=1000 meets both tests).
  const Rat e = std::min(eps, Rat(1));
  const Rat eps1 = std::min(Rat(e / 2), Rat(s * e / (2 * (x + 1)))) / 2;
  const Rat eps2 = (s * e / 2 - eps1 * (x + 1)) / 2;
  return Radii{eps1, eps2};
}

struct InverseRadius {
  Rat lambda0, lambda1, lambda2;
  std::optional<Rat> delta;  // local modulus for lambda2; none when f is flat near x
  Real slope;                // Lipschitz bound on [x - 1, x + 1]
};

/// lambda0 with |s f(x) - t f(y)| < eps whenever |x - y| < lambda0 and
/// |s - t| < lambda0:
///   lambda1 |f(x)| < eps/2,  (s + lambda1) lambda2 < eps/2,
///   |f(x) - f(y)| < lambda2 for |x - y| < delta,
///   lambda0 = 1/2 min(lambda1, lambda2, delta).
inline InverseRadius inverse_continuity_radius(const Rat& x, const Rat& s, const FnExpr& f, const Rat& eps) {
  if (x < 0) throw DomainError("inverse_continuity_radius: x must be nonnegative");
  if (s <= 0 || eps <= 0) throw DomainError("inverse_continuity_radius: s and eps must be positive");
  InverseRadius r;
  const Rat fx = rat_upper_bound(abs(eval(f, Real(x))));
  r.lambda1 = eps / (4 * (fx + 1));
  r.lambda2 = eps / (4 * (s + r.lambda1));
  r.slope = max_slope_on(f, std::max(Rat(0), Rat(x - 1)), x + 1);
  Rat bound = std::min(r.lambda1, r.lambda2);
  if (r.slope.sign() > 0) {
    r.delta = std::min(Rat(1), Rat(r.lambda2 / rat_upper_bound(r.slope)));
    bound = std::min(bound, *r.delta);
  }
  r.lambda0 = bound / 2;
  return r;
}

// Convergence to zero -----------------------------------------------------------

struct Settling {
  bool settled = false;
  std::size_t from = 0;  // 1-based index after which c_k eta_a(x_k) <= eps holds
};

/// For each sequence, the first index from which c_k eta_a(x_k) <= eps holds
/// through the end of the list.
inline std::vector<Settling> converges_to_zero(const std::vector<std::pair<Rat, Rat>>& points,
                                               const std::vector<Seq>& tests, const Rat& eps) {
  if (eps <= 0) throw DomainError("converges_to_zero: eps must be positive");
  for (const auto& [x, c] : points) {
    if (x < 0) throw DomainError("converges_to_zero: x must be nonnegative");
    if (c <= 0) throw DomainError("converges_to_zero: c must be positive");
  }
  std::vector<Settling> out;
  for (const Seq& a : tests) {
    const EtaFunction e(a);
    std::size_t from = points.size() + 1;
    while (from > 1) {
      const auto& [x, c] = points[from - 2];
      if (!(Real(c) * e.eval(x) <= Real(eps))) break;
      --from;
    }
    Settling s;
    s.settled = from <= points.size() || points.empty();
    s.from = points.empty() ? 0 : from;
    out.push_back(s);
  }
  return out;
}

/// Rows of "x,c"; a leading non-numeric header row and blank lines are skipped.
inline std::vector<std::pair<Rat, Rat>> parse_points_csv(std::string_view text) {
  std::vector<std::pair<Rat, Rat>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("points csv row " + std::to_string(row) + ": expected x,c");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string xs = trim(line.substr(0, comma)), cs = trim(line.substr(comma + 1));
    try {
      out.emplace_back(parse_rat(xs), parse_rat(cs));
    } catch (const ParseError&) {
      if (out.empty() && row == 1) continue;  // header
      throw ParseError("points csv row " + std::to_string(row) + ": not a rational pair: " + line);
    }
  }
  return out;
}

}  // namespace sohom
