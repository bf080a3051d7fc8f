#pragma once

// Expression trees for real-valued functions on the half-line [0, inf).
//
// Atoms: constants, tau(x) = x + 1, tau^alpha (0 < alpha < 1), eta_a, and
// finite piecewise-linear functions.  Nodes: sum, rational scalar multiple,
// pointwise join (max), meet (min), absolute value.  Trees are immutable and
// share structure freely.

#include "sohom/eta_function.hpp"
#include "sohom/real.hpp"
#include "sohom/seq.hpp"

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace sohom {

struct Node;

class FnExpr {
 public:
  explicit FnExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  const Node* get() const { return node_.get(); }

 private:
  std::shared_ptr<const Node> node_;
};

namespace atom {

struct Const {
  Rat value;
};

struct Tau {};

struct TauPow {
  Rat alpha;
};

struct Eta {
  std::shared_ptr<const EtaFunction> fn;
};

/// Linear interpolation through (xs[i], ys[i]) with xs[0] = 0, continued past
/// the last breakpoint with `final_slope`.
struct PL {
  std::vector<Rat> xs;
  std::vector<Rat> ys;
  Rat final_slope;
};

}  // namespace atom

namespace op {

struct Add {
  FnExpr lhs, rhs;
};

struct Scale {
  Rat lambda;
  FnExpr arg;
};

struct Join {
  FnExpr lhs, rhs;
};

struct Meet {
  FnExpr lhs, rhs;
};

struct Abs {
  FnExpr arg;
};

}  // namespace op

struct Node {
  std::variant<atom::Const, atom::Tau, atom::TauPow, atom::Eta, atom::PL, op::Add, op::Scale, op::Join,
               op::Meet, op::Abs>
      v;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

namespace detail {
template <class T>
FnExpr make(T&& t) {
  return FnExpr(std::make_shared<const Node>(Node{std::forward<T>(t)}));
}
}  // namespace detail

// Builders ------------------------------------------------------------------

inline FnExpr constant(Rat value) { return detail::make(atom::Const{std::move(value)}); }
inline FnExpr tau() { return detail::make(atom::Tau{}); }

inline FnExpr tau_pow(Rat alpha) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("tau_pow exponent must lie strictly inside (0,1)");
  return detail::make(atom::TauPow{std::move(alpha)});
}

inline FnExpr sqrt_tau() { return tau_pow(Rat(1, 2)); }

inline FnExpr eta(Seq seq, std::optional<std::size_t> depth = std::nullopt) {
  return detail::make(atom::Eta{std::make_shared<const EtaFunction>(std::move(seq), depth)});
}

inline FnExpr piecewise_linear(std::vector<std::pair<Rat, Rat>> points, Rat final_slope) {
  if (points.empty()) throw DomainError("piecewise-linear atom needs at least one point");
  if (points.front().first != 0) throw DomainError("piecewise-linear breakpoints must start at x = 0");
  atom::PL pl;
  pl.final_slope = std::move(final_slope);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i - 1].first < points[i].first))
      throw DomainError("piecewise-linear breakpoints must be strictly increasing");
    pl.xs.push_back(points[i].first);
    pl.ys.push_back(points[i].second);
  }
  return detail::make(std::move(pl));
}

inline FnExpr add(FnExpr f, FnExpr g) { return detail::make(op::Add{std::move(f), std::move(g)}); }
inline FnExpr scale(Rat lambda, FnExpr f) { return detail::make(op::Scale{std::move(lambda), std::move(f)}); }
inline FnExpr join(FnExpr f, FnExpr g) { return detail::make(op::Join{std::move(f), std::move(g)}); }
inline FnExpr meet(FnExpr f, FnExpr g) { return detail::make(op::Meet{std::move(f), std::move(g)}); }
inline FnExpr abs(FnExpr f) { return detail::make(op::Abs{std::move(f)}); }
inline FnExpr neg(FnExpr f) { return scale(Rat(-1), std::move(f)); }

// Structural queries --------------------------------------------------------

/// True when no tau^alpha atom occurs, i.e. the function is piecewise linear
/// with rational data and can be handled exactly.
inline bool is_piecewise_linear(const FnExpr& f) {
  return std::visit(overloaded{
                        [](const atom::TauPow&) { return false; },
                        [](const op::Add& n) { return is_piecewise_linear(n.lhs) && is_piecewise_linear(n.rhs); },
                        [](const op::Join& n) { return is_piecewise_linear(n.lhs) && is_piecewise_linear(n.rhs); },
                        [](const op::Meet& n) { return is_piecewise_linear(n.lhs) && is_piecewise_linear(n.rhs); },
                        [](const op::Scale& n) { return is_piecewise_linear(n.arg); },
                        [](const op::Abs& n) { return is_piecewise_linear(n.arg); },
                        [](const auto&) { return true; },
                    },
                    f.node().v);
}

inline std::size_t node_count(const FnExpr& f) {
  return std::visit(overloaded{
                        [](const op::Add& n) { return 1 + node_count(n.lhs) + node_count(n.rhs); },
                        [](const op::Join& n) { return 1 + node_count(n.lhs) + node_count(n.rhs); },
                        [](const op::Meet& n) { return 1 + node_count(n.lhs) + node_count(n.rhs); },
                        [](const op::Scale& n) { return 1 + node_count(n.arg); },
                        [](const op::Abs& n) { return 1 + node_count(n.arg); },
                        [](const auto&) -> std::size_t { return 1; },
                    },
                    f.node().v);
}

}  // namespace sohom
