#pragma once

// JSON encoding of expressions and sequences.
//
//   {"atom":"const","value":"p/q"}
//   {"atom":"tau"}
//   {"atom":"tau_pow","alpha":"p/q"}
//   {"atom":"eta","seq":{...}}                 optional "depth": n
//   {"atom":"pl","points":[["0","1"],["4","5"]],"final_slope":"1/2"}
//   {"op":"add"|"join"|"meet","args":[f,g]}
//   {"op":"abs","args":[f]}
//   {"op":"scale","args":[f],"lambda":"p/q"}
//
//   {"kind":"affine","start":2,"step":2}
//   {"kind":"geometric","start":1,"ratio":2}
//   {"kind":"explicit","values":[2,4,7]}
//
// Rationals are "p/q" strings.  Sequence terms are JSON integers, or decimal
// strings once they leave the int64 range.  serialize() emits the canonical
// compact form and parse(serialize(f)) reproduces f.

#include "sohom/fnexpr.hpp"
#include "sohom/real.hpp"
#include "sohom/seq.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace sohom {

using Json = nlohmann::ordered_json;

// Scalars -------------------------------------------------------------------

inline Json rat_to_json(const Rat& q) { return to_string(q); }

inline Rat rat_from_json(const Json& j, std::string_view what) {
  if (j.is_string()) return parse_rat(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  throw ParseError(std::string(what) + ": expected a rational string \"p/q\"");
}

inline Json int_to_json(const Int& z) {
  if (z >= Int(INT64_MIN) && z <= Int(INT64_MAX)) return z.convert_to<std::int64_t>();
  return z.str();
}

inline Int int_from_json(const Json& j, std::string_view what) {
  if (j.is_number_unsigned()) return Int(j.get<std::uint64_t>());
  if (j.is_number_integer()) return Int(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (!detail::all_digits(s)) throw ParseError(std::string(what) + ": not a natural number: " + s);
    return Int(s);
  }
  throw ParseError(std::string(what) + ": expected an integer");
}

namespace detail {

inline const Json& require(const Json& j, const char* key, std::string_view ctx) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(std::string(ctx) + ": missing field \"" + key + "\"");
  return j.at(key);
}

inline std::string require_string(const Json& j, const char* key, std::string_view ctx) {
  const Json& v = require(j, key, ctx);
  if (!v.is_string()) throw ParseError(std::string(ctx) + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// Sequences -----------------------------------------------------------------

/// Rule-backed sequences have no closed form; they are written as the
/// explicit list of their first `rule_prefix` terms.
inline Json seq_to_json(const Seq& s, std::size_t rule_prefix = 20) {
  Json j;
  switch (s.kind()) {
    case SeqKind::Affine:
      j["kind"] = "affine";
      j["start"] = int_to_json(s.start());
      j["step"] = int_to_json(s.step());
      break;
    case SeqKind::Geometric:
      j["kind"] = "geometric";
      j["start"] = int_to_json(s.start());
      j["ratio"] = int_to_json(s.ratio());
      break;
    case SeqKind::Explicit:
    case SeqKind::Rule: {
      j["kind"] = "explicit";
      Json values = Json::array();
      const auto terms = s.kind() == SeqKind::Explicit ? s.values() : s.prefix(rule_prefix);
      for (const Int& v : terms) values.push_back(int_to_json(v));
      j["values"] = std::move(values);
      break;
    }
  }
  return j;
}

inline Seq seq_from_json(const Json& j) {
  const std::string kind = detail::require_string(j, "kind", "sequence");
  try {
    if (kind == "affine")
      return Seq::affine(int_from_json(detail::require(j, "start", "affine sequence"), "start"),
                         int_from_json(detail::require(j, "step", "affine sequence"), "step"));
    if (kind == "geometric")
      return Seq::geometric(int_from_json(detail::require(j, "start", "geometric sequence"), "start"),
                            int_from_json(detail::require(j, "ratio", "geometric sequence"), "ratio"));
    if (kind == "explicit") {
      const Json& arr = detail::require(j, "values", "explicit sequence");
      if (!arr.is_array()) throw ParseError("explicit sequence: \"values\" must be an array");
      std::vector<Int> values;
      for (const Json& v : arr) values.push_back(int_from_json(v, "explicit sequence term"));
      return Seq::explicit_list(std::move(values));
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid sequence: ") + e.what());
  }
  throw ParseError("unknown sequence kind \"" + kind + "\"");
}

// Expressions ---------------------------------------------------------------

inline Json to_json(const FnExpr& f) {
  return std::visit(
      overloaded{
          [](const atom::Const& c) { return Json{{"atom", "const"}, {"value", rat_to_json(c.value)}}; },
          [](const atom::Tau&) { return Json{{"atom", "tau"}}; },
          [](const atom::TauPow& t) { return Json{{"atom", "tau_pow"}, {"alpha", rat_to_json(t.alpha)}}; },
          [](const atom::Eta& e) {
            Json j{{"atom", "eta"}, {"seq", seq_to_json(e.fn->seq())}};
            if (e.fn->depth()) j["depth"] = *e.fn->depth();
            return j;
          },
          [](const atom::PL& pl) {
            Json points = Json::array();
            for (std::size_t i = 0; i < pl.xs.size(); ++i)
              points.push_back(Json::array({rat_to_json(pl.xs[i]), rat_to_json(pl.ys[i])}));
            return Json{{"atom", "pl"}, {"points", std::move(points)}, {"final_slope", rat_to_json(pl.final_slope)}};
          },
          [](const op::Add& n) { return Json{{"op", "add"}, {"args", Json::array({to_json(n.lhs), to_json(n.rhs)})}}; },
          [](const op::Scale& n) {
            return Json{{"op", "scale"}, {"args", Json::array({to_json(n.arg)})}, {"lambda", rat_to_json(n.lambda)}};
          },
          [](const op::Join& n) { return Json{{"op", "join"}, {"args", Json::array({to_json(n.lhs), to_json(n.rhs)})}}; },
          [](const op::Meet& n) { return Json{{"op", "meet"}, {"args", Json::array({to_json(n.lhs), to_json(n.rhs)})}}; },
          [](const op::Abs& n) { return Json{{"op", "abs"}, {"args", Json::array({to_json(n.arg)})}}; },
      },
      f.node().v);
}

inline FnExpr from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("expression must be a JSON object");
  try {
    if (j.contains("atom")) {
      const std::string a = detail::require_string(j, "atom", "atom");
      if (a == "const") return constant(rat_from_json(detail::require(j, "value", "const"), "const value"));
      if (a == "tau") return tau();
      if (a == "tau_pow") return tau_pow(rat_from_json(detail::require(j, "alpha", "tau_pow"), "alpha"));
      if (a == "eta") {
        std::optional<std::size_t> depth;
        if (j.contains("depth")) {
          if (!j.at("depth").is_number_unsigned()) throw ParseError("eta: depth must be a natural number");
          depth = j.at("depth").get<std::size_t>();
        }
        return eta(seq_from_json(detail::require(j, "seq", "eta")), depth);
      }
      if (a == "pl") {
        const Json& pts = detail::require(j, "points", "pl");
        if (!pts.is_array()) throw ParseError("pl: \"points\" must be an array");
        std::vector<std::pair<Rat, Rat>> points;
        for (const Json& p : pts) {
          if (!p.is_array() || p.size() != 2) throw ParseError("pl: each point must be a pair [x, y]");
          points.emplace_back(rat_from_json(p[0], "pl x"), rat_from_json(p[1], "pl y"));
        }
        return piecewise_linear(std::move(points), rat_from_json(detail::require(j, "final_slope", "pl"), "final_slope"));
      }
      throw ParseError("unknown atom \"" + a + "\"");
    }
    const std::string o = detail::require_string(j, "op", "expression");
    const Json& args = detail::require(j, "args", o);
    if (!args.is_array()) throw ParseError(o + ": \"args\" must be an array");
    auto arity = [&](std::size_t n) {
      if (args.size() != n) throw ParseError(o + ": expected " + std::to_string(n) + " argument(s)");
    };
    if (o == "add") {
      arity(2);
      return add(from_json(args[0]), from_json(args[1]));
    }
    if (o == "join") {
      arity(2);
      return join(from_json(args[0]), from_json(args[1]));
    }
    if (o == "meet") {
      arity(2);
      return meet(from_json(args[0]), from_json(args[1]));
    }
    if (o == "abs") {
      arity(1);
      return abs(from_json(args[0]));
    }
    if (o == "scale") {
      arity(1);
      return scale(rat_from_json(detail::require(j, "lambda", "scale"), "lambda"), from_json(args[0]));
    }
    throw ParseError("unknown op \"" + o + "\"");
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid expression: ") + e.what());
  }
}

inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline FnExpr parse(std::string_view text) { return from_json(parse_json_text(text)); }
inline std::string serialize(const FnExpr& f) { return to_json(f).dump(); }

/// Inline JSON (starting with '{' or '[') or a path to a JSON file.
inline Json load_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return parse_json_text(arg);
  std::ifstream in(arg);
  if (!in) throw ParseError("cannot open '" + arg + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

}  // namespace sohom
