// sohom: command-line front end.
// Exit codes: 0 success, 1 verification failure, 2 malformed input, 3 domain error.

#include "sohom/acceptance.hpp"
#include "sohom/eta.hpp"
#include "sohom/hom.hpp"
#include "sohom/json_io.hpp"
#include "sohom/plot.hpp"
#include "sohom/somod.hpp"
#include "sohom/topology.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace sohom;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kBadInput = 2, kDomain = 3 };

bool g_decimal = false;

std::string fmt(const Real& r) { return r.str(g_decimal); }
std::string fmt(const Rat& q) { return Real(q).str(g_decimal); }

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

struct GridRange {
  Rat lo, hi, step;
};

// "lo:hi:step" or "lo..hi:step".
GridRange parse_range(const std::string& text) {
  std::string s = text;
  if (auto dots = s.find(".."); dots != std::string::npos) s.replace(dots, 2, ":");
  const auto a = s.find(':');
  const auto b = a == std::string::npos ? std::string::npos : s.find(':', a + 1);
  if (b == std::string::npos) throw ParseError("range must look like lo:hi:step, got '" + text + "'");
  GridRange r{parse_rat(s.substr(0, a)), parse_rat(s.substr(a + 1, b - a - 1)), parse_rat(s.substr(b + 1))};
  if (r.step <= 0) throw ParseError("range step must be positive");
  return r;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FnExpr load_expr(const std::string& arg) { return from_json(load_json_arg(arg)); }

Rat opt_rat(const std::string& text) { return parse_rat(text); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact arithmetic for slowly oscillating functions on [0, inf)"};
  app.require_subcommand(1);
  app.add_flag("--decimal", g_decimal, "Print decimals instead of exact p/q");

  std::string expr_arg, seq_arg, x_arg, at_arg, table_arg, hom_arg, spec_arg, cand_arg, points_arg, seqs_arg;
  std::string eps_arg, s_arg, R_arg, H_arg, range_arg, out_arg;
  std::size_t depth = 0, count = 8;
  bool has_depth = false;

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an expression at x");
  eval_cmd->add_option("-f,--expr", expr_arg, "Expression JSON (inline or file)")->required();
  eval_cmd->add_option("-x", x_arg, "Point x >= 0")->required();

  auto* so_cmd = app.add_subcommand("check-so", "Certify or refute slow oscillation");
  so_cmd->add_option("-f,--expr", expr_arg, "Expression JSON")->required();
  so_cmd->add_option("-R", R_arg, "Window length for an empirical scan");
  so_cmd->add_option("-e,--eps", eps_arg, "Tolerance for an empirical scan");
  so_cmd->add_option("-H,--horizon", H_arg, "Scan horizon (default 100)");

  auto* eta_cmd = app.add_subcommand("eta", "Evaluate eta_a");
  eta_cmd->add_option("--seq", seq_arg, "Sequence JSON")->required();
  eta_cmd->add_option("--depth", depth, "Finite stage eta^d")->each([&](const std::string&) { has_depth = true; });
  auto* at_opt = eta_cmd->add_option("--at", at_arg, "Point x");
  auto* table_opt = eta_cmd->add_option("--table", table_arg, "Range lo..hi:step");
  at_opt->excludes(table_opt);

  auto* env_cmd = app.add_subcommand("envelope", "Envelope certificate |f| <= L eta_a");
  env_cmd->add_option("-f,--expr", expr_arg, "Expression JSON")->required();

  auto* dom_cmd = app.add_subcommand("dominate", "Dominator certificate for a sequence");
  dom_cmd->add_option("--seq", seq_arg, "Sequence JSON")->required();
  dom_cmd->add_option("--count", count, "Ratio table rows (default 8)");

  auto* cls_cmd = app.add_subcommand("classify", "Classify a model hom through its oracle");
  cls_cmd->add_option("--hom", hom_arg, "Hom JSON")->required();

  auto* nbhd_cmd = app.add_subcommand("nbhd", "Neighborhood membership");
  nbhd_cmd->add_option("--spec", spec_arg, "Neighborhood JSON")->required();
  nbhd_cmd->add_option("--candidate", cand_arg, "Hom JSON")->required();

  auto* conv_cmd = app.add_subcommand("converge", "Does a point list settle into the zero base");
  conv_cmd->add_option("--points", points_arg, "CSV file of x,c rows")->required();
  conv_cmd->add_option("--seqs", seqs_arg, "JSON array of sequences")->required();
  conv_cmd->add_option("-e,--eps", eps_arg, "Base radius")->required();

  auto* radii_cmd = app.add_subcommand("radii", "Continuity radii at (x, s)");
  radii_cmd->add_option("-x", x_arg, "x >= 0")->required();
  radii_cmd->add_option("-s", s_arg, "s > 0")->required();
  radii_cmd->add_option("-e,--eps", eps_arg, "eps > 0")->required();
  radii_cmd->add_option("-f,--expr", expr_arg, "Also print the inverse radius for this function");

  auto* plot_cmd = app.add_subcommand("plot", "Sample expressions to CSV");
  plot_cmd->add_option("--exprs", expr_arg, "JSON array of expressions")->required();
  plot_cmd->add_option("--range", range_arg, "lo:hi:step")->required();
  plot_cmd->add_option("--out", out_arg, "Output file (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*eval_cmd) {
      std::cout << fmt(eval(load_expr(expr_arg), Real(parse_rat(x_arg)))) << '\n';
      return kOk;
    }

    if (*so_cmd) {
      const FnExpr f = load_expr(expr_arg);
      const SOVerdict v = modulus_of(f);
      Json j = verdict_to_json(v);
      if (!R_arg.empty() || !eps_arg.empty()) {
        if (R_arg.empty() || eps_arg.empty()) throw ParseError("check-so: -R and -e go together");
        const Rat R = opt_rat(R_arg), eps = opt_rat(eps_arg);
        const Rat H = H_arg.empty() ? Rat(100) : opt_rat(H_arg);
        j["scan"] = report_to_json(check_so_empirical(f, R, eps, H));
        if (v.certified()) j["modulus_at"] = rat_to_json((*v.modulus)(R, eps));
      }
      print_json(j);
      return v.certified() ? kOk : kVerifyFailed;
    }

    if (*eta_cmd) {
      const Seq a = seq_from_json(load_json_arg(seq_arg));
      const EtaFunction e = has_depth ? EtaFunction(a, depth) : EtaFunction(a);
      if (!at_arg.empty()) {
        const Rat x = parse_rat(at_arg);
        if (x < 0) throw DomainError("eta: x must be nonnegative");
        std::cout << fmt(e.eval(x)) << '\n';
        return kOk;
      }
      if (table_arg.empty()) throw ParseError("eta: give --at or --table");
      const GridRange r = parse_range(table_arg);
      if (r.lo < 0) throw DomainError("eta: range must start at x >= 0");
      std::cout << "x,eta\n";
      for (Rat x = r.lo; x <= r.hi; x += r.step) std::cout << fmt(x) << ',' << fmt(e.eval(x)) << '\n';
      return kOk;
    }

    if (*env_cmd) {
      const Envelope env = build_envelope(load_expr(expr_arg));
      const GridCheck g = check_envelope(env);
      print_json(envelope_to_json(env, g));
      return g.violations == 0 ? kOk : kVerifyFailed;
    }

    if (*dom_cmd) {
      const Seq a = seq_from_json(load_json_arg(seq_arg));
      const Dominator d = build_dominator(a);
      const GridCheck g = check_domination(a, d.result, 1000, grid_horizon(d.result, 6));
      print_json(dominator_to_json(d, count, g));
      return g.violations == 0 ? kOk : kVerifyFailed;
    }

    if (*cls_cmd) {
      const Hom h = hom_from_json(load_json_arg(hom_arg));
      const Classification c = classify(model_oracle(h));
      print_json(classification_to_json(c));
      if (!c.ok()) return kVerifyFailed;
      const bool same = h.is_zero() ? c.hom->is_zero()
                                    : !c.hom->is_zero() && close(c.hom->c(), h.c(), 1e-9) && close(c.hom->x(), h.x(), 1e-9);
      return same ? kOk : kVerifyFailed;
    }

    if (*nbhd_cmd) {
      const NbhdSpec spec = nbhd_from_json(load_json_arg(spec_arg));
      const Hom h = hom_from_json(load_json_arg(cand_arg));
      std::cout << (in_nbhd(h, spec) ? "true" : "false") << '\n';
      return kOk;
    }

    if (*conv_cmd) {
      const auto points = parse_points_csv(read_text(points_arg));
      const Json seqs = load_json_arg(seqs_arg);
      if (!seqs.is_array()) throw ParseError("converge: --seqs must be a JSON array");
      std::vector<Seq> tests;
      for (const Json& s : seqs) tests.push_back(seq_from_json(s));
      const auto verdicts = converges_to_zero(points, tests, opt_rat(eps_arg));
      if (tests.empty()) std::cout << "settled (no tests)\n";
      for (std::size_t i = 0; i < verdicts.size(); ++i) {
        std::cout << "seq" << (i + 1) << ": ";
        if (verdicts[i].settled)
          std::cout << "settled from k=" << verdicts[i].from << '\n';
        else
          std::cout << "not settled\n";
      }
      return kOk;
    }

    if (*radii_cmd) {
      const Rat x = parse_rat(x_arg), s = parse_rat(s_arg), eps = parse_rat(eps_arg);
      const Radii r = continuity_radii(x, s, eps);
      std::cout << "eps1=" << fmt(r.eps1) << " eps2=" << fmt(r.eps2) << '\n';
      if (!expr_arg.empty()) {
        const InverseRadius ir = inverse_continuity_radius(x, s, load_expr(expr_arg), eps);
        std::cout << "lambda0=" << fmt(ir.lambda0) << " lambda1=" << fmt(ir.lambda1) << " lambda2=" << fmt(ir.lambda2)
                  << '\n';
      }
      return kOk;
    }

    if (*plot_cmd) {
      const Json list = load_json_arg(expr_arg);
      if (!list.is_array()) throw ParseError("plot: --exprs must be a JSON array");
      std::vector<FnExpr> fs;
      for (const Json& j : list) fs.push_back(from_json(j));
      const GridRange r = parse_range(range_arg);
      const PlotTable t = plot_table(fs, r.lo, r.hi, r.step);
      if (out_arg.empty()) {
        write_csv(std::cout, t, g_decimal);
      } else {
        std::ofstream out(out_arg, std::ios::binary);
        if (!out) throw ParseError("cannot write '" + out_arg + "'");
        write_csv(out, t, g_decimal);
      }
      return kOk;
    }

    if (*verify_cmd) {
      const auto results = acceptance::run_all(std::cout);
      for (const auto& r : results)
        if (!r.passed) return kVerifyFailed;
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return kBadInput;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const SeqExhausted& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  }
  return kBadInput;
}
