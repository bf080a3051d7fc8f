#pragma once

// The acceptance suite: ten criteria, each checked against an oracle that
// does not share code with the routine under test where one is practical.
// Every tolerance is pinned here.

#include "sohom/eta.hpp"
#include "sohom/hom.hpp"
#include "sohom/plot.hpp"
#include "sohom/somod.hpp"
#include "sohom/testing/generators.hpp"
#include "sohom/topology.hpp"

#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace sohom::acceptance {

inline constexpr double kAxiomTol = 1e-12;      // axioms with tau^alpha atoms
inline constexpr double kClassifyTol = 1e-9;    // oracle classification and roundtrip
inline constexpr std::size_t kGridPoints = 1000;

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

// eta^depth straight from the recursion: eta^0 = tau, and eta^n agrees with
// eta^{n-1} on [0, a_n], continuing from a_n with slope 1/n.
inline Rat eta_recursion(const std::vector<Int>& a, std::size_t depth, const Rat& x) {
  if (depth == 0) return x + 1;
  const Rat an(a[depth - 1]);
  if (x <= an) return eta_recursion(a, depth - 1, x);
  return eta_recursion(a, depth - 1, an) + (x - an) / Rat(static_cast<long>(depth));
}

// eta_a(x) summed piece by piece over the naturals 1, 2, 3, ...
inline Rat eta_naturals(const Rat& x) {
  if (x <= 2) return x + 1;
  Rat value = 3;
  long n = 2;
  for (; Rat(n + 1) <= x; ++n) value += Rat(1, n);
  return value + (x - n) / Rat(n);
}

inline std::string count(std::size_t bad, std::size_t total, const char* what) {
  return std::to_string(bad) + "/" + std::to_string(total) + " " + what;
}

}  // namespace detail

// 1. eval(Eta(a), x) equals the depth-50 recursion at 1000 points for 20 sequences.
inline Result eta_recursion_equivalence() {
  Result r{1, "eta recursion equivalence", false, ""};
  gen::Rng rng(101);
  std::size_t bad = 0, total = 0;
  for (int s = 0; s < 20; ++s) {
    const Seq a = s % 3 == 0 ? gen::random_explicit_seq(rng, 60) : gen::random_seq(rng);
    const std::vector<Int> terms = a.prefix(50);
    const FnExpr e = eta(a);
    const Rat top(terms.back());
    for (std::size_t i = 0; i < kGridPoints; ++i) {
      // Exact points spread over [0, a_50], denser near the start.
      const Rat u(static_cast<long>(i), static_cast<long>(kGridPoints - 1));
      const Rat x = i % 2 ? top * u : top * u * u * u * u;
      const Real got = eval(e, Real(x));
      ++total;
      if (!got.exact() || got.rat() != detail::eta_recursion(terms, 50, x)) ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = detail::count(bad, total, "points differ");
  return r;
}

// 2. |f| <= L eta_a on 1000 grid points for the 25-expression corpus.
inline Result envelope_bound() {
  Result r{2, "envelope bound", false, ""};
  std::size_t bad = 0, points = 0;
  const auto corpus = gen::certified_corpus();
  for (const FnExpr& f : corpus) {
    const Envelope env = build_envelope(f);
    const GridCheck g = check_envelope(env, kGridPoints);
    bad += g.violations;
    points += g.points;
    if (env.L < Real(1)) ++bad;
  }
  r.passed = bad == 0 && corpus.size() == 25;
  r.detail = detail::count(bad, points, "violations over 25 expressions");
  return r;
}

// 3. Dominator of the naturals: b_1 = 11, b_2 = 58, domination, growth, ratios.
inline Result dominator_growth() {
  Result r{3, "dominator growth", false, ""};
  const Seq a = Seq::affine(1, 1);
  const Dominator d = build_dominator(a);
  std::vector<std::string> fails;

  // Independent recursion with the piecewise sum for eta over the naturals.
  Int prev = 1;
  for (std::size_t n = 1; n <= 2; ++n) {
    const long m = static_cast<long>(n);
    const Rat target = Rat(m * m) * detail::eta_naturals(Rat(prev)) + Rat(prev) + Rat((m + 1) * (m + 1) * (m + 1));
    const Int b = std::max(Int(prev + 1), ceil_rat(target));
    if (b != d.result.at(n)) fails.push_back("b_" + std::to_string(n) + " mismatch");
    prev = b;
  }
  if (d.result.at(1) != 11 || d.result.at(2) != 58) fails.push_back("b_1, b_2 != 11, 58");

  const GridCheck g = check_domination(a, d.result, kGridPoints, grid_horizon(d.result, 6));
  if (g.violations) fails.push_back(std::to_string(g.violations) + " domination violations");

  const EtaFunction ea(a), eb(d.result);
  std::size_t growth_bad = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    const Rat lo(d.result.at(n)), hi(d.result.at(n + 1));
    for (int j = 0; j < 10; ++j) {
      const Rat x = lo + (hi - lo) * Rat(j, 9);
      if (eb.eval(x) < Real(Rat(static_cast<long>(n))) * ea.eval(x)) ++growth_bad;
    }
  }
  if (growth_bad) fails.push_back(std::to_string(growth_bad) + " growth violations");
  for (const auto& [n, ratio] : dominator_ratios(d, 12))
    if (ratio < Real(Rat(static_cast<long>(n)))) fails.push_back("ratio below n at n=" + std::to_string(n));

  r.passed = fails.empty();
  r.detail = fails.empty() ? "b_1=11 b_2=58, 1000 grid points, 120 growth samples, 12 ratios" : fails.front();
  return r;
}

// 4. Axioms (i)-(v) for 100 random Scaled homs and Zero over 50 expressions.
inline Result hom_axioms() {
  Result r{4, "homomorphism axioms", false, ""};
  const auto corpus = gen::axiom_corpus(50, 7);
  gen::Rng rng(104);
  std::vector<Hom> homs = {Hom::zero()};
  while (homs.size() < 101)
    homs.push_back(Hom::scaled(Real(gen::random_positive_rat(rng, 6)), Real(gen::random_rat(rng, 0, 40))));
  std::size_t bad = 0, checks = 0, inexact_pl = 0;
  for (std::size_t i = 0; i < homs.size(); ++i) {
    const AxiomReport rep = axiom_suite(homs[i], corpus, 50, i + 1, kAxiomTol);
    bad += rep.violations.size();
    checks += rep.checks;
    for (const FnExpr& f : corpus)
      if (is_piecewise_linear(f) && !apply(homs[i], f).exact()) ++inexact_pl;
  }
  r.passed = bad == 0 && inexact_pl == 0;
  r.detail = detail::count(bad, checks, "axiom checks failed") + ", " + std::to_string(inexact_pl) +
             " inexact PL values";
  return r;
}

// 5. classify(apply(h, .)) recovers (c, x); zero and f(2)+f(5) oracles.
inline Result classification_roundtrip() {
  Result r{5, "classification roundtrip", false, ""};
  gen::Rng rng(105);
  std::size_t bad = 0;
  for (int i = 0; i < 100; ++i) {
    const Hom h = Hom::scaled(Real(gen::random_positive_rat(rng, 6)), Real(gen::random_rat(rng, 0, 40)));
    const Classification c = classify(model_oracle(h), kClassifyTol);
    if (c.kind != Classification::Kind::Scaled ||
        mp::abs((c.hom->c() - h.c()).as_float()) > Float(kClassifyTol) ||
        mp::abs((c.hom->x() - h.x()).as_float()) > Float(kClassifyTol))
      ++bad;
  }
  const bool zero = classify([](const FnExpr&) { return Real(0); }, kClassifyTol).kind == Classification::Kind::Zero;
  const bool flagged = classify([](const FnExpr& f) { return eval(f, Real(2)) + eval(f, Real(5)); }, kClassifyTol)
                           .kind == Classification::Kind::Inconsistent;
  r.passed = bad == 0 && zero && flagged;
  r.detail = detail::count(bad, 100, "roundtrips off") + (zero ? ", zero oracle -> Zero" : ", zero oracle MISSED") +
             (flagged ? ", f(2)+f(5) -> Inconsistent" : ", f(2)+f(5) NOT flagged");
  return r;
}

// 6. Zero-neighborhood base: settling, base refinement, envelope refinement.
inline Result zero_neighborhood_base() {
  Result r{6, "zero-neighborhood base", false, ""};
  gen::Rng rng(106);
  std::size_t settle_bad = 0, refine_bad = 0, refine_inside = 0, env_bad = 0;
  for (int i = 0; i < 20; ++i) {
    const Seq a = gen::random_seq(rng);
    const Rat eps(gen::uniform_int(rng, 1, 99), 100);
    const EtaFunction e(a);
    std::vector<std::pair<Rat, Rat>> decaying, flat;
    for (int k = 1; k <= 200; ++k) {
      const Rat v = e.value(Rat(k));
      decaying.emplace_back(Rat(k), Rat(1) / (v * v));
      flat.emplace_back(Rat(k), Rat(1));
    }
    if (!converges_to_zero(decaying, {a}, eps)[0].settled) ++settle_bad;
    if (converges_to_zero(flat, {a}, eps)[0].settled) ++settle_bad;

    const Seq b = gen::random_seq(rng);
    const Seq c = merge_sequences(a, b);
    const EtaFunction ec(c);
    for (int k = 0; k < 200; ++k) {
      const Rat x = gen::random_rat(rng, 0, 2000);
      const Rat y = eps / ec.value(x) * gen::random_positive_rat(rng, 2, 16);
      const Point p = Point::at(Real(x), Real(y));
      if (!zero_base_member(p, eps, c)) continue;
      ++refine_inside;
      if (!zero_base_member(p, eps, a) || !zero_base_member(p, eps, b)) ++refine_bad;
    }
  }
  for (const FnExpr& f : gen::certified_corpus()) {
    const Envelope env = build_envelope(f);
    const EtaFunction ea(env.seq);
    const Rat xmax = grid_horizon(env.seq, 20);
    for (int k = 1; k <= 200; ++k) {
      const Rat x = xmax * Rat(k, 201);
      const Real bound = Real(env.L_bound) * ea.eval(x);
      const Rat eps(1, 3);
      const Rat c = rat_lower_bound(Real(eps) / bound) * Rat(gen::uniform_int(rng, 1, 999), 1000);
      if (!(Real(c) * bound < Real(eps))) continue;
      if (!(abs(apply(Hom::scaled(Real(c), Real(x)), f)) < Real(eps))) ++env_bad;
    }
  }
  r.passed = settle_bad == 0 && refine_bad == 0 && env_bad == 0 && refine_inside > 0;
  r.detail = std::to_string(settle_bad) + " settling errors, " + detail::count(refine_bad, refine_inside, "base") +
             ", " + std::to_string(env_bad) + " envelope counterexamples";
  return r;
}

// 7. Forward estimate over 10^5 pairs, inverse guarantee, eps2 > 0.
inline Result continuity_radii_criterion() {
  Result r{7, "continuity radii", false, ""};
  gen::Rng rng(107);
  auto open_between = [&](const Rat& lo, const Rat& hi) { return lo + (hi - lo) * Rat(gen::uniform_int(rng, 1, 997), 998); };
  std::size_t fwd_bad = 0, fwd_pairs = 0, eps2_bad = 0, inv_bad = 0, inv_pairs = 0;
  for (int i = 0; i < 100; ++i) {
    const Rat x = gen::random_rat(rng, 0, 50), s = gen::random_positive_rat(rng, 20);
    const Rat eps = i % 10 == 0 ? gen::random_positive_rat(rng, 200) : gen::random_positive_rat(rng, 1, 64);
    const Radii rad = continuity_radii(x, s, eps);
    if (!(rad.eps1 > 0 && rad.eps2 > 0)) ++eps2_bad;
    const Hom center = Hom::scaled(Real(s), Real(x));
    const BasicNbhd unit{center, {constant(Rat(1))}, rad.eps1}, lin{center, {tau()}, rad.eps2};
    while (fwd_pairs < static_cast<std::size_t>(i + 1) * 1000) {
      const Rat t = open_between(std::max(Rat(0), Rat(s - rad.eps1)), s + rad.eps1);
      const Rat ylo = std::max(Rat(0), Rat((s * (x + 1) - rad.eps2) / t - 1));
      const Rat yhi = (s * (x + 1) + rad.eps2) / t - 1;
      if (yhi <= ylo) continue;
      const Hom psi = Hom::scaled(Real(t), Real(open_between(ylo, yhi)));
      if (!in_nbhd(psi, unit) || !in_nbhd(psi, lin)) continue;
      ++fwd_pairs;
      if (!(taxicab(phi(psi), phi(center)) < Real(eps))) ++fwd_bad;
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const Radii rad = continuity_radii(gen::random_rat(rng, 0, 1000), gen::random_positive_rat(rng, 50),
                                       gen::random_positive_rat(rng, 200, 64));
    if (!(rad.eps1 > 0 && rad.eps2 > 0)) ++eps2_bad;
  }
  auto fs = gen::certified_corpus();
  fs.push_back(tau());
  for (const FnExpr& f : fs) {
    for (int inst = 0; inst < 4; ++inst) {
      const Rat x = gen::random_rat(rng, 0, 60), s = gen::random_positive_rat(rng, 10);
      const Rat eps = gen::random_positive_rat(rng, 2, 32);
      const InverseRadius ir = inverse_continuity_radius(x, s, f, eps);
      const Real sfx = Real(s) * eval(f, Real(x));
      for (int k = 0; k < 250; ++k) {
        const Rat y = open_between(std::max(Rat(0), Rat(x - ir.lambda0)), x + ir.lambda0);
        const Rat t = open_between(s - ir.lambda0, s + ir.lambda0);
        ++inv_pairs;
        if (!(abs(sfx - Real(t) * eval(f, Real(y))) < Real(eps))) ++inv_bad;
      }
    }
  }
  r.passed = fwd_bad == 0 && inv_bad == 0 && eps2_bad == 0 && fwd_pairs == 100'000;
  r.detail = detail::count(fwd_bad, fwd_pairs, "forward") + ", " + detail::count(inv_bad, inv_pairs, "inverse") +
             ", " + std::to_string(eps2_bad) + " nonpositive radii";
  return r;
}

// 8. No window beyond M(R, eps) reaches diameter eps; tau is NotSO.
inline Result modulus_soundness() {
  Result r{8, "modulus soundness", false, ""};
  const std::vector<Rat> windows = {Rat(1, 2), Rat(1), Rat(2), Rat(5), Rat(10)};
  const std::vector<Rat> tolerances = {Rat(1), Rat(1, 2), Rat(1, 10), Rat(1, 50), Rat(1, 100)};
  std::size_t bad = 0, samples = 0, uncertified = 0;
  for (const FnExpr& f : gen::certified_corpus()) {
    const SOVerdict v = modulus_of(f);
    if (!v.certified()) {
      ++uncertified;
      continue;
    }
    for (const Rat& R : windows)
      for (const Rat& eps : tolerances) {
        const Rat M = (*v.modulus)(R, eps);
        for (int i = 0; i < 200; ++i) {
          const Rat x = M + Rat(1, 1000) + R * Rat(i * i, 13);
          ++samples;
          if (!(window_diam_upper(f, Real(x), Real(R)) < Real(eps))) ++bad;
        }
      }
  }
  const bool tau_refuted = modulus_of(tau()).kind == SOVerdict::Kind::NotSO;
  r.passed = bad == 0 && uncertified == 0 && tau_refuted;
  r.detail = detail::count(bad, samples, "windows too wide") + ", " + std::to_string(uncertified) + " uncertified" +
             (tau_refuted ? ", tau NotSO" : ", tau NOT refuted");
  return r;
}

// 9. uc_check(f, 1/100, 1000) on the certified corpus.
inline Result uniform_continuity() {
  Result r{9, "uniform continuity", false, ""};
  std::size_t bad = 0, n = 0;
  for (const FnExpr& f : gen::certified_corpus()) {
    ++n;
    const UCResult u = uc_check(f, Rat(1, 100), Rat(1000));
    if (!u.ok || u.delta.sign() <= 0) ++bad;
  }
  r.passed = bad == 0;
  r.detail = detail::count(bad, n, "expressions failed");
  return r;
}

// 10. eta^0 >= eta^1 >= eta^2 >= 1 over [0, 8] for a = (2, 4); eta^2 kinks at 4.
inline Result eta_stage_plot() {
  Result r{10, "eta stage plot", false, ""};
  const Seq a = Seq::explicit_list({Int(2), Int(4)});
  const PlotTable t = plot_table({eta(a, 0), eta(a, 1), eta(a, 2)}, Rat(0), Rat(8), Rat(1, 4));
  std::size_t bad = 0;
  for (std::size_t i = 0; i < t.xs.size(); ++i) {
    const Real &e0 = t.columns[0][i], &e1 = t.columns[1][i], &e2 = t.columns[2][i];
    if (!(e0 >= e1 && e1 >= e2 && e2 >= Real(1))) ++bad;
  }
  // Slope of eta^2 over each quarter step: 1 up to x = 4, then 1/2.
  std::size_t slope_bad = 0;
  for (std::size_t i = 0; i + 1 < t.xs.size(); ++i) {
    const Real slope = (t.columns[2][i + 1] - t.columns[2][i]) / Real(Rat(1, 4));
    if (slope != Real(t.xs[i] < 4 ? Rat(1) : Rat(1, 2))) ++slope_bad;
  }
  r.passed = t.xs.size() == 33 && bad == 0 && slope_bad == 0;
  r.detail = std::to_string(t.xs.size()) + " rows, " + std::to_string(bad) + " order violations, " +
             std::to_string(slope_bad) + " slope mismatches";
  return r;
}

inline std::vector<std::function<Result()>> criteria() {
  return {eta_recursion_equivalence, envelope_bound,  dominator_growth,  hom_axioms,         classification_roundtrip,
          zero_neighborhood_base,    continuity_radii_criterion, modulus_soundness, uniform_continuity, eta_stage_plot};
}

/// Runs every criterion (exceptions count as failures) and prints one line each.
inline std::vector<Result> run_all(std::ostream& out) {
  std::vector<Result> results;
  int id = 0;
  for (const auto& c : criteria()) {
    ++id;
    Result res;
    try {
      res = c();
    } catch (const std::exception& e) {
      res = Result{id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what()};
    }
    out << (res.passed ? "PASS" : "FAIL") << " [" << res.id << "] " << res.name << ": " << res.detail << std::endl;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace sohom::acceptance
