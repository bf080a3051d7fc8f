#include "sohom/somod.hpp"
#include "sohom/testing/generators.hpp"

#include <gtest/gtest.h>

using namespace sohom;

namespace {

const std::vector<Rat> kWindows = {Rat(1, 2), Rat(1), Rat(2), Rat(5), Rat(10)};
const std::vector<Rat> kTolerances = {Rat(1), Rat(1, 2), Rat(1, 10), Rat(1, 50), Rat(1, 100)};

SOModulus certify(const FnExpr& f) {
  const SOVerdict v = modulus_of(f);
  if (!v.certified()) throw std::runtime_error("not certified: " + serialize(f) + " " + v.reason);
  return *v.modulus;
}

}  // namespace

TEST(Modulus, WorkedExamples) {
  const SOVerdict t = modulus_of(tau());
  EXPECT_EQ(t.kind, SOVerdict::Kind::NotSO);
  ASSERT_TRUE(t.witness);
  EXPECT_EQ(t.witness->slope, Rat(1));

  // (alpha R / eps)^(1/(1-alpha)) = 16^2.
  EXPECT_EQ(certify(sqrt_tau())(Rat(2), Rat(1, 16)), Rat(256));
  // Slope 1/n < 1/3 needs n >= 4, and a_4 = 8.
  EXPECT_EQ(certify(eta(Seq::affine(2, 2)))(Rat(1), Rat(1, 3)), Rat(8));

  EXPECT_EQ(certify(constant(Rat(7)))(Rat(100), Rat(1, 1000)), Rat(0));
}

TEST(Modulus, ScannerAgreesWithClosedForms) {
  const auto sq = check_so_empirical(sqrt_tau(), Rat(2), Rat(1, 16), Rat(400));
  EXPECT_FALSE(sq.inconclusive);
  EXPECT_LE(sq.horizon_found(), Rat(256));
  EXPECT_GT(sq.horizon_found(), Rat(200));

  const auto e = check_so_empirical(eta(Seq::affine(2, 2)), Rat(1), Rat(1, 3), Rat(100));
  EXPECT_FALSE(e.inconclusive);
  EXPECT_LE(e.horizon_found(), Rat(8));
  // [7, 8] lies on the slope-1/3 segment, [29/4, 33/4] does not.
  EXPECT_EQ(e.horizon_found(), Rat(7));
}

TEST(CheckSO, WorkedExamples) {
  auto r = check_so_empirical(constant(Rat(7)), Rat(5), Rat(1, 1'000'000), Rat(100));
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.horizon_found(), Rat(0));
  EXPECT_EQ(r.step, Rat(1));

  r = check_so_empirical(tau(), Rat(1), Rat(1, 2), Rat(100));
  EXPECT_TRUE(r.inconclusive);
  EXPECT_EQ(r.violations.size(), r.windows);
  EXPECT_EQ(r.step, Rat(1, 4));
  EXPECT_EQ(*r.last_violation, Rat(100));

  EXPECT_THROW(check_so_empirical(tau(), Rat(0), Rat(1), Rat(1)), DomainError);
}

TEST(UniformContinuity, WorkedExamples) {
  auto r = uc_check(constant(Rat(3)), Rat(1, 10), Rat(1'000'000));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.delta, Real(1));

  r = uc_check(eta(Seq::affine(2, 2)), Rat(1, 2), Rat(1000));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.delta.rat(), Rat(1, 2));
  EXPECT_TRUE(r.ok);

  // Derivative bound 1/2 at 0 gives delta = 1/5; the smaller 1/25 is also accepted.
  r = uc_check(sqrt_tau(), Rat(1, 10), Rat(100));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.delta, Real(Rat(1, 5)));
  EXPECT_TRUE(uc_accepts(sqrt_tau(), Rat(1, 10), Rat(100), Rat(1, 25)).ok);

  EXPECT_THROW(uc_check(tau(), Rat(1), Rat(10)), DomainError);
}

TEST(UniformContinuity, CorpusDeltasHold) {
  for (const FnExpr& f : gen::certified_corpus()) {
    const auto r = uc_check(f, Rat(1, 3), Rat(200), 400);
    EXPECT_TRUE(r.ok) << serialize(f) << " delta=" << r.delta << " worst=" << r.worst;
    EXPECT_GT(r.delta.sign(), 0);
  }
}

TEST(Modulus, CorpusIsCertified) {
  for (const FnExpr& f : gen::certified_corpus()) EXPECT_TRUE(modulus_of(f).certified()) << serialize(f);
}

TEST(Properties, ModulusSoundness) {
  for (const FnExpr& f : gen::certified_corpus()) {
    const SOModulus m = certify(f);
    for (const Rat& R : kWindows) {
      for (const Rat& eps : kTolerances) {
        const Rat M = m(R, eps);
        for (int i = 0; i < 200; ++i) {
          // Points just past M, then spreading out over a few thousand windows.
          const Rat x = M + Rat(1, 1000) + R * Rat(i * i, 13);
          const Real d = window_diam_upper(f, Real(x), Real(R));
          ASSERT_LT(d, Real(eps)) << serialize(f) << " R=" << to_string(R) << " eps=" << to_string(eps)
                                  << " M=" << to_string(M) << " x=" << to_string(x);
        }
      }
    }
  }
}

TEST(Properties, ModulusIsMonotone) {
  for (const FnExpr& f : gen::certified_corpus()) {
    const SOModulus m = certify(f);
    for (std::size_t i = 0; i < kWindows.size(); ++i) {
      for (std::size_t j = 0; j < kTolerances.size(); ++j) {
        const Rat here = m(kWindows[i], kTolerances[j]);
        EXPECT_GE(here, 0);
        if (i + 1 < kWindows.size()) {
          EXPECT_LE(here, m(kWindows[i + 1], kTolerances[j])) << serialize(f);
        }
        if (j + 1 < kTolerances.size()) {
          EXPECT_LE(here, m(kWindows[i], kTolerances[j + 1])) << serialize(f);
        }
      }
    }
  }
}

TEST(Properties, NotSOSoundness) {
  std::vector<FnExpr> refuted = {tau(), piecewise_linear({{Rat(0), Rat(3)}, {Rat(2), Rat(0)}}, Rat(-1, 3)),
                                 eta(Seq::affine(2, 2), 3), add(tau(), scale(Rat(-5), sqrt_tau()))};
  gen::Rng rng(11);
  gen::ExprOptions opt;
  opt.max_depth = 3;
  while (refuted.size() < 40) {
    FnExpr f = gen::random_expr(rng, opt);
    if (modulus_of(f).kind == SOVerdict::Kind::NotSO) refuted.push_back(std::move(f));
  }
  for (const FnExpr& f : refuted) {
    const SOVerdict v = modulus_of(f);
    ASSERT_EQ(v.kind, SOVerdict::Kind::NotSO) << serialize(f);
    ASSERT_TRUE(v.witness);
    EXPECT_EQ(v.witness->eps, Rat(mp::abs(v.witness->slope) / 2));
    // Beyond every candidate horizon up to 10^6 the witness window still fails.
    for (int i = 0; i < 10; ++i) {
      const Rat x = Rat(1'000'000) + Rat(i * 99'991, 7);
      const Real d = window_diam(f, Real(x), Real(v.witness->R));
      EXPECT_GE(d, Real(v.witness->eps)) << serialize(f) << " x=" << to_string(x);
    }
  }
}

TEST(Properties, ClosureOfCertified) {
  gen::Rng rng(3);
  const auto corpus = gen::certified_corpus();
  auto pick = [&] { return corpus[static_cast<std::size_t>(gen::uniform_int(rng, 0, static_cast<long>(corpus.size()) - 1))]; };
  for (int i = 0; i < 200; ++i) {
    const FnExpr f = pick(), g = pick();
    const Rat lambda = gen::random_rat(rng, -4, 4);
    for (const FnExpr& h : {add(f, g), scale(lambda, f), join(f, g), meet(f, g), abs(f)}) {
      const SOVerdict v = modulus_of(h);
      EXPECT_TRUE(v.certified()) << serialize(h);
    }
  }
  // Random trees without tau or sloped tails are certified as well.
  gen::ExprOptions opt;
  opt.allow_tau = false;
  for (int i = 0; i < 200; ++i) {
    const FnExpr f = gen::random_expr(rng, opt);
    EXPECT_TRUE(modulus_of(f).certified()) << serialize(f);
  }
}

TEST(Modulus, UndecidedCasesCarryAReport) {
  // tau - tau is constant but its parts are not certified.
  const SOVerdict v = modulus_of(add(tau(), neg(tau())));
  EXPECT_EQ(v.kind, SOVerdict::Kind::Unknown);
  ASSERT_TRUE(v.report);
  EXPECT_TRUE(v.report->violations.empty());

  const SOVerdict finite = modulus_of(eta(Seq::explicit_list({Int(2), Int(4)})));
  EXPECT_EQ(finite.kind, SOVerdict::Kind::Unknown);

  const SOVerdict zero = modulus_of(scale(Rat(0), tau()));
  EXPECT_TRUE(zero.certified());
}

TEST(Modulus, CertificateJson) {
  const Json j = verdict_to_json(modulus_of(sqrt_tau()));
  EXPECT_EQ(j["verdict"], "certified");
  bool found = false;
  for (const auto& row : j["modulus_probe"])
    if (row[0] == "2" && row[1] == "1/16") {
      EXPECT_EQ(row[2], "256");
      found = true;
    }
  EXPECT_TRUE(found);
  const Json n = verdict_to_json(modulus_of(tau()));
  EXPECT_EQ(n["verdict"], "not_so");
  EXPECT_EQ(n["eps"], "1/2");
}
