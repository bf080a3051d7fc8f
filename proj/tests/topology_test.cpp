#include "sohom/eta.hpp"
#include "sohom/topology.hpp"
#include "sohom/testing/generators.hpp"

#include <gtest/gtest.h>

using namespace sohom;

namespace {

// k / (n + 1) for k uniform in 1..n: strictly inside (0, 1).
Rat open_unit(gen::Rng& rng, long n = 997) { return Rat(gen::uniform_int(rng, 1, n), n + 1); }

Rat open_between(gen::Rng& rng, const Rat& lo, const Rat& hi) { return lo + (hi - lo) * open_unit(rng); }

}  // namespace

TEST(Phi, WorkedExamples) {
  EXPECT_EQ(phi(Hom::scaled(Real(Rat(5, 2)), Real(3))), Point::at(Real(3), Real(Rat(5, 2))));
  EXPECT_TRUE(phi(Hom::zero()).is_origin());
  EXPECT_TRUE(phi_inv(Point::origin()).is_zero());
  EXPECT_THROW(Point::at(Real(1), Real(0)), DomainError);
}

TEST(Properties, PhiIsABijection) {
  gen::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Point p = Point::at(Real(gen::random_rat(rng, 0, 100)), Real(gen::random_positive_rat(rng, 10)));
    EXPECT_EQ(phi(phi_inv(p)), p);
    const Hom h = Hom::scaled(Real(gen::random_positive_rat(rng, 10)), Real(gen::random_rat(rng, 0, 100)));
    const Hom back = phi_inv(phi(h));
    EXPECT_EQ(back.c(), h.c());
    EXPECT_EQ(back.x(), h.x());
  }
  EXPECT_TRUE(phi_inv(phi(Hom::zero())).is_zero());
  EXPECT_EQ(phi(phi_inv(Point::origin())), Point::origin());
}

TEST(Nbhd, WorkedExamples) {
  const BasicNbhd spec{Hom::delta(Real(0)), {constant(Rat(1))}, Rat(1, 2)};
  EXPECT_TRUE(in_nbhd(Hom::scaled(Real(Rat(12, 10)), Real(7)), spec));
  EXPECT_TRUE(in_nbhd(spec.center, spec));
  EXPECT_FALSE(in_nbhd(Hom::zero(), spec));
  // Strict inequality: |3/2 - 1| = 1/2 is outside.
  EXPECT_FALSE(in_nbhd(Hom::scaled(Real(Rat(3, 2)), Real(7)), spec));

  const Seq a = Seq::affine(2, 2);
  EXPECT_TRUE(zero_base_member(Point::at(Real(4), Real(Rat(1, 10))), Rat(1), a));
  EXPECT_FALSE(zero_base_member(Point::at(Real(4), Real(1)), Rat(1), a));
  // Non-strict: y = eps / eta_a(4) = 1/5 is inside.
  EXPECT_TRUE(zero_base_member(Point::at(Real(4), Real(Rat(1, 5))), Rat(1), a));
  EXPECT_TRUE(zero_base_member(Point::origin(), Rat(1, 1000), a));

  EXPECT_TRUE(in_nbhd(Hom::zero(), NbhdSpec{ZeroBaseNbhd{Rat(1), a}}));
}

TEST(Nbhd, JsonRoundtrip) {
  const NbhdSpec basic = BasicNbhd{Hom::delta(Real(2)), {constant(Rat(1)), tau()}, Rat(1, 3)};
  const Json j = nbhd_to_json(basic);
  EXPECT_EQ(j["kind"], "basic");
  EXPECT_EQ(nbhd_to_json(nbhd_from_json(j)), j);
  const NbhdSpec zero = ZeroBaseNbhd{Rat(1, 2), Seq::geometric(1, 2)};
  EXPECT_EQ(nbhd_to_json(nbhd_from_json(nbhd_to_json(zero))), nbhd_to_json(zero));
  EXPECT_THROW(nbhd_from_json(Json::parse(R"({"kind":"basic","eps":"1","center":{"hom":"zero"},"tests":[]})")),
               ParseError);
}

TEST(Radii, WorkedExamples) {
  Radii r = continuity_radii(Rat(1), Rat(1), Rat(2, 5));
  EXPECT_EQ(r.eps1, Rat(1, 20));
  EXPECT_EQ(r.eps2, Rat(1, 20));
  r = continuity_radii(Rat(0), Rat(1), Rat(1));
  EXPECT_EQ(r.eps1, Rat(1, 4));
  EXPECT_EQ(r.eps2, Rat(1, 8));
}

TEST(Radii, LargeEpsIsCapped) {
  // Uncapped radii for eps = 100 would admit t = 1/100, y = 1000.
  const Radii r = continuity_radii(Rat(0), Rat(1), Rat(100));
  const Hom center = Hom::delta(Real(0));
  const Hom far = Hom::scaled(Real(Rat(1, 100)), Real(1000));
  const bool admitted = in_nbhd(far, BasicNbhd{center, {constant(Rat(1))}, r.eps1}) &&
                        in_nbhd(far, BasicNbhd{center, {tau()}, r.eps2});
  EXPECT_FALSE(admitted);
  EXPECT_EQ(r.eps1, Rat(1, 4));
}

TEST(Properties, RadiiArePositive) {
  gen::Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Radii r = continuity_radii(gen::random_rat(rng, 0, 1000), gen::random_positive_rat(rng, 50),
                                     gen::random_positive_rat(rng, 200, 64));
    EXPECT_GT(r.eps1, 0);
    EXPECT_GT(r.eps2, 0);
  }
}

TEST(Properties, ForwardContinuity) {
  gen::Rng rng(6);
  std::size_t pairs = 0;
  for (int i = 0; i < 100; ++i) {
    const Rat x = gen::random_rat(rng, 0, 50), s = gen::random_positive_rat(rng, 20);
    const Rat eps = i % 10 == 0 ? gen::random_positive_rat(rng, 200) : gen::random_positive_rat(rng, 1, 64);
    const Radii r = continuity_radii(x, s, eps);
    const Hom center = Hom::scaled(Real(s), Real(x));
    const BasicNbhd unit{center, {constant(Rat(1))}, r.eps1}, lin{center, {tau()}, r.eps2};
    for (int k = 0; k < 1000; ++k) {
      const Rat t = open_between(rng, std::max(Rat(0), Rat(s - r.eps1)), s + r.eps1);
      const Rat ylo = std::max(Rat(0), Rat((s * (x + 1) - r.eps2) / t - 1));
      const Rat yhi = (s * (x + 1) + r.eps2) / t - 1;
      if (yhi <= ylo) continue;
      const Rat y = open_between(rng, ylo, yhi);
      const Hom psi = Hom::scaled(Real(t), Real(y));
      ASSERT_TRUE(in_nbhd(psi, unit) && in_nbhd(psi, lin));
      ++pairs;
      EXPECT_LT(taxicab(phi(psi), phi(center)), Real(eps))
          << "x=" << to_string(x) << " s=" << to_string(s) << " eps=" << to_string(eps) << " t=" << to_string(t)
          << " y=" << to_string(y);
    }
  }
  EXPECT_GE(pairs, 99'000u);
}

TEST(InverseRadius, WorkedExamples) {
  const InverseRadius c = inverse_continuity_radius(Rat(3), Rat(2), constant(Rat(5)), Rat(1));
  EXPECT_FALSE(c.delta);
  EXPECT_EQ(c.lambda0, std::min(c.lambda1, c.lambda2) / 2);

  const InverseRadius t = inverse_continuity_radius(Rat(2), Rat(1), tau(), Rat(1));
  EXPECT_LT(t.lambda1, Rat(1, 6));
  EXPECT_LT((1 + t.lambda1) * t.lambda2, Rat(1, 2));
  EXPECT_EQ(t.slope, Real(1));
  EXPECT_LT(t.lambda0, std::min(t.lambda1, t.lambda2));

  const InverseRadius e = inverse_continuity_radius(Rat(10), Rat(1), eta(Seq::affine(2, 2)), Rat(1));
  EXPECT_EQ(e.slope, Real(Rat(1, 4)));
  ASSERT_TRUE(e.delta);
  EXPECT_EQ(*e.delta, std::min(Rat(1), Rat(e.lambda2 * 4)));
}

TEST(Properties, InverseContinuity) {
  gen::Rng rng(8);
  auto fs = gen::certified_corpus();
  fs.push_back(tau());
  fs.push_back(add(tau(), scale(Rat(-2), sqrt_tau())));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    for (int inst = 0; inst < 4; ++inst) {
      const Rat x = gen::random_rat(rng, 0, 60), s = gen::random_positive_rat(rng, 10);
      const Rat eps = gen::random_positive_rat(rng, 2, 32);
      const InverseRadius r = inverse_continuity_radius(x, s, fs[i], eps);
      ASSERT_GT(r.lambda0, 0);
      const Real sfx = Real(s) * eval(fs[i], Real(x));
      for (int k = 0; k < 250; ++k) {
        const Rat y = open_between(rng, std::max(Rat(0), Rat(x - r.lambda0)), x + r.lambda0);
        const Rat t = open_between(rng, s - r.lambda0, s + r.lambda0);
        const Real gap = abs(sfx - Real(t) * eval(fs[i], Real(y)));
        EXPECT_LT(gap, Real(eps)) << serialize(fs[i]) << " x=" << to_string(x) << " y=" << to_string(y);
      }
    }
  }
}

TEST(Converge, WorkedExamples) {
  const Seq a = Seq::affine(2, 2);
  const EtaFunction e(a);
  std::vector<std::pair<Rat, Rat>> decaying, flat;
  for (int k = 1; k <= 100; ++k) {
    const Rat v = e.value(Rat(k));
    decaying.emplace_back(Rat(k), Rat(1) / (v * v));
    flat.emplace_back(Rat(k), Rat(1));
  }
  const auto d = converges_to_zero(decaying, {a}, Rat(1, 2));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d[0].settled);
  EXPECT_EQ(d[0].from, 1u);  // eta_a(1) = 2 already

  const auto f = converges_to_zero(flat, {a, Seq::geometric(1, 3)}, Rat(99, 100));
  EXPECT_FALSE(f[0].settled);
  EXPECT_FALSE(f[1].settled);

  EXPECT_TRUE(converges_to_zero(flat, {}, Rat(1, 2)).empty());
  EXPECT_THROW(converges_to_zero({{Rat(1), Rat(0)}}, {a}, Rat(1)), DomainError);
}

TEST(Converge, CsvInput) {
  const auto pts = parse_points_csv("x,c\n1,1/4\n2, 0.125\n\n3,1/100\n");
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1].second, Rat(1, 8));
  EXPECT_THROW(parse_points_csv("1,2\nfoo,1\n"), ParseError);
  const auto v = converges_to_zero(pts, {Seq::affine(1, 1)}, Rat(1, 2));
  EXPECT_TRUE(v[0].settled);
}

TEST(Properties, ZeroBaseSettling) {
  gen::Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    const Seq a = gen::random_seq(rng);
    const Rat eps = open_unit(rng, 99);
    const EtaFunction e(a);
    std::vector<std::pair<Rat, Rat>> decaying, flat;
    for (int k = 1; k <= 200; ++k) {
      const Rat v = e.value(Rat(k));
      decaying.emplace_back(Rat(k), Rat(1) / (v * v));
      flat.emplace_back(Rat(k), Rat(1));
    }
    EXPECT_TRUE(converges_to_zero(decaying, {a}, eps)[0].settled) << to_string(eps);
    EXPECT_FALSE(converges_to_zero(flat, {a}, eps)[0].settled);
  }
}

TEST(Properties, BaseRefinement) {
  gen::Rng rng(12);
  std::size_t inside = 0;
  for (int i = 0; i < 50; ++i) {
    const Seq a = gen::random_seq(rng), b = gen::random_seq(rng);
    const Seq c = merge_sequences(a, b);
    const EtaFunction ec(c);
    const Rat eps = gen::random_positive_rat(rng, 3);
    for (int k = 0; k < 200; ++k) {
      const Rat x = gen::random_rat(rng, 0, 2000);
      const Rat y = eps / ec.value(x) * gen::random_positive_rat(rng, 2, 16);
      const Point p = Point::at(Real(x), Real(y));
      if (!zero_base_member(p, eps, c)) continue;
      ++inside;
      EXPECT_TRUE(zero_base_member(p, eps, a));
      EXPECT_TRUE(zero_base_member(p, eps, b));
    }
  }
  EXPECT_GT(inside, 1000u);
}

TEST(Properties, EnvelopeRefinement) {
  gen::Rng rng(14);
  for (const FnExpr& f : gen::certified_corpus()) {
    const Envelope env = build_envelope(f);
    const EtaFunction ea(env.seq);
    const Rat eps = gen::random_positive_rat(rng, 4);
    const Rat xmax = grid_horizon(env.seq, 20);
    for (int k = 0; k < 200; ++k) {
      const Rat x = xmax * open_unit(rng);
      const Real bound = Real(env.L_bound) * ea.eval(x);
      const Rat c = rat_lower_bound(Real(eps) / bound) * open_unit(rng);
      ASSERT_LT(Real(c) * bound, Real(eps));
      EXPECT_LT(abs(apply(Hom::scaled(Real(c), Real(x)), f)), Real(eps)) << serialize(f);
    }
  }
}
