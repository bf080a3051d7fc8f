#include "sohom/real.hpp"

#include <gtest/gtest.h>

using namespace sohom;

TEST(Rat, ParsesFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rat("43/6"), Rat(43, 6));
  EXPECT_EQ(parse_rat("-4"), Rat(-4));
  EXPECT_EQ(parse_rat("0.125"), Rat(1, 8));
  EXPECT_EQ(parse_rat("-2.5"), Rat(-5, 2));
  EXPECT_EQ(parse_rat("6/4"), Rat(3, 2));
  EXPECT_EQ(to_string(parse_rat("6/4")), "3/2");
  EXPECT_EQ(to_string(Rat(10)), "10");
}

TEST(Rat, RejectsGarbage) {
  EXPECT_THROW(parse_rat(""), ParseError);
  EXPECT_THROW(parse_rat("1/0"), ParseError);
  EXPECT_THROW(parse_rat("abc"), ParseError);
  EXPECT_THROW(parse_rat("1/-2"), ParseError);
  EXPECT_THROW(parse_rat("."), ParseError);
}

TEST(Rat, FloorAndCeil) {
  EXPECT_EQ(floor_rat(Rat(7, 2)), 3);
  EXPECT_EQ(ceil_rat(Rat(7, 2)), 4);
  EXPECT_EQ(floor_rat(Rat(-7, 2)), -4);
  EXPECT_EQ(ceil_rat(Rat(-7, 2)), -3);
  EXPECT_EQ(ceil_rat(Rat(4)), 4);
}

TEST(Real, ExactArithmeticStaysExact) {
  Real a(Rat(1, 3));
  Real b(Rat(1, 6));
  Real c = a + b;
  ASSERT_TRUE(c.exact());
  EXPECT_EQ(c.rat(), Rat(1, 2));
  EXPECT_TRUE((a * b).exact());
  EXPECT_TRUE((a / b).exact());
}

TEST(Real, PerfectPowersStayExact) {
  Real r = pow_rat(Real(Rat(4)), Rat(1, 2));
  ASSERT_TRUE(r.exact());
  EXPECT_EQ(r.rat(), Rat(2));
  r = pow_rat(Real(Rat(8, 27)), Rat(2, 3));
  ASSERT_TRUE(r.exact());
  EXPECT_EQ(r.rat(), Rat(4, 9));
  r = pow_rat(Real(Rat(2)), Rat(1, 2));
  EXPECT_FALSE(r.exact());
  EXPECT_NEAR(r.to_double(), 1.4142135623730951, 1e-15);
}

TEST(Real, MixedDegradesToFloatAndComparesExactly) {
  Real s = sqrt(Real(2));
  Real m = s + Real(1);
  EXPECT_FALSE(m.exact());
  EXPECT_LT(Real(Rat(14142, 10000)), s);
  EXPECT_LT(s, Real(Rat(14143, 10000)));
  EXPECT_EQ(Real(0) * s, Real(0));
  EXPECT_TRUE((Real(0) * s).exact());
}

TEST(Real, UpperBoundsNeverUnderestimate) {
  Real s = sqrt(Real(258));
  Rat up = rat_upper_bound(s);
  Rat lo = rat_lower_bound(s);
  EXPECT_GT(up * up, Rat(258));
  EXPECT_LT(lo * lo, Rat(258));
  EXPECT_LT(up - lo, Rat(1, Int(1) << 62));
  EXPECT_EQ(ceil_real(s), 17);
  EXPECT_EQ(ceil_real(Real(Rat(16))), 16);
}

TEST(Real, Formatting) {
  EXPECT_EQ(Real(Rat(43, 6)).str(), "43/6");
  EXPECT_EQ(Real(Rat(1, 4)).str(true), "0.25");
  EXPECT_EQ(sqrt(Real(2)).str(), "1.41421356237");
}

TEST(Real, CloseUsesRelativeTolerance) {
  EXPECT_TRUE(close(Real(Rat(1)), Real(Rat(1)), 0));
  EXPECT_FALSE(close(Real(Rat(1)), Real(Rat(1000000001, 1000000000)), 1e-12));
  EXPECT_TRUE(close(sqrt(Real(2)) * sqrt(Real(2)), Real(2), 1e-40));
}

TEST(Real, HugeExactPartsCancelInMixedSums) {
  const Rat huge = Rat(mp::pow(Int(2), 2000)) + Rat(1, 3);
  const Real a = Real(huge) + sqrt(Real(2));
  const Real b = Real(huge) + sqrt(Real(3));
  EXPECT_FALSE(a.exact());
  // The difference keeps full float precision despite the 600-digit part.
  EXPECT_TRUE(close(b - a, Real(Float(mp::sqrt(Float(3)) - mp::sqrt(Float(2)))), 1e-45));
  EXPECT_LT(a, b);
  EXPECT_EQ((a - a).sign(), 0);
}

TEST(Real, NegativeRationalPowersStayExact) {
  EXPECT_EQ(pow_rat(Real(Rat(4)), Rat(-1, 2)).rat(), Rat(1, 2));
  EXPECT_EQ(pow_rat(Real(Rat(8, 27)), Rat(-2, 3)).rat(), Rat(9, 4));
  const Real r = pow_rat(Real(Rat(2)), Rat(-1, 2));
  EXPECT_FALSE(r.exact());
  EXPECT_TRUE(close(r * r, Real(Rat(1, 2)), 1e-45));
}
