#include <random>

#include <gtest/gtest.h>

#include "heavyset/errors.hpp"
#include "heavyset/group.hpp"

using namespace heavyset;

namespace {

ExactScalar S(const char* text) { return ExactScalar::parse(text); }

GroupPoint t1(const char* text) { return GroupSpace::torus(1).torus_point({S(text)}); }

const ExactScalar& coord(const GroupPoint& x, std::size_t i = 0) {
  return std::get<TorusPoint>(x).coords.at(i);
}

// p-adic distance from integer values, independent of the digit code.
Rational padic_distance(Integer a, Integer b, std::uint32_t p, std::size_t m) {
  Integer modulus = 1;
  for (std::size_t i = 0; i < m; ++i) modulus *= p;
  Integer diff = ((a - b) % modulus + modulus) % modulus;
  if (diff == 0) return 0;
  Rational dist = 1;
  while (diff % p == 0) {
    diff /= p;
    dist /= p;
  }
  return dist;
}

}  // namespace

TEST(Group, TranslateExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  EXPECT_EQ(coord(t.translate(t1("1/4"), t1("1/2"))), S("3/4"));
  // 3/4 + sqrt2 - 1 = 1.164..., reduced mod 1
  EXPECT_EQ(coord(t.translate(t1("3/4"), t1("sqrt2 - 1"))), S("sqrt2 - 5/4"));

  const GroupSpace z2 = GroupSpace::padic(2, 4);
  const GroupPoint two = z2.translate(z2.padic_point(1), z2.padic_point(1));
  EXPECT_EQ(std::get<PAdicPoint>(two).digits, (std::vector<std::uint32_t>{0, 1, 0, 0}));
  // Carry past the truncation depth wraps.
  EXPECT_EQ(z2.translate(z2.padic_point(15), z2.padic_point(1)), z2.zero());
}

TEST(Group, DistanceExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  EXPECT_EQ(t.distance(t1("9/10"), t1("1/10")), S("1/5"));
  const GroupSpace t2 = GroupSpace::torus(2);
  EXPECT_EQ(t2.distance(t2.zero(), t2.torus_point({S("1/2"), S("1/4")})), S("1/2"));
  const GroupSpace z3 = GroupSpace::padic(3, 3);
  // digits 1,2,0 = 7 and 1,0,0 = 1
  EXPECT_EQ(z3.distance(z3.padic_point(7), z3.padic_point(1)), S("1/3"));
  EXPECT_EQ(z3.distance(z3.padic_point(7), z3.padic_point(7 + 27)), ExactScalar(0));
}

TEST(Group, BallMeasureExamples) {
  EXPECT_EQ(GroupSpace::torus(2).ball_measure(S("1/10")), S("1/25"));
  EXPECT_EQ(GroupSpace::padic(2, 10).ball_measure(S("1/3")), S("1/4"));
  EXPECT_EQ(GroupSpace::torus(1).ball_measure(S("3/4")), ExactScalar(1));
  EXPECT_EQ(GroupSpace::padic(2, 10).ball_measure(ExactScalar(2)), ExactScalar(1));
  EXPECT_THROW((void)GroupSpace::torus(1).ball_measure(ExactScalar(0)), DomainError);
}

TEST(Group, RegularityExamples) {
  const std::vector<ExactScalar> dyadic = {S("1/2"), S("1/4"), S("1/8")};
  const RegularityCheck t = verify_regularity(GroupSpace::torus(1), dyadic);
  EXPECT_TRUE(t.pass);
  EXPECT_EQ(t.c3_observed, ExactScalar(2));
  EXPECT_EQ(t.c4_observed, ExactScalar(2));

  const RegularityCheck z = verify_regularity(GroupSpace::padic(2, 16), dyadic);
  EXPECT_TRUE(z.pass);
  EXPECT_EQ(z.c3_observed, ExactScalar(1));
  EXPECT_EQ(z.c4_observed, ExactScalar(1));

  const std::vector<ExactScalar> odd = {S("1/3"), S("1/5")};
  const RegularityCheck zo = verify_regularity(GroupSpace::padic(2, 16), odd);
  EXPECT_TRUE(zo.pass);
  EXPECT_EQ(zo.c3_observed, S("5/8"));
  EXPECT_GE(zo.c3_observed, S("1/2"));

  const std::vector<ExactScalar> tenth = {S("1/10")};
  const RegularityCheck t2 = verify_regularity(GroupSpace::torus(2), tenth);
  EXPECT_TRUE(t2.pass);
  EXPECT_EQ(t2.c3_observed, ExactScalar(4));
}

TEST(Group, RegularityOnZ2Dyadics) {
  std::vector<ExactScalar> grid;
  for (int j = 1; j <= 10; ++j) grid.push_back(ExactScalar(Rational(1, Integer(1) << j)));
  const RegularityCheck z = verify_regularity(GroupSpace::padic(2, 32), grid);
  EXPECT_TRUE(z.pass);
  EXPECT_GE(z.c3_observed, ExactScalar(Rational(1, 2)));
  EXPECT_LE(z.c4_observed, ExactScalar(1));
}

TEST(Group, GridPoints) {
  const auto g = GroupSpace::torus(1).grid_points(4);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(coord(g[1]), S("1/4"));
  EXPECT_EQ(coord(g[3]), S("3/4"));
  EXPECT_EQ(GroupSpace::torus(2).grid_points(2).size(), 4u);

  const GroupSpace z2 = GroupSpace::padic(2, 2);
  const auto p = z2.grid_points(4);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(std::get<PAdicPoint>(p[1]).digits, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_EQ(std::get<PAdicPoint>(p[2]).digits, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(GroupSpace::padic(2, 3).padic_grid_level(1000), 3u);
  EXPECT_EQ(GroupSpace::padic(3, 20).padic_grid_level(10), 3u);

  EXPECT_THROW((void)GroupSpace::torus(3).grid_size(1000, 1000), ResourceCap);
  for (std::uint64_t i = 0; i < 9; ++i) {
    const GroupSpace t2 = GroupSpace::torus(2);
    EXPECT_EQ(t2.grid_index(3, t2.grid_point(3, i)), i);
  }
}

TEST(Group, IsometryTorus) {
  std::mt19937_64 rng(42);
  for (int dim : {1, 2, 3}) {
    const GroupSpace t = GroupSpace::torus(dim);
    for (int s = 0; s < 200; ++s) {
      const GroupPoint x = t.random_point(rng);
      const GroupPoint y = t.random_point(rng);
      const GroupPoint g = t.random_point(rng);
      EXPECT_EQ(t.distance(t.translate(x, g), t.translate(y, g)), t.distance(x, y));
      EXPECT_EQ(t.translate(t.translate(x, g), t.negate(g)), x);
    }
  }
  // Irrational step as well.
  const GroupSpace t = GroupSpace::torus(1);
  const GroupPoint g = t1("sqrt2 - 1");
  for (int i = 0; i < 50; ++i) {
    const GroupPoint x = t.grid_point(50, i);
    const GroupPoint y = t.grid_point(50, (i * 7) % 50);
    EXPECT_EQ(t.distance(t.translate(x, g), t.translate(y, g)), t.distance(x, y));
  }
}

TEST(Group, IsometryPAdicAgainstValueOracle) {
  std::mt19937_64 rng(43);
  for (std::uint32_t p : {2u, 3u, 5u}) {
    const GroupSpace z = GroupSpace::padic(p, 12);
    for (int s = 0; s < 200; ++s) {
      const GroupPoint x = z.random_point(rng);
      const GroupPoint y = z.random_point(rng);
      const GroupPoint g = z.random_point(rng);
      const Integer xv = std::get<PAdicPoint>(x).value();
      const Integer yv = std::get<PAdicPoint>(y).value();
      EXPECT_EQ(z.distance(x, y), ExactScalar(padic_distance(xv, yv, p, 12)));
      EXPECT_EQ(z.distance(z.translate(x, g), z.translate(y, g)), z.distance(x, y));
      const Integer sum = std::get<PAdicPoint>(z.translate(x, g)).value();
      EXPECT_EQ(sum, (xv + std::get<PAdicPoint>(g).value()) % z.modulus());
    }
  }
}

TEST(Group, GridTranslationInvariance) {
  const GroupSpace t = GroupSpace::torus(2);
  const std::uint64_t r = 6;
  const GroupPoint g = t.grid_point(r, 13);
  std::vector<bool> seen(r * r, false);
  for (std::uint64_t i = 0; i < r * r; ++i) {
    const auto j = t.grid_index(r, t.translate(t.grid_point(r, i), g));
    ASSERT_TRUE(j.has_value());
    EXPECT_FALSE(seen[*j]);
    seen[*j] = true;
  }
}

TEST(Group, BallMeasureMonotoneAndRegular) {
  for (const GroupSpace& space : {GroupSpace::torus(1), GroupSpace::torus(2), GroupSpace::padic(3, 20)}) {
    ExactScalar prev = 0;
    for (int den = 200; den >= 2; --den) {
      const ExactScalar eps(Rational(1, den));
      const ExactScalar m = space.ball_measure(eps);
      EXPECT_GE(m, prev);
      prev = m;
      const ExactScalar e_d = pow(eps, static_cast<unsigned>(space.exponent()));
      EXPECT_LE(ExactScalar(space.c3()) * e_d, m);
      EXPECT_LE(m, ExactScalar(space.c4()) * e_d);
    }
  }
}

TEST(Group, MismatchedSpacesThrow) {
  const GroupSpace t1s = GroupSpace::torus(1);
  const GroupSpace t2s = GroupSpace::torus(2);
  EXPECT_THROW((void)t1s.translate(t1s.zero(), t2s.zero()), SpaceMismatch);
  EXPECT_THROW((void)t1s.distance(t1s.zero(), GroupSpace::padic(2, 4).zero()), SpaceMismatch);
}
