#include <random>

#include <gtest/gtest.h>

#include "heavyset/errors.hpp"
#include "heavyset/target_set.hpp"

using namespace heavyset;

namespace {

ExactScalar S(const char* text) { return ExactScalar::parse(text); }

GroupPoint t1(const GroupSpace& t, const ExactScalar& x) { return t.torus_point({x}); }

// Circle distance from y to the line interval [l, r] (r - l < 1).
ExactScalar distance_to_interval(const ExactScalar& y, const ExactScalar& l, const ExactScalar& r) {
  // Shift so the interval starts at 0.
  const ExactScalar u = (y - l).mod1();
  const ExactScalar len = r - l;
  if (u <= len) return 0;
  return min(u - len, ExactScalar(1) - u);
}

struct LineBox {
  std::vector<std::pair<ExactScalar, ExactScalar>> sides;
};

ExactScalar distance_to_boxes(const std::vector<ExactScalar>& y, const std::vector<LineBox>& boxes) {
  ExactScalar best = 1;
  for (const auto& b : boxes) {
    ExactScalar d = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      d = max(d, distance_to_interval(y[k], b.sides[k].first, b.sides[k].second));
    }
    best = min(best, d);
  }
  return best;
}

ExactScalar random_unit(std::mt19937_64& rng, int den) {
  return ExactScalar(Rational(static_cast<long long>(rng() % den), den));
}

}  // namespace

TEST(TargetSet, ContainsExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  const TargetSet a = TargetSet::intervals(t, {{0, S("1/2")}});
  EXPECT_TRUE(a.contains(t1(t, S("1/2"))));
  EXPECT_TRUE(a.contains(t1(t, S("sqrt2 - 1"))));
  EXPECT_FALSE(a.contains(t1(t, S("(sqrt5-1)/2"))));

  const GroupSpace z2 = GroupSpace::padic(2, 8);
  const TargetSet even = TargetSet::padic_balls(z2, {{0, 1}});
  EXPECT_FALSE(even.contains(z2.padic_point(1)));
  EXPECT_TRUE(even.contains(z2.padic_point(6)));
  EXPECT_THROW((void)a.contains(z2.zero()), SpaceMismatch);
}

TEST(TargetSet, WrappedIntervalContainsZero) {
  const GroupSpace t = GroupSpace::torus(1);
  const TargetSet a = TargetSet::intervals(t, {{S("9/10"), S("1/10")}});
  EXPECT_TRUE(a.contains(t.zero()));
  EXPECT_TRUE(a.contains(t1(t, S("19/20"))));
  EXPECT_FALSE(a.contains(t1(t, S("1/2"))));
  EXPECT_EQ(a.measure(), S("1/5"));
  EXPECT_EQ(a.circle_components(), 1u);
}

TEST(TargetSet, MeasureExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  const TargetSet golden = TargetSet::intervals(t, {{0, S("(sqrt5-1)/2")}});
  EXPECT_EQ(golden.measure(), S("(sqrt5-1)/2"));
  EXPECT_FALSE(golden.measure().is_rational());
  const TargetSet two = TargetSet::intervals(t, {{0, S("1/4")}, {S("1/2"), S("3/4")}});
  EXPECT_EQ(two.measure(), S("1/2"));
  EXPECT_TRUE(two.measure().is_rational());
  const GroupSpace z3 = GroupSpace::padic(3, 6);
  EXPECT_EQ(TargetSet::padic_balls(z3, {{2, 1}}).measure(), S("1/3"));
  // Overlapping input intervals are merged before measuring.
  EXPECT_EQ(TargetSet::intervals(t, {{0, S("1/2")}, {S("1/4"), S("3/4")}}).measure(), S("3/4"));
  EXPECT_TRUE(TargetSet::whole(t).is_full());
}

TEST(TargetSet, DilateExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  const TargetSet a = TargetSet::intervals(t, {{S("0.1"), S("0.3")}, {S("0.35"), S("0.5")}});
  EXPECT_EQ(a.measure(), S("0.35"));
  const TargetSet d = a.dilate(S("0.05"));
  ASSERT_EQ(d.arcs().size(), 1u);
  EXPECT_EQ(d.arcs()[0], (Arc{S("0.05"), S("0.55")}));
  EXPECT_EQ(d.measure(), S("0.5"));

  const GroupSpace t2 = GroupSpace::torus(2);
  const TargetSet box = TargetSet::boxes(t2, {{{0, S("1/2")}, {0, S("1/2")}}});
  const TargetSet db = box.dilate(S("1/10"));
  EXPECT_EQ(db.measure(), S("49/100"));
  EXPECT_TRUE(db.contains(t2.torus_point({S("19/20"), S("19/20")})));
  EXPECT_FALSE(db.contains(t2.torus_point({S("19/20"), S("7/10")})));

  const GroupSpace z2 = GroupSpace::padic(2, 8);
  const TargetSet even = TargetSet::padic_balls(z2, {{0, 1}});
  EXPECT_EQ(even.dilate(S("1/8")).measure(), S("1/2"));
  EXPECT_EQ(even.dilate(ExactScalar(1)).measure(), ExactScalar(1));

  const TargetSet half = TargetSet::intervals(t, {{0, S("1/2")}});
  EXPECT_TRUE(half.dilate(S("1/4")).is_full());
  EXPECT_THROW((void)half.dilate(ExactScalar(0)), DomainError);
}

TEST(TargetSet, BoundaryDimension) {
  EXPECT_EQ(TargetSet::intervals(GroupSpace::torus(1), {{0, S("1/2")}}).boundary_dimension(), 0);
  const GroupSpace t3 = GroupSpace::torus(3);
  EXPECT_EQ(TargetSet::boxes(t3, {{{0, S("1/2")}, {0, S("1/2")}, {0, S("1/3")}}}).boundary_dimension(), 2);
  EXPECT_EQ(TargetSet::padic_balls(GroupSpace::padic(5, 4), {{1, 2}}).boundary_dimension(), 0);
}

TEST(TargetSet, DilationMatchesDistanceOracle1d) {
  const GroupSpace t = GroupSpace::torus(1);
  const std::vector<std::pair<ExactScalar, ExactScalar>> parts = {
      {S("1/10"), S("3/10")}, {S("7/20"), S("1/2")}, {S("9/10"), S("21/20")}};
  std::vector<Endpoints> ends;
  for (const auto& [l, r] : parts) ends.emplace_back(l, r.mod1());
  const TargetSet a = TargetSet::intervals(t, ends);
  std::mt19937_64 rng(8);
  for (const char* e : {"1/40", "1/20", "3/25", "1/7"}) {
    const ExactScalar eps = S(e);
    const TargetSet d = a.dilate(eps);
    const TargetSet d_small = a.dilate(eps / ExactScalar(2));
    for (int s = 0; s < 400; ++s) {
      const ExactScalar y = random_unit(rng, 1000);
      ExactScalar dist = 1;
      for (const auto& [l, r] : parts) dist = min(dist, distance_to_interval(y, l, r));
      EXPECT_EQ(d.contains(t1(t, y)), dist <= eps) << y.to_string() << " eps " << e;
      EXPECT_EQ(a.contains(t1(t, y)), dist.is_zero());
      if (d_small.contains(t1(t, y))) EXPECT_TRUE(d.contains(t1(t, y)));
    }
    EXPECT_GE(d.measure(), a.measure());
  }
}

TEST(TargetSet, DilationMatchesDistanceOracle2d) {
  const GroupSpace t2 = GroupSpace::torus(2);
  const std::vector<LineBox> boxes = {
      {{{S("1/10"), S("2/5")}, {S("7/10"), S("6/5")}}},
      {{{S("3/5"), S("4/5")}, {S("1/5"), S("1/4")}}}};
  std::vector<std::vector<Endpoints>> spec;
  for (const auto& b : boxes) {
    std::vector<Endpoints> sides;
    for (const auto& [l, r] : b.sides) sides.emplace_back(l, r.mod1());
    spec.push_back(sides);
  }
  const TargetSet a = TargetSet::boxes(t2, spec);
  std::mt19937_64 rng(9);
  for (const char* e : {"1/50", "1/10", "1/5"}) {
    const ExactScalar eps = S(e);
    const TargetSet d = a.dilate(eps);
    for (int s = 0; s < 400; ++s) {
      const std::vector<ExactScalar> y = {random_unit(rng, 500), random_unit(rng, 500)};
      const ExactScalar dist = distance_to_boxes(y, boxes);
      EXPECT_EQ(d.contains(t2.torus_point(y)), dist <= eps);
      EXPECT_EQ(a.contains(t2.torus_point(y)), dist.is_zero());
    }
  }
}

TEST(TargetSet, PAdicDilationOracle) {
  const GroupSpace z3 = GroupSpace::padic(3, 8);
  const TargetSet a = TargetSet::padic_balls(z3, {{4, 3}, {20, 2}});
  std::mt19937_64 rng(10);
  for (const char* e : {"1/100", "1/27", "1/10", "1/3", "1/2"}) {
    const ExactScalar eps = S(e);
    const TargetSet d = a.dilate(eps);
    for (int s = 0; s < 300; ++s) {
      const GroupPoint y = z3.random_point(rng);
      ExactScalar dist = 1;
      // Ultrametric: distance to a ball is 0 inside, else distance to its center.
      for (const auto& [c, radius] : {std::pair{4, S("1/27")}, std::pair{20, S("1/9")}}) {
        const ExactScalar to_center = z3.distance(y, z3.padic_point(c));
        dist = min(dist, to_center <= radius ? ExactScalar(0) : to_center);
      }
      EXPECT_EQ(d.contains(y), dist <= eps) << e;
    }
  }
}

TEST(TargetSet, ContentCertificateExamples) {
  const GroupSpace t = GroupSpace::torus(1);
  const TargetSet half = TargetSet::intervals(t, {{0, S("1/2")}});
  const std::vector<ExactScalar> grid = {S("1/10"), S("1/100")};
  const ContentCertificate c = content_certificate(half, grid);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.s, 0);
  EXPECT_EQ(c.c1, ExactScalar(2));
  for (const auto& [eps, growth] : c.growth) EXPECT_EQ(growth, ExactScalar(2) * eps);

  // Two components: growth 4 eps while the gap of 1/20 stays open.
  const TargetSet two = TargetSet::intervals(t, {{S("0.1"), S("0.3")}, {S("0.35"), S("0.5")}});
  const std::vector<ExactScalar> fine = {S("1/50")};
  const ContentCertificate c2 = content_certificate(two, fine);
  EXPECT_EQ(c2.growth[0].second, S("2/25"));
  EXPECT_EQ(c2.c1, ExactScalar(4));
  ASSERT_TRUE(c2.analytic_c1.has_value());
  EXPECT_EQ(*c2.analytic_c1, ExactScalar(4));
  EXPECT_TRUE(c2.holds);

  const GroupSpace z2 = GroupSpace::padic(2, 10);
  const ContentCertificate cp = content_certificate(TargetSet::padic_balls(z2, {{0, 1}}), fine);
  EXPECT_TRUE(cp.holds);
  EXPECT_TRUE(cp.growth[0].second.is_zero());

  const std::vector<ExactScalar> empty;
  EXPECT_THROW((void)content_certificate(half, empty), DomainError);
}

TEST(TargetSet, ContentFallback) {
  const GroupSpace t2 = GroupSpace::torus(2);
  const TargetSet box = TargetSet::boxes(t2, {{{0, S("1/2")}, {0, S("1/2")}}});
  const std::vector<ExactScalar> grid = {S("1/100"), S("1/1000")};
  // growth ~ 4 eps; eps^(1 - tau) dominates once tau is large enough
  EXPECT_TRUE(content_fallback_holds(box, grid, 1, 0.5));
  EXPECT_FALSE(content_fallback_holds(box, grid, 1, 1e-6));
}
