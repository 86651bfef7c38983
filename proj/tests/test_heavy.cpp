#include <random>
#include <set>

#include <gtest/gtest.h>

#include "heavyset/errors.hpp"
#include "heavyset/heavy.hpp"

using namespace heavyset;

namespace {

ExactScalar S(const char* text) { return ExactScalar::parse(text); }

const GroupSpace kT1 = GroupSpace::torus(1);

GroupPoint t1(const ExactScalar& x) { return kT1.torus_point({x}); }

Schedule manual_schedule(Integer p, Integer q, Integer n, Rational eps) {
  Schedule s;
  s.index = 1;
  s.p = p;
  s.q = q;
  s.n = n;
  s.eps = eps;
  s.level = Rational(p, q);
  return s;
}

}  // namespace

TEST(DeficitTrace, Examples) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const DeficitTrace one = deficit_trace(kT1.zero(), t1(S("sqrt2-1")), half, S("1/2"), 1);
  ASSERT_EQ(one.sums.size(), 1u);
  EXPECT_EQ(one.sums[0], S("1/2"));

  const DeficitTrace golden = deficit_trace(kT1.zero(), t1(S("(sqrt5-1)/2")), half, S("1/2"), 3);
  EXPECT_EQ(golden.chi, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(golden.sums, (std::vector<ExactScalar>{S("1/2"), 0, S("1/2")}));

  const GroupSpace z2 = GroupSpace::padic(2, 8);
  const TargetSet even = TargetSet::padic_balls(z2, {{0, 1}});
  const DeficitTrace alt = deficit_trace(z2.zero(), z2.padic_point(1), even, S("1/2"), 2);
  EXPECT_EQ(alt.sums, (std::vector<ExactScalar>{S("1/2"), 0}));

  EXPECT_THROW((void)deficit_trace(kT1.zero(), kT1.zero(), half, S("1/2"), 0), DomainError);
  EXPECT_THROW((void)deficit_trace(kT1.zero(), kT1.zero(), half, S("3/2"), 1), DomainError);
}

TEST(DeficitTrace, IncrementsAreExact) {
  const TargetSet golden = TargetSet::intervals(kT1, {{0, S("(sqrt5-1)/2")}});
  const ExactScalar gamma = golden.measure();
  const DeficitTrace t = deficit_trace(t1(S("1/7")), t1(S("sqrt5/9")), golden, gamma, 400);
  ExactScalar prev = 0;
  for (std::size_t j = 0; j < t.sums.size(); ++j) {
    const ExactScalar step = t.sums[j] - prev;
    EXPECT_TRUE(step == ExactScalar(1) - gamma || step == -gamma);
    EXPECT_EQ(step == ExactScalar(1) - gamma, t.chi[j] != 0);
    prev = t.sums[j];
  }
}

TEST(IsHeavy, Examples) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const HeavyVerdict v = is_heavy(kT1.zero(), t1(S("(sqrt5-1)/2")), half, S("1/2"), 3);
  EXPECT_FALSE(v.heavy);
  EXPECT_EQ(v.first_failure, 2u);
  EXPECT_EQ(v.min_partial_sum, ExactScalar(0));

  const ExactScalar gamma = S("(sqrt5-1)/2");
  const TargetSet golden = TargetSet::intervals(kT1, {{0, gamma}});
  const HeavyVerdict h = is_heavy(kT1.zero(), t1(gamma), golden, gamma, 1);
  EXPECT_TRUE(h.heavy);
  EXPECT_EQ(h.min_partial_sum, ExactScalar(1) - gamma);

  const HeavyVerdict out = is_heavy(t1(S("9/10")), t1(gamma), golden, gamma, 1);
  EXPECT_FALSE(out.heavy);
  EXPECT_EQ(out.min_partial_sum, -gamma);
}

TEST(IsHeavy, VerdictInvariant) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  for (std::uint64_t i = 0; i < 50; ++i) {
    const HeavyVerdict v = is_heavy(kT1.grid_point(50, i), t1(S("sqrt2-1")), half, S("1/2"), 40);
    EXPECT_EQ(v.heavy, !v.first_failure.has_value());
    EXPECT_EQ(v.heavy, v.min_partial_sum.sign() > 0);
  }
}

TEST(Schedule, Examples) {
  const ExactScalar golden = S("(sqrt5-1)/2");
  const auto s1 = make_schedule(BelowApprox::from_fractions(golden, {{3, 5}}, 1, 2), 0, 1);
  EXPECT_EQ(s1[0].n, 625);
  EXPECT_EQ(s1[0].eps, Rational(1, 25));
  EXPECT_TRUE(s1[0].eps_exact);

  // n = q^(2k/(d - psi)) = 3^4 here.
  const auto s2 = make_schedule(BelowApprox::from_fractions(golden, {{2, 3}}, 1, 2), 1, 2);
  EXPECT_EQ(s2[0].exponent, 4);
  EXPECT_EQ(s2[0].n, 81);
  EXPECT_EQ(s2[0].eps, Rational(1, 9));

  const auto s3 = make_schedule(BelowApprox::from_fractions(S("13/16"), {{1, 2}}, 2, 3), 0, 1);
  EXPECT_EQ(s3[0].n, 64);
  EXPECT_EQ(s3[0].eps, Rational(1, 8));

  EXPECT_THROW((void)make_schedule(below_sequence(golden, 3), 1, 1), DomainError);
}

TEST(Schedule, NonSquareEnvelope) {
  // psi = 1/2 in d = 1 with k = 2: n = floor(q^8).
  const BelowApprox seq = below_sequence(S("(sqrt5-1)/2"), 6);
  const auto sched = make_schedule(seq, Rational(1, 3), 1);
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const Schedule& s = sched[i];
    // n = floor(q^(12/2)) checked against integer powers
    EXPECT_EQ(s.exponent, Rational(6));
    EXPECT_EQ(s.n, pow(s.q, 6));
    if (i > 0) {
      EXPECT_GE(s.n, sched[i - 1].n);
      EXPECT_LE(s.eps, sched[i - 1].eps);
    }
  }
  // A genuinely fractional exponent: 2k/(d - psi) = 4/(3/2) = 8/3.
  const auto frac = make_schedule(seq, Rational(1, 2), 2);
  for (const Schedule& s : frac) {
    // n^3 <= q^8 < (n + 1)^3
    EXPECT_LE(pow(s.n, 3), pow(s.q, 8));
    EXPECT_GT(pow(Integer(s.n + 1), 3), pow(s.q, 8));
    // eps <= n^(-1/2): eps^2 n <= 1, and no better rational with den <= q^2
    EXPECT_LE(s.eps * s.eps * Rational(s.n), 1);
    EXPECT_LE(denominator_of(s.eps), s.q * s.q);
    EXPECT_EQ(s.eps, best_lower_rational(ExactScalar::sqrt(s.n.convert_to<std::int64_t>()) /
                                             ExactScalar(s.n),
                                         s.q * s.q));
  }
}

TEST(Schedule, RationalBranch) {
  const auto sched = make_rational_schedule(Rational(1, 2), {100, 1000, 10000}, 1);
  ASSERT_EQ(sched.size(), 3u);
  EXPECT_EQ(sched[0].eps, Rational(1, 10));
  EXPECT_EQ(sched[2].eps, Rational(1, 100));
  EXPECT_FALSE(sched[1].eps_exact);
  EXPECT_LE(sched[1].eps * sched[1].eps * 1000, 1);
  EXPECT_EQ(sched[1].level, Rational(1, 2));
  EXPECT_THROW((void)make_rational_schedule(Rational(1, 2), {100, 10}, 1), DomainError);
}

TEST(HY, Examples) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const Schedule s = manual_schedule(12, 29, 1, Rational(1, 25));
  const HeavyVerdict v = h_y_verdict(kT1.zero(), t1(S("sqrt2-1")), half, s);
  EXPECT_TRUE(v.heavy);
  EXPECT_EQ(v.min_partial_sum, S("17/29"));

  const Schedule wide = manual_schedule(1, 3, 50, Rational(1, 4));
  for (std::uint64_t i = 0; i < 20; ++i) {
    EXPECT_TRUE(h_y_verdict(kT1.grid_point(20, i), t1(S("sqrt2-1")), half, wide).heavy);
  }
}

TEST(HY, BallTransferProperty) {
  const ExactScalar gamma = S("(sqrt5-1)/2");
  const TargetSet a = TargetSet::intervals(kT1, {{0, gamma}});
  const auto sched = make_schedule(below_sequence(gamma, 4), 0, 1);
  std::mt19937_64 rng(21);
  const GroupPoint g = kT1.random_point(rng);
  for (const Schedule& s : sched) {
    const Stage stage(a, g, s);
    std::size_t checked = 0;
    for (std::uint64_t i = 0; i < 2000 && checked < 50; ++i) {
      const GroupPoint x = kT1.grid_point(2000, i);
      if (!stage.hx_heavy(x)) continue;
      ++checked;
      for (int t = 0; t < 4; ++t) {
        const ExactScalar shift =
            ExactScalar(s.eps) * ExactScalar(Rational(static_cast<long long>(rng() % 201) - 100, 100));
        const GroupPoint y = kT1.translate(x, t1(shift.mod1()));
        ASSERT_LE(kT1.distance(x, y), ExactScalar(s.eps));
        EXPECT_TRUE(stage.hy_heavy(y));
        EXPECT_TRUE(h_y_verdict(y, g, a, s).heavy);
      }
    }
  }
}

TEST(HY, PartialSumsAreDiscrete) {
  const ExactScalar gamma = S("(sqrt5-1)/2");
  const TargetSet a = TargetSet::intervals(kT1, {{0, gamma}});
  const auto sched = make_schedule(below_sequence(gamma, 3), 0, 1);
  const Schedule& s = sched.back();
  const TargetSet dilated = a.dilate(ExactScalar(s.eps));
  const DeficitTrace t = deficit_trace(t1(S("1/3")), t1(S("sqrt2-1")), dilated, ExactScalar(s.level),
                                       s.horizon(), Variant::Y);
  for (const ExactScalar& v : t.sums) {
    ASSERT_TRUE(v.is_rational());
    EXPECT_EQ(denominator_of(v.as_rational() * Rational(s.q)), 1);
  }
}

TEST(HY, RationalMeasureSumsAreDiscrete) {
  const TargetSet quarter = TargetSet::intervals(kT1, {{0, S("1/4")}, {S("1/2"), S("3/4")}});
  const DeficitTrace t = deficit_trace(kT1.zero(), t1(S("sqrt3/5")), quarter, quarter.measure(), 300);
  for (const ExactScalar& v : t.sums) EXPECT_EQ(denominator_of(v.as_rational() * 2), 1);
}

TEST(MeasureEstimate, Examples) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  EXPECT_EQ(measure_estimate([&](const GroupPoint& x) { return half.contains(x); }, kT1, 1000),
            Rational(501, 1000));
  EXPECT_EQ(measure_estimate([](const GroupPoint&) { return false; }, kT1, 1000), 0);
  const GroupSpace z2 = GroupSpace::padic(2, 8);
  const TargetSet even = TargetSet::padic_balls(z2, {{0, 1}});
  EXPECT_EQ(measure_estimate([&](const GroupPoint& x) { return even.contains(x); }, z2, 16),
            Rational(1, 2));
  EXPECT_THROW((void)measure_estimate([](const GroupPoint&) { return true; }, GroupSpace::torus(2),
                                      100000, 1000),
               ResourceCap);
}

TEST(Nesting, HeavySetsShrinkWithHorizon) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const GroupPoint g = t1(S("sqrt2-1"));
  const OrbitEngine engine(half, g);
  const LevelComparator level(S("1/2"));
  for (std::uint64_t i = 0; i < 300; ++i) {
    const GroupPoint x = kT1.grid_point(300, i);
    for (std::size_t n : {1, 5, 30, 100}) {
      const bool later = !engine.first_failure(x, n + 1, level).has_value();
      const bool earlier = !engine.first_failure(x, n, level).has_value();
      if (later) EXPECT_TRUE(earlier) << i << " n=" << n;
    }
  }
}

TEST(Counting, JBoundedByDistinctSums) {
  const ExactScalar gamma = S("(sqrt5-1)/2");
  const TargetSet a = TargetSet::intervals(kT1, {{0, gamma}});
  const auto sched = make_schedule(below_sequence(gamma, 3), 0, 1);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const GroupPoint x = kT1.random_point(rng);
    const GroupPoint g = kT1.random_point(rng);
    const Stage stage(a, g, sched.back());
    const DistinctSums d = stage.distinct_sums(x);
    EXPECT_TRUE(d.separated);
    EXPECT_LE(stage.j_count(x), d.count);
    EXPECT_EQ(stage.j_count(x), j_count(x, g, a, sched.back()));
  }
}

TEST(Counting, IdentityOnGrid) {
  const ExactScalar gamma = S("(sqrt5-1)/2");
  const TargetSet a = TargetSet::intervals(kT1, {{0, gamma}});
  const auto sched = make_schedule(below_sequence(gamma, 3), 0, 1);
  const std::uint64_t r = 400;
  const GroupPoint g = kT1.grid_point(r, 163);
  for (const Schedule& s : sched) {
    const Stage stage(a, g, s);
    std::uint64_t total_j = 0;
    std::uint64_t heavy = 0;
    for (std::uint64_t i = 0; i < r; ++i) {
      const GroupPoint x = kT1.grid_point(r, i);
      total_j += stage.j_count(x);
      heavy += stage.hy_heavy(x) ? 1 : 0;
    }
    EXPECT_EQ(Rational(Integer(total_j), Integer(r) * s.n), Rational(Integer(heavy), Integer(r)));
  }
}

TEST(DistinctSums, Examples) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  // Every orbit point stays in A_eps: strictly increasing sums.
  const Schedule s = manual_schedule(1, 3, 100, Rational(1, 100));
  EXPECT_EQ(distinct_sums(kT1.zero(), t1(S("1/1000")), half, s).count, 100u);

  const GroupSpace z2 = GroupSpace::padic(2, 8);
  const TargetSet even = TargetSet::padic_balls(z2, {{0, 1}});
  const Schedule alt = manual_schedule(1, 2, 6, Rational(1, 64));
  const DistinctSums d = distinct_sums(z2.zero(), z2.padic_point(1), even, alt);
  EXPECT_EQ(d.count, 2u);
  EXPECT_TRUE(d.separated);
}

TEST(Loeve, TrivialCases) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const LoeveResult one = loeve_check(half, std::nullopt, 1, 200, 5);
  EXPECT_DOUBLE_EQ(one.rhs, 1.0);
  EXPECT_LE(one.lhs, 1.0);
  EXPECT_TRUE(one.pass);

  const LoeveResult whole = loeve_check(TargetSet::whole(kT1), std::nullopt, 64, 50, 5);
  EXPECT_EQ(whole.lhs, 0.0);
  EXPECT_TRUE(whole.pass);
}

TEST(Loeve, GoldenInterval) {
  const TargetSet golden = TargetSet::intervals(kT1, {{0, S("(sqrt5-1)/2")}});
  const LoeveResult r = loeve_check(golden, std::nullopt, 1024, 1000, 77);
  EXPECT_TRUE(r.pass) << r.lhs << " vs " << r.rhs;
  const LoeveResult again = loeve_check(golden, std::nullopt, 1024, 1000, 77);
  EXPECT_EQ(r.lhs, again.lhs);
}

TEST(Orthogonality, Cases) {
  const TargetSet half = TargetSet::intervals(kT1, {{0, S("1/2")}});
  const Schedule s = manual_schedule(1, 3, 64, Rational(1, 8));
  const OrthogonalityResult r = orthogonality_check(half, s, {{0, 1}}, 10000, 3);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_abs, 0.02);

  const OrthogonalityResult z = orthogonality_check(TargetSet::whole(kT1), s, {{0, 1}, {2, 7}}, 100, 3);
  EXPECT_EQ(z.max_abs, 0.0);
  EXPECT_THROW((void)orthogonality_check(half, s, {{3, 3}}, 100, 3), DomainError);
}

TEST(Multiple, MatchesRepeatedTranslation) {
  const GroupPoint g = t1(S("sqrt2-1"));
  GroupPoint acc = kT1.zero();
  for (int m = 0; m < 20; ++m) {
    EXPECT_EQ(multiple(kT1, g, m), acc);
    acc = kT1.translate(acc, g);
  }
  const GroupSpace z3 = GroupSpace::padic(3, 5);
  EXPECT_EQ(multiple(z3, z3.padic_point(100), 7), z3.padic_point(700));
}
