#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

#include "regimecast/hypothesis.hpp"
#include "regimecast/random.hpp"
#include "regimecast/special.hpp"

using namespace regimecast;
using namespace regimecast::hypothesis;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n, double mu, double sd) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(mu, sd);
  return v;
}

}  // namespace

TEST(TTest, IdenticalSamplesGiveHalf) {
  const std::vector<double> a{3, 1, 4, 1, 5};
  const auto r = t_test_greater(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 0.5, 1e-15);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(r.df, 8.0);
}

TEST(TTest, WrongDirectionGivesPNearOne) {
  const std::vector<double> a{1, 2, 3}, b{11, 12, 13};
  const auto r = t_test_greater(a, b);
  EXPECT_LT(r.statistic, 0.0);
  EXPECT_NEAR(r.statistic, -10.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_GT(r.p_value, 0.999);
  EXPECT_NEAR(r.p_value, boost::math::cdf(boost::math::students_t(4.0), -r.statistic), 1e-12);
}

TEST(TTest, ZeroPooledVariance) {
  const std::vector<double> a{2, 2, 2}, b{2, 2}, c{1, 1};
  EXPECT_EQ(t_test_greater(a, b).p_value, 0.5);
  EXPECT_EQ(t_test_greater(a, c).p_value, 0.0);
  EXPECT_EQ(t_test_greater(c, a).p_value, 1.0);
  EXPECT_THROW(t_test_greater(std::vector<double>{1}, a), Error);
}

TEST(TTest, SickRowMirror) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto p1 = draw(rng, 442, 31.78, std::sqrt(31.78));
    const auto p3 = draw(rng, 233, 14.79, std::sqrt(14.79));
    hits += t_test_greater(p1, p3).p_value < 1e-4;
  }
  EXPECT_GE(hits, 198);
}

TEST(TTest, AntisymmetryAndComplement) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto a = draw(rng, 15, 1.0, 2.0), b = draw(rng, 22, 0.5, 1.0);
    for (bool welch : {false, true}) {
      const auto ab = t_test_greater(a, b, 0.05, welch), ba = t_test_greater(b, a, 0.05, welch);
      EXPECT_DOUBLE_EQ(ab.statistic, -ba.statistic);
      EXPECT_NEAR(ab.p_value + ba.p_value, 1.0, 1e-10);
    }
  }
}

TEST(TTest, LocationAndScaleInvariance) {
  Rng rng(8);
  const auto a = draw(rng, 30, 5, 2), b = draw(rng, 25, 4, 3);
  const auto base = t_test_greater(a, b);
  auto shift = [](std::vector<double> v, double c) {
    for (auto& x : v) x += c;
    return v;
  };
  auto scale = [](std::vector<double> v, double c) {
    for (auto& x : v) x *= c;
    return v;
  };
  const auto s = t_test_greater(shift(a, 3.0), shift(b, 3.0));
  EXPECT_NEAR(s.statistic, base.statistic, 1e-12);
  EXPECT_NEAR(s.p_value, base.p_value, 1e-12);
  const auto c = t_test_greater(scale(a, 4.0), scale(b, 4.0));
  EXPECT_NEAR(c.statistic, base.statistic, 1e-12);
  EXPECT_NEAR(c.p_value, base.p_value, 1e-12);
}

TEST(TTest, NullPValuesAreUniform) {
  std::vector<double> ps;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    Rng rng(derive_seed(55, seed));
    const auto a = draw(rng, 12, 0, 1), b = draw(rng, 9, 0, 1);
    ps.push_back(t_test_greater(a, b).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double d = 0;
  const double n = static_cast<double>(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - ps[i], ps[i] - static_cast<double>(i) / n});
  }
  EXPECT_LT(d, 0.05);
}

TEST(Special, TailsMatchBoost) {
  for (double df : {1.0, 2.5, 8.0, 30.0, 673.0}) {
    const boost::math::students_t dist(df);
    for (double t : {-40.0, -6.0, -1.3, -0.01, 0.0, 0.7, 2.0, 5.5, 12.0}) {
      const double ref = boost::math::cdf(boost::math::complement(dist, t));
      EXPECT_NEAR(special::student_t_upper(t, df), ref, 1e-10 * std::max(1.0, ref) + 1e-14) << df << " " << t;
      if (ref > 1e-300) EXPECT_NEAR(special::student_t_upper(t, df) / ref, 1.0, 1e-8) << df << " " << t;
    }
  }
  for (double d1 : {1.0, 2.0, 5.0}) {
    for (double d2 : {3.0, 6.0, 40.0, 1500.0}) {
      const boost::math::fisher_f dist(d1, d2);
      for (double f : {0.0, 0.2, 1.0, 3.0, 9.0, 60.0}) {
        const double ref = boost::math::cdf(boost::math::complement(dist, f));
        EXPECT_NEAR(special::f_upper(f, d1, d2), ref, 1e-10) << d1 << " " << d2 << " " << f;
      }
    }
  }
}

TEST(Bonferroni, Values) {
  EXPECT_NEAR(bonferroni(0.05, 22), 0.0022727272727, 1e-12);
  EXPECT_NEAR(bonferroni(0.05, 22), 0.002273, 5e-7);
  EXPECT_EQ(bonferroni(0.05, 1), 0.05);
  EXPECT_DOUBLE_EQ(bonferroni(0.01, 4), 0.0025);
  EXPECT_THROW(bonferroni(0.0, 3), Error);
  EXPECT_THROW(bonferroni(0.05, 0), Error);
}

TEST(Anova, HandComputedExample) {
  const auto r = anova_oneway({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  EXPECT_NEAR(r.statistic, 3.0, 1e-12);
  EXPECT_EQ(r.df, 2.0);
  EXPECT_EQ(*r.df2, 6.0);
  EXPECT_NEAR(r.p_value, boost::math::cdf(boost::math::complement(boost::math::fisher_f(2, 6), 3.0)), 1e-12);
}

TEST(Anova, EqualGroupsGiveZero) {
  const auto r = anova_oneway({{1, 2, 3}, {3, 2, 1}, {2, 1, 3}});
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-15);
}

TEST(Anova, NoVariationIsUndefined) {
  try {
    anova_oneway({{2, 2}, {2, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined);
  }
  EXPECT_THROW(anova_oneway({{1, 2}}), Error);
  EXPECT_THROW(anova_oneway({{1, 2}, {3}}), Error);
}

TEST(Anova, TwoGroupsFEqualsTSquared) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto a = draw(rng, 10 + i, 1, 1), b = draw(rng, 14, 1.4, 1);
    const auto t = two_sample_t(a, b);
    const auto f = anova_oneway({a, b});
    EXPECT_NEAR(f.statistic, t.t * t.t, 1e-10 * std::max(1.0, f.statistic));
    const double two_sided = 2.0 * special::student_t_upper(std::abs(t.t), t.df);
    EXPECT_NEAR(f.p_value, two_sided, 1e-10);
  }
}

TEST(Anova, SixHospitalsMirror) {
  const double means[] = {6.34, 7.41, 7.32, 7.53, 7.02, 6.79};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> groups;
    for (double m : means) groups.push_back(draw(rng, 300, m, 3.0));
    hits += anova_oneway(groups).p_value < 0.01;
  }
  EXPECT_GE(hits, 95);
}

TEST(MultiCompare, AlphaUsedAndOrdering) {
  Rng rng(1);
  std::map<std::string, SamplePair> family;
  for (int i = 0; i < 22; ++i) {
    family["p" + std::to_string(i)] = {draw(rng, 40, 10 + (i % 3), 2), draw(rng, 30, 10, 2)};
  }
  const auto rows = multi_compare(family, 0.05);
  ASSERT_EQ(rows.size(), 22u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].result);
    EXPECT_NEAR(rows[i].result->alpha_used, 0.05 / 22, 1e-15);
    if (i > 0) EXPECT_LE(rows[i - 1].result->p_value, rows[i].result->p_value);
  }
}

TEST(MultiCompare, SingleProblemIsPlainTest) {
  Rng rng(2);
  const auto a = draw(rng, 20, 1, 1), b = draw(rng, 20, 0.5, 1);
  const auto rows = multi_compare({{"x", {a, b}}}, 0.05);
  const auto plain = t_test_greater(a, b, 0.05);
  EXPECT_EQ(rows[0].result->p_value, plain.p_value);
  EXPECT_EQ(rows[0].result->alpha_used, 0.05);
}

TEST(MultiCompare, PartialErrorsKept) {
  const auto rows = multi_compare({{"bad", {{1.0}, {1.0, 2.0}}}, {"ok", {{5, 6, 7}, {1, 2, 3}}}}, 0.05);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].problem, "ok");
  EXPECT_FALSE(rows[1].result);
  EXPECT_FALSE(rows[1].error.empty());
}

TEST(MultiCompare, TwelveDropNineStable) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(7, seed));
    std::map<std::string, SamplePair> family;
    for (int i = 0; i < 21; ++i) {
      const double mu = 8.0 + 2.0 * i;
      const double mu3 = i < 12 ? 0.8 * mu : mu;
      char name[8];
      std::snprintf(name, sizeof name, "%c%02d", i < 12 ? 'd' : 's', i);
      family[name] = {draw(rng, 442, mu, std::sqrt(mu)), draw(rng, 233, mu3, std::sqrt(mu3))};
    }
    int drop_rejected = 0, stable_rejected = 0;
    for (const auto& r : multi_compare(family, 0.05)) {
      if (r.result->reject) (r.problem[0] == 'd' ? drop_rejected : stable_rejected)++;
    }
    good += drop_rejected >= 11 && stable_rejected <= 1;
  }
  EXPECT_GE(good, 95);
}
