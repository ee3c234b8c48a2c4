#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fdpenv/simulation.hpp"
#include "test_support.hpp"

using namespace fdpenv;
using namespace fdpenv::sim;

namespace {

// Test-side BH ratio: FDP of the BH rejection set at level q, divided by q.
double bh_ratio_oracle(const std::vector<double>& p, const TruthMask& truth, double q) {
  const std::size_t n = p.size();
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(n)) k_star = k;
  }
  if (k_star == 0) return 0.0;
  const double cutoff = sorted[k_star - 1];
  std::size_t rejected = 0, nulls = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] <= cutoff) {
      ++rejected;
      nulls += truth.is_null[i] != 0 ? 1 : 0;
    }
  }
  return static_cast<double>(nulls) / static_cast<double>(rejected) / q;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  c.n = 0;
  EXPECT_ERRC(validate(c), Errc::ConfigInvalid);
  c = {};
  c.n_nonnull = c.n + 1;
  EXPECT_ERRC(validate(c), Errc::ConfigInvalid);
  c = {};
  c.rho = 1.0;
  EXPECT_ERRC(validate(c), Errc::ConfigInvalid);
  c = {};
  c.reps = 0;
  EXPECT_ERRC(validate(c), Errc::ConfigInvalid);
}

TEST(SimSettings, NamesRoundTrip) {
  for (Setting s : {Setting::Sort, Setting::PreorderAcc, Setting::PreorderSel, Setting::Knockoff,
                    Setting::OnlineSimple, Setting::OnlineAdaptive}) {
    EXPECT_EQ(parse_setting(to_string(s)), s);
  }
  EXPECT_ERRC(parse_setting("nope"), Errc::ConfigInvalid);
}

TEST(Generators, GaussianDeterministic) {
  SimConfig c;
  c.n = 500;
  c.n_nonnull = 50;
  c.mu = 2.0;
  const auto a = gen_gaussian_pvalues(c);
  const auto b = gen_gaussian_pvalues(c);
  EXPECT_EQ(a.p, b.p);
  c.seed = 2;
  EXPECT_NE(gen_gaussian_pvalues(c).p, a.p);
  EXPECT_EQ(std::count(a.truth.is_null.begin(), a.truth.is_null.end(), 0), 50);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_EQ(a.truth.is_null[j], 0);
}

TEST(Generators, Ar1AtZeroMatchesGaussian) {
  SimConfig c;
  c.n = 1000;
  c.n_nonnull = 100;
  c.mu = 3.0;
  c.rho = 0.0;
  EXPECT_EQ(gen_ar1_pvalues(c).p, gen_gaussian_pvalues(c).p);
}

TEST(Generators, NullPValuesPassKolmogorovSmirnov) {
  SimConfig c;
  c.n = 100000;
  c.seed = 11;
  std::vector<double> p = gen_gaussian_pvalues(c).p;
  std::sort(p.begin(), p.end());
  const auto n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - p[i], p[i] - static_cast<double>(i) / n));
  }
  // 0.01 critical value of the one-sample KS statistic.
  EXPECT_LT(d, 1.63 / std::sqrt(n));
}

TEST(Generators, Ar1LagOneCorrelation) {
  for (double rho : {-0.5, 0.0, 0.5, 0.9}) {
    SimConfig c;
    c.n = 100000;
    c.rho = rho;
    RandomStream rng(21, 0);
    const std::vector<double> x = ar1_statistics(c, rng);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      den += (x[j] - mean) * (x[j] - mean);
      if (j > 0) num += (x[j] - mean) * (x[j - 1] - mean);
    }
    EXPECT_NEAR(num / den, rho, 0.01) << "rho=" << rho;
  }
}

TEST(Generators, Ar1MarginalVariance) {
  SimConfig c;
  c.n = 1000000;
  c.rho = 0.9;
  RandomStream rng(22, 0);
  const std::vector<double> x = ar1_statistics(c, rng);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(ss / static_cast<double>(x.size()), 1.0, 0.02);
}

TEST(Generators, ExponentialOrderingFavoursEarlyPositions) {
  SimConfig c;
  c.n = 2500;
  c.n_nonnull = 100;
  c.ordering_theta = 55.0;
  double total = 0.0;
  std::size_t count = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    RandomStream rng(c.seed, r);
    const GeneratedOrdering g = gen_exponential_ordering(c, rng);
    ASSERT_EQ(g.pi, identity_permutation(c.n));
    ASSERT_EQ(std::count(g.nonnull.begin(), g.nonnull.end(), 1), 100);
    for (std::size_t j = 0; j < c.n; ++j) {
      if (g.nonnull[j] != 0) {
        total += static_cast<double>(j);
        ++count;
      }
    }
  }
  EXPECT_LT(total / static_cast<double>(count), static_cast<double>(c.n) / 2.0);
  // Expected position under exp(-55 j / n) is about n / 55.
  EXPECT_LT(total / static_cast<double>(count), 0.05 * static_cast<double>(c.n));
}

TEST(Generators, ExponentialOrderingAllNonNull) {
  SimConfig c;
  c.n = 300;
  c.n_nonnull = 300;
  c.ordering_theta = 55.0;
  const GeneratedOrdering g = gen_exponential_ordering(c);
  EXPECT_EQ(std::count(g.nonnull.begin(), g.nonnull.end(), 1), 300);
}

TEST(Generators, ExponentialOrderingUniformAtZeroTilt) {
  SimConfig c;
  c.n = 1000;
  c.n_nonnull = 10;
  c.ordering_theta = 0.0;
  double total = 0.0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(5, static_cast<std::uint64_t>(r));
    const GeneratedOrdering g = gen_exponential_ordering(c, rng);
    for (std::size_t j = 0; j < c.n; ++j) total += g.nonnull[j] != 0 ? static_cast<double>(j) : 0.0;
  }
  const double mean = total / (reps * 10.0);
  const double se = std::sqrt((c.n * c.n / 12.0) / (reps * 10.0));
  EXPECT_NEAR(mean, (c.n - 1) / 2.0, 4.0 * se);
}

TEST(SimulateTrial, EverySettingProducesConsistentShapes) {
  SimConfig c;
  c.n = 200;
  c.n_nonnull = 20;
  c.mu = 2.5;
  c.ordering_theta = 20.0;
  for (Setting s : {Setting::Sort, Setting::PreorderAcc, Setting::PreorderSel, Setting::Knockoff,
                    Setting::OnlineSimple, Setting::OnlineAdaptive}) {
    RandomStream rng(1, 0);
    const SimTrial t = simulate_trial(s, c, SettingParams{}, rng);
    EXPECT_EQ(t.vhat.values.size(), t.path.steps()) << to_string(s);
    EXPECT_EQ(t.truth.is_null.size(), t.path.n) << to_string(s);
    const BoundConstant k = setting_constant(s, 0.1, 1.0, SettingParams{});
    EXPECT_NO_THROW(compute_envelope(t.path, t.vhat, k)) << to_string(s);
  }
}

TEST(SupRatio, HandExample) {
  Path path;
  path.kind = PathKind::Preordered;
  path.n = 3;
  path.ordering = {0, 1, 2};
  path.include = {1, 1, 1};
  path.sizes = {1, 2, 3};
  path.rejection_order = {0, 1, 2};
  EnvelopeCurve env;
  env.records = {make_record(0, 0, 0, 0), make_record(1, 1, 0, 0), make_record(2, 2, 0, 1), make_record(3, 3, 0, 5)};
  TruthMask truth{{0, 1, 1}};
  // k=1: V=0 -> skipped. k=2: V=1, min(2,1)=1 -> 1. k=3: V=2, min(3,5)=3 -> 2/3.
  SupRatio r = sup_ratio(path, env, truth);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_FALSE(r.violated);
  env.records[2] = make_record(2, 2, 0, 0);
  r = sup_ratio(path, env, truth);
  EXPECT_TRUE(std::isinf(r.ratio));
  EXPECT_TRUE(r.violated);
}

TEST(EmpiricalQuantile, OrderStatistic) {
  std::vector<double> v{5, 1, 4, 2, 3};
  EXPECT_EQ(empirical_quantile(v, 0.9), 5.0);
  EXPECT_EQ(empirical_quantile(v, 0.8), 4.0);
  EXPECT_EQ(empirical_quantile(v, 0.5), 3.0);
  EXPECT_EQ(empirical_quantile(v, 0.0), 1.0);
  EXPECT_ERRC(empirical_quantile({}, 0.5), Errc::EmptyInput);
}

TEST(Coverage, DeterministicAcrossThreadCounts) {
  SimConfig c;
  c.n = 300;
  c.n_nonnull = 30;
  c.mu = 2.0;
  c.reps = 60;
  c.threads = 1;
  const CoverageResult one = coverage_experiment(Setting::Sort, c, 0.1, 1.0);
  c.threads = 3;
  const CoverageResult three = coverage_experiment(Setting::Sort, c, 0.1, 1.0);
  EXPECT_EQ(one.sup_ratios, three.sup_ratios);
  EXPECT_EQ(one.violations, three.violations);
}

TEST(Coverage, SmallRunsStayWithinBinomialBand) {
  SimConfig c;
  c.n = 400;
  c.n_nonnull = 40;
  c.mu = 2.5;
  c.reps = 400;
  c.ordering_theta = 20.0;
  const double alpha = 0.1;
  for (Setting s : {Setting::Sort, Setting::PreorderSel, Setting::Knockoff, Setting::OnlineSimple}) {
    const CoverageResult r = coverage_experiment(s, c, alpha, 1.0);
    EXPECT_LE(r.violation_rate, alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / 400.0)) << to_string(s);
    EXPECT_LE(r.max_ratio_quantile, 1.0) << to_string(s);
  }
}

TEST(CorrelationSweep, OneCellPerRho) {
  SimConfig c;
  c.n = 200;
  c.n_nonnull = 20;
  c.mu = 2.0;
  c.reps = 50;
  const std::vector<double> rhos{-0.5, 0.0, 0.5};
  const auto cells = correlation_sweep(rhos, c, 0.1, 1.0);
  ASSERT_EQ(cells.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(cells[i].rho, rhos[i]);
}

TEST(RunBh, SmallExamples) {
  const std::vector<double> p{0.01, 0.02, 0.5, 0.9};
  // Thresholds at q=0.1: 0.025, 0.05, 0.075, 0.1.
  EXPECT_EQ(run_bh(p, 0.1), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(run_bh(std::vector<double>{1.0, 1.0, 1.0}, 0.5).empty());
  EXPECT_EQ(run_bh(std::vector<double>{1.0, 1.0}, 1.0).size(), 2u);
  // Step-up: p_(2) passes even though p_(1) alone does not.
  EXPECT_EQ(run_bh(std::vector<double>{0.07, 0.06}, 0.1), (std::vector<std::size_t>{1, 0}));
}

TEST(BhOvershoot, MatchesBruteForceOverBreakpoints) {
  std::mt19937_64 gen(91);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = testgen::size_between(gen, 1, 60);
    std::vector<double> p = testgen::uniform_pvalues(gen, n);
    TruthMask truth{std::vector<char>(n, 1)};
    for (std::size_t i = 0; i < n; ++i) {
      if (gen() % 3 == 0) {
        truth.is_null[i] = 0;
        p[i] *= 0.01;
      }
    }
    for (double q_min : {0.01, 0.05, 0.2}) {
      // FDP_BH(q)/q decreases between breakpoints, so the supremum sits at q_min
      // or at the right limit of some q = n p_(k) / k inside the range. The
      // oracle evaluates just above t so rounding cannot drop step k.
      std::vector<double> sorted = p;
      std::sort(sorted.begin(), sorted.end());
      double expected = bh_ratio_oracle(p, truth, q_min);
      for (std::size_t k = 1; k <= n; ++k) {
        const double t = static_cast<double>(n) * sorted[k - 1] / static_cast<double>(k);
        if (t > q_min && t <= 1.0) {
          const double above = t * (1.0 + 1e-13);
          expected = std::max(expected, bh_ratio_oracle(p, truth, above) * above / t);
        }
      }
      const double got = bh_max_overshoot(p, truth, q_min);
      EXPECT_NEAR(got, expected, 1e-9 * std::max(1.0, expected));
      // A dense grid can only under-estimate the supremum.
      for (int g = 0; g <= 400; ++g) {
        const double q = q_min + (1.0 - q_min) * g / 400.0;
        EXPECT_LE(bh_ratio_oracle(p, truth, q), got + 1e-9);
      }
    }
  }
}

TEST(BhOvershoot, DiscreteSetBelowRange) {
  SimConfig c;
  c.n = 500;
  c.n_nonnull = 50;
  c.mu = 3.0;
  c.reps = 30;
  const std::vector<double> grid{0.01, 0.05, 0.2};
  const std::vector<double> qset{0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
  const BhOvershootResult r = bh_overshoot_experiment(c, grid, qset);
  ASSERT_EQ(r.per_trial.size(), c.reps);
  for (std::size_t t = 0; t < c.reps; ++t) {
    EXPECT_LE(r.per_trial_q_set[t], r.per_trial[t][0] + 1e-12);
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LE(r.per_trial[t][i], r.per_trial[t][i - 1] + 1e-12);
  }
  for (std::size_t i = 1; i < r.cells.size(); ++i) EXPECT_LE(r.cells[i].mean, r.cells[i - 1].mean + 1e-12);
}

TEST(PoissonCheck, SingleObservationNeverHits) {
  // n = 1: U <= (1 - x) / x < 0 is impossible.
  const PoissonCheck r = poisson_hitting_check(1, 1.5, 2000, 3, 1);
  EXPECT_EQ(r.p_empirical, 0.0);
}

TEST(PoissonCheck, TwoObservations) {
  // Only k = 2 can hit: U_(2) <= (2 - 1.5) / (1.5 * 2) = 1/6, probability 1/36.
  const std::size_t reps = 100000;
  const PoissonCheck r = poisson_hitting_check(2, 1.5, reps, 4, 1);
  const double p = 1.0 / 36.0;
  EXPECT_NEAR(r.p_empirical, p, 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(PoissonCheck, LargeXIsRare) {
  const PoissonCheck r = poisson_hitting_check(10, 20.0, 5000, 5, 1);
  EXPECT_EQ(r.p_empirical, 0.0);
  EXPECT_LT(r.p_bound, 1e-6);
}

TEST(PoissonCheck, RejectsBadArguments) {
  EXPECT_ERRC(poisson_hitting_check(0, 1.5, 10, 1), Errc::ConfigInvalid);
  EXPECT_ERRC(poisson_hitting_check(5, 1.0, 10, 1), Errc::DomainError);
}

TEST(PointwiseQuantile, GlobalNullHasUnitFdp) {
  SimConfig c;
  c.n = 100;
  c.reps = 50;
  const auto q = pointwise_fdp_quantile(Setting::Sort, c, 0.1, 1.0);
  ASSERT_FALSE(q.empty());
  for (const PointwiseQuantile& row : q) {
    if (row.k == 0) continue;
    EXPECT_EQ(row.fdp_quantile, 1.0);
    EXPECT_GE(row.mean_fdp_bar, 0.0);
    EXPECT_LE(row.mean_fdp_bar, 1.0);
  }
}

TEST(PointwiseQuantile, EnvelopeAboveQuantileWithSignal) {
  SimConfig c;
  c.n = 500;
  c.n_nonnull = 100;
  c.mu = 3.0;
  c.reps = 200;
  const auto q = pointwise_fdp_quantile(Setting::Sort, c, 0.1, 1.0);
  for (const PointwiseQuantile& row : q) EXPECT_LE(row.fdp_quantile, row.mean_fdp_bar + 1e-12) << "k=" << row.k;
}
