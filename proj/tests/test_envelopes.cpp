#include <cmath>

#include "fdpenv/envelopes.hpp"
#include "test_support.hpp"

using namespace fdpenv;

namespace {

std::vector<std::int64_t> vbars(const EnvelopeCurve& curve) {
  std::vector<std::int64_t> out;
  for (const EnvelopeRecord& r : curve.records) out.push_back(r.v_bar);
  return out;
}

}  // namespace

TEST(Envelope, KnockoffHandComputed) {
  const PathWithVhat built = build_knockoff_path({{}, {5.0, 4.0, -3.0, 2.0, -1.0}});
  const EnvelopeCurve curve = compute_envelope(built.path, built.vhat, constant_knockoff(0.05, 1.0));
  ASSERT_EQ(curve.records.size(), 6u);
  EXPECT_EQ(vbars(curve), (std::vector<std::int64_t>{4, 4, 4, 8, 8, 13}));
  const std::vector<std::size_t> sizes{0, 1, 2, 2, 3, 3};
  for (std::size_t k = 0; k <= 5; ++k) {
    EXPECT_EQ(curve.records[k].k, k);
    EXPECT_EQ(curve.records[k].size, sizes[k]);
    EXPECT_EQ(curve.records[k].fdp_bar, k == 0 ? 0.0 : 1.0);
  }
  EXPECT_DOUBLE_EQ(curve.records[4].fdp_bar_raw, 8.0 / 3.0);
  EXPECT_EQ(curve.meta.family, "knockoff");
}

TEST(Envelope, OnlineSimpleHandComputed) {
  const std::vector<double> p{0.01, 0.2, 0.04};
  const std::vector<double> alphas(3, 0.05);
  const EnvelopeCurve curve =
      compute_envelope(build_online_path(p, alphas), vhat_online_simple(alphas), constant_online_simple(0.1, 1.0));
  const EnvelopeRecord& last = curve.records.back();
  EXPECT_EQ(last.size, 2u);
  EXPECT_NEAR(last.v_hat, 0.15, 1e-15);
  EXPECT_EQ(last.v_bar, 2);
  EXPECT_EQ(last.fdp_bar, 1.0);
}

TEST(Envelope, EmptySetConvention) {
  const PathWithVhat built = build_sorted_path(std::vector<double>{0.3, 0.7});
  const EnvelopeCurve curve = compute_envelope(built.path, built.vhat, constant_sort(0.1));
  EXPECT_EQ(curve.records[0].size, 0u);
  EXPECT_EQ(curve.records[0].fdp_bar, 0.0);
  EXPECT_EQ(curve.records[0].fdp_bar_raw, 0.0);
  EXPECT_EQ(curve.records[0].v_bar, 1);  // floor(1.927 * (1 + 0))
}

TEST(Envelope, FloorGuardKeepsExactIntegers) {
  // 0.1 * 3 is 0.30000000000000004 and 0.7 * 10 is 7.000000000000001; products
  // that should land on integers must not fall below them.
  EXPECT_EQ(envelope_vbar(10.0, 0.0, 0.3), 3);
  EXPECT_EQ(envelope_vbar(3.0, 1.0, 1.0 / 3.0 * 3.0 - 1.0), 3);
  EXPECT_EQ(envelope_vbar(1.0 / 0.1, 0.0, 0.7), 7);
  EXPECT_EQ(envelope_vbar(2.5, 1.0, 0.6), 4);
}

TEST(Envelope, FamilyMismatchIsRejected) {
  const std::vector<double> p{0.1, 0.6, 0.3};
  const std::vector<std::size_t> pi = identity_permutation(3);
  const PathWithVhat sorted = build_sorted_path(p);
  EXPECT_ERRC(compute_envelope(sorted.path, sorted.vhat, constant_sel(0.1, 1.0, 1.0)), Errc::FamilyMismatch);

  const Path sel_path = build_preordered_path(p, pi, 0.5);
  const VhatSeries sel = vhat_sel(p, pi, 0.5, 0.6);  // B = 1.25
  EXPECT_ERRC(compute_envelope(sel_path, sel, constant_knockoff(0.1, 1.0)), Errc::FamilyMismatch);
  EXPECT_ERRC(compute_envelope(sel_path, sel, constant_sel(0.1, 1.0, 1.0)), Errc::FamilyMismatch);
  EXPECT_ERRC(compute_envelope(sel_path, sel, constant_sort(0.1)), Errc::FamilyMismatch);
  EXPECT_NO_THROW(compute_envelope(sel_path, sel, constant_sel(0.1, 1.0, 1.25)));
  EXPECT_NO_THROW(compute_envelope(sel_path, vhat_sel(p, pi, 0.5, 0.5), constant_knockoff(0.1, 1.0)));

  const Path acc_path = build_preordered_path(p, pi, 1.0);
  const VhatSeries acc = vhat_acc(p, pi, AccumulationFn::seq_step(0.5));
  EXPECT_ERRC(compute_envelope(acc_path, acc, constant_preorder_acc_bounded(0.1, 1.0, 1.5)), Errc::FamilyMismatch);
  EXPECT_NO_THROW(compute_envelope(acc_path, acc, constant_preorder_acc_bounded(0.1, 1.0, 2.0)));
  EXPECT_NO_THROW(compute_envelope(acc_path, acc, constant_preorder_acc_general(0.1, 1.0, AccumulationFn::seq_step(0.5))));
  const VhatSeries fs = vhat_acc(p, pi, AccumulationFn::forward_stop());
  EXPECT_ERRC(compute_envelope(acc_path, fs, constant_preorder_acc_bounded(0.1, 1.0, 100.0)), Errc::FamilyMismatch);

  const std::vector<double> alphas{0.1, 0.2, 0.1};
  const std::vector<double> lambdas{0.5, 0.5, 0.5};
  const Path online = build_online_path(p, alphas);
  const VhatSeries adaptive = vhat_online_adaptive(p, alphas, lambdas);  // b_seen = 0.4
  EXPECT_ERRC(compute_envelope(online, adaptive, constant_online_adaptive(0.1, 1.0, 0.3)), Errc::FamilyMismatch);
  EXPECT_NO_THROW(compute_envelope(online, adaptive, constant_online_adaptive(0.1, 1.0, 0.4)));
  EXPECT_ERRC(compute_envelope(online, vhat_online_simple(alphas), constant_sort(0.1)), Errc::FamilyMismatch);
}

TEST(Envelope, LengthMismatch) {
  const std::vector<double> p{0.1, 0.6, 0.3};
  const Path path = build_preordered_path(p, identity_permutation(3), 0.5);
  VhatSeries v = vhat_sel(p, identity_permutation(3), 0.5, 0.5);
  v.values.pop_back();
  EXPECT_ERRC(compute_envelope(path, v, constant_sel(0.1, 1.0, 1.0)), Errc::LengthMismatch);
}

TEST(Robbins, HandValues) {
  std::vector<double> p(2500, 0.5);
  p[0] = 0.0;
  p[1] = 0.004;
  p[2] = 1.0;
  const EnvelopeCurve curve = robbins_envelope(p, 0.1);
  EXPECT_EQ(curve.records[1].v_bar, 0);
  EXPECT_EQ(curve.records[2].v_bar, 100);
  EXPECT_EQ(curve.records.back().v_bar, 25000);
  EXPECT_EQ(curve.records.back().fdp_bar, 1.0);
  EXPECT_DOUBLE_EQ(curve.meta.c, 10.0);
}

TEST(Dkw, HandValues) {
  std::vector<double> p(2500, 0.5);
  p[0] = 0.0;
  EXPECT_EQ(dkw_envelope(p, 0.1).records[1].v_bar, 53);
  EXPECT_EQ(dkw_envelope(std::vector<double>{1.0, 1.0}, 0.1).records[2].v_bar, 3);
  EXPECT_ERRC(dkw_envelope(p, 0.6), Errc::AlphaTooLargeForDkw);
  EXPECT_ERRC(dkw_envelope(p, 0.5), Errc::AlphaTooLargeForDkw);
}

TEST(TrueFdp, Conventions) {
  const std::vector<double> p{0.1, 0.9, 0.1};
  const Path path = build_preordered_path(p, identity_permutation(3), 0.5);
  const std::vector<double> fdp = true_fdp_curve(path, {{0, 0, 1}});
  EXPECT_EQ(fdp, (std::vector<double>{0.0, 0.0, 0.0, 0.5}));
  const std::vector<double> all_null = true_fdp_curve(path, {{1, 1, 1}});
  EXPECT_EQ(all_null, (std::vector<double>{0.0, 1.0, 1.0, 1.0}));
  EXPECT_ERRC(true_fdp_curve(path, {{1}}), Errc::LengthMismatch);
}

TEST(RobbinsCrossover, SolvesTheUnflooredComparison) {
  const double x = robbins_crossover(0.1);
  const double c = constant_sort(0.1).c;
  // At V_Robbins = x: c (1 + nt) = 10 nt with nt = x / 10.
  EXPECT_NEAR(c * (1.0 + x / 10.0), x, 1e-12);
  EXPECT_NEAR(x, 2.387466661750, 1e-9);
  for (double v = 0.5; v < 10.0; v += 0.01) {
    const double nt = v / 10.0;
    EXPECT_EQ(c * (1.0 + nt) < v, v > x) << v;
  }
}

// Properties over random preordered selective paths: the floor identity, a
// nondecreasing v_bar, and clamping bounded by the raw ratio.
TEST(EnvelopeProperties, FloorMonotoneClamp) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = testgen::size_between(gen, 1, 100);
    const std::vector<double> p = testgen::uniform_pvalues(gen, n);
    const std::vector<std::size_t> pi = testgen::random_permutation(gen, n);
    const double p_star = 0.05 + 0.9 * u(gen);
    const double lambda = p_star + (0.99 - p_star) * u(gen);
    const double alpha = 0.01 + 0.29 * u(gen);
    const double a = 0.5 + 2.0 * u(gen);
    const BoundConstant c = constant_sel(alpha, a, p_star / (1.0 - lambda));
    const EnvelopeCurve curve = compute_envelope(build_preordered_path(p, pi, p_star), vhat_sel(p, pi, p_star, lambda), c);
    for (std::size_t k = 0; k < curve.records.size(); ++k) {
      const EnvelopeRecord& r = curve.records[k];
      EXPECT_EQ(r.v_bar, static_cast<std::int64_t>(std::floor(c.c * (a + r.v_hat) + kFloorGuard)));
      EXPECT_LE(r.fdp_bar, r.fdp_bar_raw);
      EXPECT_GE(r.fdp_bar, 0.0);
      EXPECT_LE(r.fdp_bar, 1.0);
      if (k > 0) EXPECT_GE(r.v_bar, curve.records[k - 1].v_bar);
    }
  }
}
