#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fdpenv/bound_constants.hpp"
#include "fdpenv/envelopes.hpp"
#include "fdpenv/paths.hpp"
#include "fdpenv/rng.hpp"

namespace fdpenv::sim {

struct SimConfig {
  std::size_t n = 2500;
  std::size_t n_nonnull = 0;
  /// Mean shift of the non-null test statistics.
  double mu = 0.0;
  /// AR(1) correlation of the test statistics, in (-1, 1).
  double rho = 0.0;
  /// Rate of the exponential tilt placing non-nulls early in a preordered path.
  double ordering_theta = 0.0;
  std::uint64_t seed = 1;
  std::size_t reps = 1000;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Throws Error{ConfigInvalid}.
void validate(const SimConfig& config);

enum class Setting { Sort, PreorderAcc, PreorderSel, Knockoff, OnlineSimple, OnlineAdaptive };

std::string_view to_string(Setting setting) noexcept;
/// Accepts the names printed by to_string. Throws Error{ConfigInvalid}.
Setting parse_setting(std::string_view name);

/// Tuning of the individual settings.
struct SettingParams {
  /// SeqStep threshold of the accumulation function in PreorderAcc.
  double acc_lambda = 0.1;
  double p_star = 0.5;
  double lambda = 0.5;
  /// Constant level alpha_j of the online settings.
  double online_alpha = 0.05;
  /// lambda_j of OnlineAdaptive.
  double online_lambda = 0.5;
};

struct GeneratedPValues {
  std::vector<double> p;
  TruthMask truth;
};

/// p_j = 1 - Phi(X_j), X_j ~ N(mu_j, 1) independent; mu_j = mu on non-nulls.
/// Non-nulls are the first n_nonnull indices unless `nonnull` is given.
GeneratedPValues gen_gaussian_pvalues(const SimConfig& config, RandomStream& rng,
                                      std::span<const char> nonnull = {});
GeneratedPValues gen_gaussian_pvalues(const SimConfig& config);

/// Stationary AR(1) with unit marginal variance: X_1 ~ N(0, 1) and
/// X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j.
std::vector<double> ar1_statistics(const SimConfig& config, RandomStream& rng);

/// As gen_gaussian_pvalues but X follows a stationary unit-variance AR(1)
/// with correlation rho. Consumes the stream identically, so rho = 0
/// reproduces gen_gaussian_pvalues bit for bit.
GeneratedPValues gen_ar1_pvalues(const SimConfig& config, RandomStream& rng, std::span<const char> nonnull = {});
GeneratedPValues gen_ar1_pvalues(const SimConfig& config);

struct GeneratedOrdering {
  std::vector<std::size_t> pi;
  /// nonnull[j] marks position j as non-null.
  std::vector<char> nonnull;
};

/// Draws n_nonnull positions without replacement with P(j) proportional to
/// exp(-theta j / n), j = 1..n (Efraimidis-Spirakis keys). The ordering is the identity.
GeneratedOrdering gen_exponential_ordering(const SimConfig& config, RandomStream& rng);
GeneratedOrdering gen_exponential_ordering(const SimConfig& config);

/// One synthetic instance of a setting: path, estimate and ground truth.
struct SimTrial {
  Path path;
  VhatSeries vhat;
  TruthMask truth;
};

SimTrial simulate_trial(Setting setting, const SimConfig& config, const SettingParams& params, RandomStream& rng);

BoundConstant setting_constant(Setting setting, double alpha, double a, const SettingParams& params);

/// sup_k FDP(R_k) / FDPbar(R_k) with 0/0 = 0 and x/0 = inf for x > 0, and
/// whether FDP(R_k) > FDPbar(R_k) anywhere.
struct SupRatio {
  double ratio = 0.0;
  bool violated = false;
};
SupRatio sup_ratio(const Path& path, const EnvelopeCurve& envelope, const TruthMask& truth);

/// Empirical level-q quantile: the ceil(q m)-th smallest of m values.
double empirical_quantile(std::vector<double> values, double q);

struct CoverageResult {
  Setting setting = Setting::Sort;
  BoundConstant constant;
  std::size_t reps = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  /// 1 - alpha quantile of the per-trial sup ratio.
  double max_ratio_quantile = 0.0;
  std::vector<double> sup_ratios;
};

/// Trial r draws from RandomStream(seed, r).
CoverageResult coverage_experiment(Setting setting, const SimConfig& config, double alpha, double a,
                                   const SettingParams& params = {});

struct CorrelationCell {
  double rho = 0.0;
  double violation_rate = 0.0;
  double max_ratio_quantile = 0.0;
};

/// Sorted-setting coverage on AR(1) p-values for each rho.
std::vector<CorrelationCell> correlation_sweep(std::span<const double> rhos, const SimConfig& config, double alpha,
                                               double a);

/// Benjamini-Hochberg step-up at level q; returns 0-based indices sorted by p.
std::vector<std::size_t> run_bh(std::span<const double> p, double q);

struct BhOvershootCell {
  double q_min = 0.0;
  double mean = 0.0;
  double q90 = 0.0;
};

struct BhOvershootResult {
  std::vector<BhOvershootCell> cells;
  /// Statistic over the finite level set.
  double q_set_mean = 0.0;
  double q_set_q90 = 0.0;
  /// per_trial[r][i] is max_{q in [q_min_i, 1]} FDP_BH(q) / q for trial r.
  std::vector<std::vector<double>> per_trial;
  std::vector<double> per_trial_q_set;
};

/// max over q in [q_min, 1] of FDP_BH(q) / q, evaluated exactly at q_min and
/// at every breakpoint of the BH rejection set inside the range.
double bh_max_overshoot(std::span<const double> p, const TruthMask& truth, double q_min);
/// Same maximum over a finite level set.
double bh_max_overshoot_discrete(std::span<const double> p, const TruthMask& truth, std::span<const double> q_set);

BhOvershootResult bh_overshoot_experiment(const SimConfig& config, std::span<const double> q_min_grid,
                                          std::span<const double> q_set);

struct PoissonCheck {
  double p_empirical = 0.0;
  double p_poisson = 0.0;
  /// Joint Monte Carlo standard error of the difference.
  double se = 0.0;
  /// exp(-x theta_x), the analytic bound on the Poisson side.
  double p_bound = 0.0;
  bool holds = false;
};

/// Probability that the uniform empirical process n F_n(t), and a rate-n
/// Poisson process, reach x + x n t for some t in [0, 1].
PoissonCheck poisson_hitting_check(std::size_t n, double x, std::size_t reps, std::uint64_t seed,
                                   unsigned threads = 0);

struct PointwiseQuantile {
  std::size_t k = 0;
  double fdp_quantile = 0.0;
  double mean_fdp_bar = 0.0;
};

/// Per-step 1 - alpha quantile of FDP(R_k) and the mean envelope, over the
/// steps shared by every trial.
std::vector<PointwiseQuantile> pointwise_fdp_quantile(Setting setting, const SimConfig& config, double alpha,
                                                      double a, const SettingParams& params = {});

}  // namespace fdpenv::sim
