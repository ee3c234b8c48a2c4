#include "fdpenv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "fdpenv/error.hpp"

namespace fdpenv::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs fn(r) for r = 0..reps-1 on a small thread pool; results keep trial order.
template <class T, class Fn>
std::vector<T> run_trials(std::size_t reps, unsigned threads, Fn&& fn) {
  std::vector<T> out(reps);
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        out[r] = fn(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(reps);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

GeneratedPValues finish(const SimConfig& config, std::vector<double> x, std::span<const char> nonnull) {
  GeneratedPValues out;
  out.p.resize(config.n);
  out.truth.is_null.resize(config.n);
  for (std::size_t j = 0; j < config.n; ++j) {
    const bool alt = nonnull.empty() ? j < config.n_nonnull : nonnull[j] != 0;
    out.truth.is_null[j] = alt ? 0 : 1;
    out.p[j] = upper_tail(alt ? x[j] + config.mu : x[j]);
  }
  return out;
}

void check_mask(const SimConfig& config, std::span<const char> nonnull) {
  if (!nonnull.empty() && nonnull.size() != config.n) {
    throw Error(Errc::LengthMismatch, "non-null mask length differs from n");
  }
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.n == 0) throw Error(Errc::ConfigInvalid, "n must be positive");
  if (config.n_nonnull > config.n) throw Error(Errc::ConfigInvalid, "n_nonnull exceeds n");
  if (config.reps == 0) throw Error(Errc::ConfigInvalid, "reps must be at least 1");
  if (!(config.rho > -1.0 && config.rho < 1.0)) throw Error(Errc::ConfigInvalid, "rho must lie in (-1, 1)");
  if (!std::isfinite(config.mu)) throw Error(Errc::ConfigInvalid, "mu must be finite");
  if (!(config.ordering_theta >= 0.0) || !std::isfinite(config.ordering_theta)) {
    throw Error(Errc::ConfigInvalid, "ordering_theta must be a finite nonnegative number");
  }
}

std::string_view to_string(Setting setting) noexcept {
  switch (setting) {
    case Setting::Sort: return "sort";
    case Setting::PreorderAcc: return "preorder-acc";
    case Setting::PreorderSel: return "preorder-sel";
    case Setting::Knockoff: return "knockoff";
    case Setting::OnlineSimple: return "online-simple";
    case Setting::OnlineAdaptive: return "online-adaptive";
  }
  return "?";
}

Setting parse_setting(std::string_view name) {
  for (Setting s : {Setting::Sort, Setting::PreorderAcc, Setting::PreorderSel, Setting::Knockoff, Setting::OnlineSimple,
                    Setting::OnlineAdaptive}) {
    if (to_string(s) == name) return s;
  }
  throw Error(Errc::ConfigInvalid, "unknown setting '" + std::string(name) + "'");
}

GeneratedPValues gen_gaussian_pvalues(const SimConfig& config, RandomStream& rng, std::span<const char> nonnull) {
  validate(config);
  check_mask(config, nonnull);
  std::vector<double> x(config.n);
  for (double& v : x) v = rng.normal();
  return finish(config, std::move(x), nonnull);
}

GeneratedPValues gen_gaussian_pvalues(const SimConfig& config) {
  RandomStream rng(config.seed, 0);
  return gen_gaussian_pvalues(config, rng);
}

std::vector<double> ar1_statistics(const SimConfig& config, RandomStream& rng) {
  validate(config);
  const double rho = config.rho;
  const double innovation = std::sqrt(1.0 - rho * rho);
  std::vector<double> x(config.n);
  // X_1 ~ N(0, 1) is already stationary.
  x[0] = rng.normal();
  for (std::size_t j = 1; j < config.n; ++j) x[j] = rho * x[j - 1] + innovation * rng.normal();
  return x;
}

GeneratedPValues gen_ar1_pvalues(const SimConfig& config, RandomStream& rng, std::span<const char> nonnull) {
  validate(config);
  check_mask(config, nonnull);
  return finish(config, ar1_statistics(config, rng), nonnull);
}

GeneratedPValues gen_ar1_pvalues(const SimConfig& config) {
  RandomStream rng(config.seed, 0);
  return gen_ar1_pvalues(config, rng);
}

GeneratedOrdering gen_exponential_ordering(const SimConfig& config, RandomStream& rng) {
  validate(config);
  const std::size_t n = config.n;
  GeneratedOrdering out;
  out.pi = identity_permutation(n);
  out.nonnull.assign(n, 0);
  std::vector<double> key(n);
  for (std::size_t j = 0; j < n; ++j) {
    // log-weight of position j + 1 is -theta (j + 1) / n.
    const double log_w = -config.ordering_theta * static_cast<double>(j + 1) / static_cast<double>(n);
    key[j] = std::log(rng.uniform()) * std::exp(-log_w);
  }
  std::vector<std::size_t> idx = identity_permutation(n);
  const auto cut = idx.begin() + static_cast<std::ptrdiff_t>(config.n_nonnull);
  std::nth_element(idx.begin(), cut, idx.end(), [&](std::size_t l, std::size_t r) {
    return key[l] != key[r] ? key[l] > key[r] : l < r;
  });
  for (auto it = idx.begin(); it != cut; ++it) out.nonnull[*it] = 1;
  return out;
}

GeneratedOrdering gen_exponential_ordering(const SimConfig& config) {
  RandomStream rng(config.seed, 0);
  return gen_exponential_ordering(config, rng);
}

BoundConstant setting_constant(Setting setting, double alpha, double a, const SettingParams& params) {
  switch (setting) {
    case Setting::Sort: return constant_sort(alpha);
    case Setting::PreorderAcc: return constant_preorder_acc_bounded(alpha, a, 1.0 / (1.0 - params.acc_lambda));
    case Setting::PreorderSel: return constant_sel(alpha, a, params.p_star / (1.0 - params.lambda));
    case Setting::Knockoff: return constant_knockoff(alpha, a);
    case Setting::OnlineSimple: return constant_online_simple(alpha, a);
    case Setting::OnlineAdaptive:
      return constant_online_adaptive(alpha, a, params.online_alpha / (1.0 - params.online_lambda));
  }
  throw Error(Errc::ConfigInvalid, "unknown setting");
}

SimTrial simulate_trial(Setting setting, const SimConfig& config, const SettingParams& params, RandomStream& rng) {
  SimTrial trial;
  switch (setting) {
    case Setting::Sort: {
      GeneratedPValues data = gen_ar1_pvalues(config, rng);
      PathWithVhat built = build_sorted_path(data.p);
      trial.path = std::move(built.path);
      trial.vhat = std::move(built.vhat);
      trial.truth = std::move(data.truth);
      break;
    }
    case Setting::PreorderAcc:
    case Setting::PreorderSel: {
      const GeneratedOrdering order = gen_exponential_ordering(config, rng);
      GeneratedPValues data = gen_ar1_pvalues(config, rng, order.nonnull);
      if (setting == Setting::PreorderAcc) {
        trial.path = build_preordered_path(data.p, order.pi, 1.0);
        trial.vhat = vhat_acc(data.p, order.pi, AccumulationFn::seq_step(params.acc_lambda));
      } else {
        trial.path = build_preordered_path(data.p, order.pi, params.p_star);
        trial.vhat = vhat_sel(data.p, order.pi, params.p_star, params.lambda);
      }
      trial.truth = std::move(data.truth);
      break;
    }
    case Setting::Knockoff: {
      validate(config);
      KnockoffStats stats;
      stats.w.resize(config.n);
      trial.truth.is_null.assign(config.n, 1);
      for (std::size_t j = 0; j < config.n; ++j) {
        const double magnitude = std::abs(rng.normal());
        if (j < config.n_nonnull) {
          trial.truth.is_null[j] = 0;
          stats.w[j] = magnitude + config.mu;
        } else {
          // Null statistics have symmetric signs independent of their magnitudes.
          stats.w[j] = (rng() & 1u) != 0 ? magnitude : -magnitude;
        }
      }
      PathWithVhat built = build_knockoff_path(stats);
      trial.path = std::move(built.path);
      trial.vhat = std::move(built.vhat);
      break;
    }
    case Setting::OnlineSimple:
    case Setting::OnlineAdaptive: {
      GeneratedPValues data = gen_ar1_pvalues(config, rng);
      const std::vector<double> levels(config.n, params.online_alpha);
      trial.path = build_online_path(data.p, levels);
      if (setting == Setting::OnlineSimple) {
        trial.vhat = vhat_online_simple(levels);
      } else {
        const std::vector<double> lambdas(config.n, params.online_lambda);
        trial.vhat = vhat_online_adaptive(data.p, levels, lambdas);
      }
      trial.truth = std::move(data.truth);
      break;
    }
  }
  return trial;
}

SupRatio sup_ratio(const Path& path, const EnvelopeCurve& envelope, const TruthMask& truth) {
  SupRatio out;
  std::size_t nulls = 0;
  std::size_t counted = 0;
  for (const EnvelopeRecord& r : envelope.records) {
    const std::size_t size = path.size_at(r.k);
    for (; counted < size; ++counted) nulls += truth.is_null.at(path.rejection_order[counted]) != 0 ? 1 : 0;
    if (nulls == 0) continue;
    // FDP / min(1, v_bar / size) = V / min(size, v_bar), kept in integers.
    const auto bar = static_cast<std::size_t>(std::max<std::int64_t>(0, r.v_bar));
    const std::size_t denom = std::min(size, bar);
    if (nulls > denom) out.violated = true;
    out.ratio = std::max(out.ratio, denom == 0 ? kInf : static_cast<double>(nulls) / static_cast<double>(denom));
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(Errc::EmptyInput, "quantile of an empty sample");
  const auto m = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

CoverageResult coverage_experiment(Setting setting, const SimConfig& config, double alpha, double a,
                                   const SettingParams& params) {
  validate(config);
  CoverageResult out;
  out.setting = setting;
  out.constant = setting_constant(setting, alpha, a, params);
  out.reps = config.reps;
  const std::vector<SupRatio> trials = run_trials<SupRatio>(config.reps, config.threads, [&](std::size_t r) {
    RandomStream rng(config.seed, r);
    const SimTrial trial = simulate_trial(setting, config, params, rng);
    const EnvelopeCurve env = compute_envelope(trial.path, trial.vhat, out.constant);
    return sup_ratio(trial.path, env, trial.truth);
  });
  out.sup_ratios.reserve(trials.size());
  for (const SupRatio& t : trials) {
    out.violations += t.violated ? 1 : 0;
    out.sup_ratios.push_back(t.ratio);
  }
  out.violation_rate = static_cast<double>(out.violations) / static_cast<double>(out.reps);
  out.max_ratio_quantile = empirical_quantile(out.sup_ratios, 1.0 - alpha);
  return out;
}

std::vector<CorrelationCell> correlation_sweep(std::span<const double> rhos, const SimConfig& config, double alpha,
                                               double a) {
  std::vector<CorrelationCell> cells;
  for (double rho : rhos) {
    SimConfig cell = config;
    cell.rho = rho;
    const CoverageResult res = coverage_experiment(Setting::Sort, cell, alpha, a);
    cells.push_back({rho, res.violation_rate, res.max_ratio_quantile});
  }
  return cells;
}

std::vector<std::size_t> run_bh(std::span<const double> p, double q) {
  std::vector<std::size_t> order = identity_permutation(p.size());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return p[l] < p[r]; });
  const auto n = static_cast<double>(p.size());
  std::size_t k_star = 0;
  for (std::size_t k = p.size(); k >= 1; --k) {
    if (n * p[order[k - 1]] / static_cast<double>(k) <= q) {
      k_star = k;
      break;
    }
  }
  order.resize(k_star);
  return order;
}

namespace {

/// Sorted BH statistics of one trial: running null counts and the suffix
/// minimum of t_k = n p_(k) / k, which is nondecreasing in k.
struct BhCurve {
  std::vector<double> suffix_min;
  std::vector<std::size_t> nulls;  // nulls[k] = nulls among the k smallest
  std::vector<double> t;

  BhCurve(std::span<const double> p, const TruthMask& truth) {
    const std::size_t n = p.size();
    std::vector<std::size_t> order = identity_permutation(n);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return p[l] < p[r]; });
    t.resize(n);
    nulls.assign(n + 1, 0);
    for (std::size_t k = 1; k <= n; ++k) {
      t[k - 1] = static_cast<double>(n) * p[order[k - 1]] / static_cast<double>(k);
      nulls[k] = nulls[k - 1] + (truth.is_null.at(order[k - 1]) != 0 ? 1 : 0);
    }
    suffix_min = t;
    for (std::size_t k = n; k-- > 1;) suffix_min[k - 1] = std::min(suffix_min[k - 1], suffix_min[k]);
  }

  /// FDP_BH(q) / q; k*(q) = #{k : suffix_min_k <= q}.
  double ratio(double q) const {
    const auto k = static_cast<std::size_t>(std::upper_bound(suffix_min.begin(), suffix_min.end(), q) - suffix_min.begin());
    if (k == 0) return 0.0;
    return static_cast<double>(nulls[k]) / static_cast<double>(k) / q;
  }
};

double max_over_range(const BhCurve& curve, double q_min) {
  double best = curve.ratio(q_min);
  for (double tk : curve.t) {
    if (tk > q_min && tk <= 1.0) best = std::max(best, curve.ratio(tk));
  }
  return best;
}

double max_over_set(const BhCurve& curve, std::span<const double> q_set) {
  double best = 0.0;
  for (double q : q_set) best = std::max(best, curve.ratio(q));
  return best;
}

void check_levels(std::span<const double> qs) {
  for (double q : qs) {
    if (!(q > 0.0 && q <= 1.0)) throw Error(Errc::DomainError, "BH levels must lie in (0, 1]");
  }
}

}  // namespace

double bh_max_overshoot(std::span<const double> p, const TruthMask& truth, double q_min) {
  check_levels({&q_min, 1});
  return max_over_range(BhCurve(p, truth), q_min);
}

double bh_max_overshoot_discrete(std::span<const double> p, const TruthMask& truth, std::span<const double> q_set) {
  check_levels(q_set);
  return max_over_set(BhCurve(p, truth), q_set);
}

BhOvershootResult bh_overshoot_experiment(const SimConfig& config, std::span<const double> q_min_grid,
                                          std::span<const double> q_set) {
  validate(config);
  check_levels(q_min_grid);
  check_levels(q_set);
  struct TrialStats {
    std::vector<double> ranges;
    double discrete = 0.0;
  };
  const std::vector<TrialStats> trials = run_trials<TrialStats>(config.reps, config.threads, [&](std::size_t r) {
    RandomStream rng(config.seed, r);
    const GeneratedPValues data = gen_ar1_pvalues(config, rng);
    const BhCurve curve(data.p, data.truth);
    TrialStats s;
    for (double q_min : q_min_grid) s.ranges.push_back(max_over_range(curve, q_min));
    s.discrete = q_set.empty() ? 0.0 : max_over_set(curve, q_set);
    return s;
  });

  BhOvershootResult out;
  for (std::size_t i = 0; i < q_min_grid.size(); ++i) {
    std::vector<double> column;
    column.reserve(trials.size());
    for (const TrialStats& s : trials) column.push_back(s.ranges[i]);
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
    out.cells.push_back({q_min_grid[i], mean, empirical_quantile(column, 0.9)});
  }
  for (const TrialStats& s : trials) {
    out.per_trial.push_back(s.ranges);
    out.per_trial_q_set.push_back(s.discrete);
  }
  if (!q_set.empty()) {
    out.q_set_mean = std::accumulate(out.per_trial_q_set.begin(), out.per_trial_q_set.end(), 0.0) /
                     static_cast<double>(out.per_trial_q_set.size());
    out.q_set_q90 = empirical_quantile(out.per_trial_q_set, 0.9);
  }
  return out;
}

PoissonCheck poisson_hitting_check(std::size_t n, double x, std::size_t reps, std::uint64_t seed, unsigned threads) {
  if (n == 0 || reps == 0) throw Error(Errc::ConfigInvalid, "n and reps must be positive");
  if (!(x > 1.0) || !std::isfinite(x)) throw Error(Errc::DomainError, "x must exceed 1");
  const double nd = static_cast<double>(n);
  // The k-th point hits the line x + x n t iff its time is at most (k - x) / (x n).
  auto deadline = [&](std::size_t k) { return (static_cast<double>(k) - x) / (x * nd); };

  struct Hits {
    char empirical = 0;
    char poisson = 0;
  };
  const std::vector<Hits> trials = run_trials<Hits>(reps, threads, [&](std::size_t r) {
    RandomStream rng(seed, r);
    Hits h;
    std::vector<double> u(n);
    for (double& v : u) v = rng.uniform();
    std::sort(u.begin(), u.end());
    for (std::size_t k = 1; k <= n; ++k) {
      if (u[k - 1] <= deadline(k)) {
        h.empirical = 1;
        break;
      }
    }
    double time = 0.0;
    for (std::size_t k = 1;; ++k) {
      time += rng.exponential(nd);
      if (time > 1.0) break;
      if (time <= deadline(k)) {
        h.poisson = 1;
        break;
      }
    }
    return h;
  });

  PoissonCheck out;
  for (const Hits& h : trials) {
    out.p_empirical += h.empirical;
    out.p_poisson += h.poisson;
  }
  const auto m = static_cast<double>(reps);
  out.p_empirical /= m;
  out.p_poisson /= m;
  out.se = std::sqrt(out.p_empirical * (1.0 - out.p_empirical) / m + out.p_poisson * (1.0 - out.p_poisson) / m);
  out.p_bound = std::exp(-x * solve_theta(theta_case::Simple{}, x));
  out.holds = out.p_empirical <= out.p_poisson + 3.0 * out.se;
  return out;
}

std::vector<PointwiseQuantile> pointwise_fdp_quantile(Setting setting, const SimConfig& config, double alpha,
                                                      double a, const SettingParams& params) {
  validate(config);
  const BoundConstant constant = setting_constant(setting, alpha, a, params);
  struct Curves {
    std::vector<double> fdp;
    std::vector<double> fdp_bar;
  };
  const std::vector<Curves> trials = run_trials<Curves>(config.reps, config.threads, [&](std::size_t r) {
    RandomStream rng(config.seed, r);
    const SimTrial trial = simulate_trial(setting, config, params, rng);
    const EnvelopeCurve env = compute_envelope(trial.path, trial.vhat, constant);
    Curves c;
    c.fdp = true_fdp_curve(trial.path, trial.truth);
    for (const EnvelopeRecord& rec : env.records) c.fdp_bar.push_back(rec.fdp_bar);
    return c;
  });
  std::size_t steps = std::numeric_limits<std::size_t>::max();
  for (const Curves& c : trials) steps = std::min(steps, c.fdp.size());

  std::vector<PointwiseQuantile> out;
  std::vector<double> column(trials.size());
  for (std::size_t k = 0; k < steps; ++k) {
    double bar_sum = 0.0;
    for (std::size_t r = 0; r < trials.size(); ++r) {
      column[r] = trials[r].fdp[k];
      bar_sum += trials[r].fdp_bar[k];
    }
    out.push_back({k, empirical_quantile(column, 1.0 - alpha), bar_sum / static_cast<double>(trials.size())});
  }
  return out;
}

}  // namespace fdpenv::sim
