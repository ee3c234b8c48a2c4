#include "fdpenv/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdpenv/error.hpp"

namespace fdpenv {

std::string_view to_string(PathKind kind) noexcept {
  switch (kind) {
    case PathKind::Sorted: return "sorted";
    case PathKind::Preordered: return "preordered";
    case PathKind::Knockoff: return "knockoff";
    case PathKind::Online: return "online";
  }
  return "unknown";
}

namespace {

void check_pvalues(std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw Error(Errc::ValueOutOfRange, "p-value " + std::to_string(i) + " is outside [0, 1]");
    }
  }
}

void check_permutation(std::span<const std::size_t> pi, std::size_t n) {
  if (pi.size() != n) {
    throw Error(Errc::InvalidPermutation,
                "ordering has " + std::to_string(pi.size()) + " entries for " + std::to_string(n) + " hypotheses");
  }
  std::vector<char> seen(n, 0);
  for (std::size_t idx : pi) {
    if (idx >= n || seen[idx]) {
      throw Error(Errc::InvalidPermutation, "ordering is not a permutation (entry " + std::to_string(idx) + ")");
    }
    seen[idx] = 1;
  }
}

void fill_from_include(Path& path) {
  path.sizes.resize(path.include.size());
  std::size_t count = 0;
  for (std::size_t j = 0; j < path.include.size(); ++j) {
    if (path.include[j]) {
      ++count;
      path.rejection_order.push_back(path.ordering[j]);
    }
    path.sizes[j] = count;
  }
}

}  // namespace

std::vector<std::size_t> identity_permutation(std::size_t n) {
  std::vector<std::size_t> pi(n);
  std::iota(pi.begin(), pi.end(), std::size_t{0});
  return pi;
}

PathWithVhat build_sorted_path(std::span<const double> p) {
  if (p.empty()) throw Error(Errc::EmptyInput, "no p-values");
  check_pvalues(p);
  const std::size_t n = p.size();

  PathWithVhat out;
  Path& path = out.path;
  path.kind = PathKind::Sorted;
  path.n = n;
  path.ordering = identity_permutation(n);
  std::stable_sort(path.ordering.begin(), path.ordering.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return p[lhs] < p[rhs]; });
  path.include.assign(n, 1);
  path.rejection_order = path.ordering;
  path.sizes.resize(n);

  out.vhat.estimator = estimator::Sort{};
  out.vhat.values.resize(n);
  const double nd = static_cast<double>(n);

  std::size_t block_start = 0;
  while (block_start < n) {
    std::size_t block_end = block_start + 1;
    while (block_end < n && p[path.ordering[block_end]] == p[path.ordering[block_start]]) ++block_end;
    for (std::size_t j = block_start; j < block_end; ++j) path.sizes[j] = block_end;
    if (block_end - block_start > 1) path.tie_blocks.push_back({block_start + 1, block_end});
    block_start = block_end;
  }
  for (std::size_t j = 0; j < n; ++j) out.vhat.values[j] = nd * p[path.ordering[j]];
  return out;
}

Path build_preordered_path(std::span<const double> p, std::span<const std::size_t> pi, double p_star) {
  check_pvalues(p);
  check_permutation(pi, p.size());
  if (!(p_star > 0.0 && p_star <= 1.0)) {
    throw Error(Errc::DomainError, "p_star must lie in (0, 1], got " + std::to_string(p_star));
  }
  Path path;
  path.kind = PathKind::Preordered;
  path.n = p.size();
  path.ordering.assign(pi.begin(), pi.end());
  path.include.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) path.include[j] = p[pi[j]] <= p_star ? 1 : 0;
  fill_from_include(path);
  return path;
}

VhatSeries vhat_acc(std::span<const double> p, std::span<const std::size_t> pi, const AccumulationFn& h) {
  check_pvalues(p);
  check_permutation(pi, p.size());
  VhatSeries out{{}, estimator::Acc{h}};
  out.values.reserve(p.size());
  double total = 0.0;
  for (std::size_t idx : pi) {
    total += h(p[idx]);
    out.values.push_back(total);
  }
  return out;
}

VhatSeries vhat_sel(std::span<const double> p, std::span<const std::size_t> pi, double p_star, double lambda) {
  check_pvalues(p);
  check_permutation(pi, p.size());
  if (!(p_star > 0.0 && p_star < 1.0)) {
    throw Error(Errc::DomainError, "p_star must lie in (0, 1), got " + std::to_string(p_star));
  }
  if (lambda < p_star) {
    throw Error(Errc::LambdaBelowPstar,
                "lambda " + std::to_string(lambda) + " is below p_star " + std::to_string(p_star));
  }
  if (!(lambda < 1.0)) throw Error(Errc::DomainError, "lambda must be below 1");

  VhatSeries out{{}, estimator::Sel{p_star, lambda}};
  out.values.reserve(p.size());
  double total = 0.0;
  for (std::size_t idx : pi) {
    total += sel_increment(p[idx], p_star, lambda);
    out.values.push_back(total);
  }
  return out;
}

PathWithVhat build_knockoff_path(const KnockoffStats& stats) {
  if (!stats.ids.empty() && stats.ids.size() != stats.w.size()) {
    throw Error(Errc::LengthMismatch, "knockoff ids and statistics differ in length");
  }
  std::vector<std::size_t> kept;
  kept.reserve(stats.w.size());
  for (std::size_t i = 0; i < stats.w.size(); ++i) {
    if (std::isnan(stats.w[i])) throw Error(Errc::ValueOutOfRange, "knockoff statistic " + std::to_string(i) + " is NaN");
    if (stats.w[i] != 0.0) kept.push_back(i);
  }
  if (kept.empty()) throw Error(Errc::AllZeroStats, "no nonzero knockoff statistics");

  std::stable_sort(kept.begin(), kept.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return std::abs(stats.w[lhs]) > std::abs(stats.w[rhs]); });

  PathWithVhat out;
  Path& path = out.path;
  path.kind = PathKind::Knockoff;
  path.n = kept.size();
  path.dropped_zero_stats = stats.w.size() - kept.size();
  path.ordering = kept;
  path.include.resize(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) path.include[j] = stats.w[kept[j]] > 0.0 ? 1 : 0;
  fill_from_include(path);

  // Equivalent to a selective path with one-bit p-values and p_star = lambda = 1/2.
  out.vhat.estimator = estimator::Sel{0.5, 0.5};
  out.vhat.values.resize(kept.size());
  double total = 0.0;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    if (!path.include[j]) total += 1.0;
    out.vhat.values[j] = total;
  }
  return out;
}

namespace {

void check_levels(std::span<const double> alpha_levels) {
  for (std::size_t j = 0; j < alpha_levels.size(); ++j) {
    if (!(alpha_levels[j] > 0.0 && alpha_levels[j] < 1.0)) {
      throw Error(Errc::DomainError, "alpha_" + std::to_string(j + 1) + " must lie in (0, 1)");
    }
  }
}

}  // namespace

Path build_online_path(std::span<const double> p, std::span<const double> alpha_levels) {
  if (p.size() != alpha_levels.size()) throw Error(Errc::LengthMismatch, "p and alpha levels differ in length");
  check_pvalues(p);
  check_levels(alpha_levels);
  Path path;
  path.kind = PathKind::Online;
  path.n = p.size();
  path.ordering = identity_permutation(p.size());
  path.include.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) path.include[j] = p[j] <= alpha_levels[j] ? 1 : 0;
  fill_from_include(path);
  return path;
}

VhatSeries vhat_online_simple(std::span<const double> alpha_levels) {
  check_levels(alpha_levels);
  VhatSeries out{{}, estimator::OnlineSimple{}};
  out.values.reserve(alpha_levels.size());
  double total = 0.0;
  for (double level : alpha_levels) {
    total += level;
    out.values.push_back(total);
  }
  return out;
}

VhatSeries vhat_online_adaptive(std::span<const double> p, std::span<const double> alpha_levels,
                                std::span<const double> lambdas) {
  if (p.size() != alpha_levels.size() || p.size() != lambdas.size()) {
    throw Error(Errc::LengthMismatch, "p, alpha levels and lambdas differ in length");
  }
  check_pvalues(p);
  check_levels(alpha_levels);
  double b_seen = 0.0;
  double total = 0.0;
  std::vector<double> values;
  values.reserve(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (lambdas[j] < alpha_levels[j]) {
      throw Error(Errc::LambdaBelowAlpha, "lambda_" + std::to_string(j + 1) + " is below alpha_" + std::to_string(j + 1));
    }
    if (!(lambdas[j] < 1.0)) throw Error(Errc::DomainError, "lambda must be below 1");
    b_seen = std::max(b_seen, alpha_levels[j] / (1.0 - lambdas[j]));
    total += online_adaptive_increment(p[j], alpha_levels[j], lambdas[j]);
    values.push_back(total);
  }
  return VhatSeries{std::move(values), estimator::OnlineAdaptive{b_seen}};
}

}  // namespace fdpenv
