#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fdpenv/bound_constants.hpp"

namespace fdpenv {

enum class PathKind { Sorted, Preordered, Knockoff, Online };

std::string_view to_string(PathKind kind) noexcept;

/// Steps first_k..last_k (1-based, inclusive) of a sorted path that share one
/// rejection set because their p-values are tied.
struct TieBlock {
  std::size_t first_k = 0;
  std::size_t last_k = 0;
};

/// Nested rejection sets R_0 = {} ⊆ R_1 ⊆ ... ⊆ R_steps.
///
/// Step j (0-based) visits hypothesis ordering[j]; include[j] says whether it
/// joins the rejection set. sizes[k-1] = |R_k| for k = 1..steps, so the empty
/// set at k = 0 is implicit. R_k is always the first sizes[k-1] entries of
/// rejection_order, which also covers sorted paths whose ties enlarge R_k
/// beyond the first k visited hypotheses.
struct Path {
  PathKind kind = PathKind::Preordered;
  std::size_t n = 0;
  std::vector<std::size_t> ordering;
  std::vector<char> include;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> rejection_order;
  std::vector<TieBlock> tie_blocks;
  /// Knockoff statistics equal to zero, removed before ordering.
  std::size_t dropped_zero_stats = 0;

  std::size_t steps() const noexcept { return sizes.size(); }
  /// |R_k|, with |R_0| = 0.
  std::size_t size_at(std::size_t k) const { return k == 0 ? 0 : sizes.at(k - 1); }
};

namespace estimator {
struct Sort {};
struct Acc {
  AccumulationFn h;
};
struct Sel {
  double p_star;
  double lambda;
};
struct OnlineSimple {};
struct OnlineAdaptive {
  /// max_j alpha_j / (1 - lambda_j) over the series.
  double b_seen;
};
}  // namespace estimator

using Estimator =
    std::variant<estimator::Sort, estimator::Acc, estimator::Sel, estimator::OnlineSimple, estimator::OnlineAdaptive>;

/// Running estimate Vhat(R_k) for k = 1..steps (Vhat(R_0) = 0 is implicit).
struct VhatSeries {
  std::vector<double> values;
  Estimator estimator = estimator::Sort{};

  double at(std::size_t k) const { return k == 0 ? 0.0 : values.at(k - 1); }
};

struct KnockoffStats {
  std::vector<std::string> ids;
  std::vector<double> w;
};

struct PathWithVhat {
  Path path;
  VhatSeries vhat;
};

// Per-step increments shared by the batch builders and the streaming monitor,
// so both accumulate bit-identical sums.
inline double sel_increment(double p, double p_star, double lambda) {
  return p > lambda ? p_star / (1.0 - lambda) : 0.0;
}
inline double online_adaptive_increment(double p, double alpha_j, double lambda_j) {
  return p > lambda_j ? alpha_j / (1.0 - lambda_j) : 0.0;
}

/// R_k = {j : p_j <= p_(k)} with Vhat(R_k) = n * p_(k). Ties are ordered by
/// index and recorded as tie blocks. Throws Error{EmptyInput}.
PathWithVhat build_sorted_path(std::span<const double> p);

/// R_k = {pi(j) : j <= k, p_pi(j) <= p_star}; `pi` is 0-based.
/// Throws Error{InvalidPermutation}.
Path build_preordered_path(std::span<const double> p, std::span<const std::size_t> pi, double p_star);

/// sum_{j<=k} h(p_pi(j)).
VhatSeries vhat_acc(std::span<const double> p, std::span<const std::size_t> pi, const AccumulationFn& h);

/// sum_{j<=k} p_star / (1 - lambda) * 1{p_pi(j) > lambda}. Throws Error{LambdaBelowPstar}.
VhatSeries vhat_sel(std::span<const double> p, std::span<const std::size_t> pi, double p_star, double lambda);

/// Orders nonzero statistics by |W| descending (ties by index); a step joins the
/// rejection set when W > 0 and Vhat counts negatives. Throws Error{AllZeroStats}.
PathWithVhat build_knockoff_path(const KnockoffStats& stats);

/// R_k = {j <= k : p_j <= alpha_j}.
Path build_online_path(std::span<const double> p, std::span<const double> alpha_levels);
VhatSeries vhat_online_simple(std::span<const double> alpha_levels);
VhatSeries vhat_online_adaptive(std::span<const double> p, std::span<const double> alpha_levels,
                                std::span<const double> lambdas);

std::vector<std::size_t> identity_permutation(std::size_t n);

}  // namespace fdpenv
