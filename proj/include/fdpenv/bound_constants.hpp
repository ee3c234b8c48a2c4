#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace fdpenv {

enum class BoundFamily {
  Sort,
  PreorderAccGeneral,
  PreorderAccBounded,
  Sel,
  Knockoff,
  OnlineSimple,
  OnlineAdaptive,
};

std::string_view to_string(BoundFamily family) noexcept;

/// Nondecreasing map h: [0,1] -> [0, inf) with unit integral, used to turn the
/// p-values along a pre-ordered path into an estimate of the null count.
class AccumulationFn {
 public:
  enum class Kind { SeqStep, ForwardStop, Custom };

  /// u -> 1{u > lambda} / (1 - lambda); bounded by 1 / (1 - lambda).
  static AccumulationFn seq_step(double lambda);
  /// u -> log(1 / (1 - u)); unbounded.
  static AccumulationFn forward_stop();
  /// User-supplied h. Monotonicity is checked on a grid, the unit integral by
  /// quadrature to 1e-6, and `bound` (when given) against the same grid.
  /// Throws Error{InvalidAccumulationFn} on any violation.
  static AccumulationFn custom(std::function<double(double)> h, std::optional<double> bound = std::nullopt,
                               std::string name = "custom");

  double operator()(double u) const { return eval_(u); }

  Kind kind() const noexcept { return kind_; }
  /// sup h, absent when h is unbounded.
  std::optional<double> bound() const noexcept { return bound_; }
  /// SeqStep threshold; 0 for other kinds.
  double lambda() const noexcept { return lambda_; }
  const std::string& name() const noexcept { return name_; }

 private:
  AccumulationFn(Kind kind, std::function<double(double)> eval, std::optional<double> bound, double lambda,
                 std::string name);

  Kind kind_;
  std::function<double(double)> eval_;
  std::optional<double> bound_;
  double lambda_;
  std::string name_;
};

namespace theta_case {
struct AccGeneral {
  AccumulationFn h;
};
struct AccBounded {
  double b;
};
struct Selective {
  double b;
};
struct Simple {};
}  // namespace theta_case

/// Which exponential-supermartingale equation pins down theta for a given x.
using ThetaCase =
    std::variant<theta_case::AccGeneral, theta_case::AccBounded, theta_case::Selective, theta_case::Simple>;

/// A resolved multiplier c(alpha) together with the tuple that produced it.
/// Invariant: exp(-a * theta * c) == alpha up to rounding.
struct BoundConstant {
  double c = 1.0;
  double theta = 0.0;
  double alpha = 0.0;
  double a = 1.0;
  BoundFamily family = BoundFamily::Sort;
  /// B for the bounded and selective families, 0 otherwise.
  double b = 0.0;
  /// Non-empty when the constant was produced outside its proven range.
  std::string warning;
};

/// Residual of the theta equation for `which`, oriented so that it is
/// negative on (0, theta_x) and positive beyond:
///   AccGeneral: int_0^1 exp(-theta x h(u)) du - exp(-theta)
///   AccBounded: 1 - exp(-theta) - (1 - exp(-theta x B)) / B
///   Selective:  exp(theta) - 1 - (1 - exp(-theta x B)) / B
///   Simple:     exp(theta) - 1 - theta x
double theta_residual(const ThetaCase& which, double theta, double x);

/// Unique positive root theta_x of the case's equation. `a` does not enter the
/// equations; it is accepted so callers can pass the tuple they hold.
/// Throws Error{NoRoot} for x <= 1 or a malformed h, Error{NonConvergence}
/// when the solver stalls.
double solve_theta(const ThetaCase& which, double x, double a = 1.0);

struct SortOptions {
  /// Permits alpha above 0.31, where the sorted guarantee is unproven.
  bool allow_unproven_alpha = false;
};

inline constexpr double kSortProvenAlphaMax = 0.31;

BoundConstant constant_sort(double alpha, const SortOptions& opts = {});
BoundConstant constant_preorder_acc_general(double alpha, double a, const AccumulationFn& h);
BoundConstant constant_preorder_acc_bounded(double alpha, double a, double b);
BoundConstant constant_sel(double alpha, double a, double b);
/// constant_sel with B = 1, tagged for knockoff paths.
BoundConstant constant_knockoff(double alpha, double a);
BoundConstant constant_online_simple(double alpha, double a);
/// constant_sel with B = b_cap, tagged for adaptive online streams.
BoundConstant constant_online_adaptive(double alpha, double a, double b_cap);

}  // namespace fdpenv
