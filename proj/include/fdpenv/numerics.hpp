#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace fdpenv::numerics {

using ScalarFn = std::function<double(double)>;

struct RootOptions {
  double start = 1e-8;          // first bracket probe
  double max_bracket = 1e6;     // doubling stops here
  double min_bracket = 1e-300;  // halving stops here
  double width_tol = 1e-13;     // bisection stops once the bracket is this narrow
  double residual_tol = 1e-10;  // accepted |f(root)|
  int max_iterations = 2000;
  int newton_steps = 4;
};

/// Finds the unique positive root of a residual that is negative on (0, root)
/// and positive on (root, inf).
///
/// The bracket is located by probing at `start` and then doubling (or halving,
/// if the root lies below `start`) until the sign flips. Bisection narrows it
/// to `width_tol`; optional Newton steps polish the midpoint but are only
/// accepted while they stay inside the bracket and shrink |f|.
///
/// Throws Error{NoRoot} when no sign change is found and
/// Error{NonConvergence} when the iteration cap or residual check fails.
double positive_root(const ScalarFn& f, const std::optional<ScalarFn>& df = std::nullopt,
                     const RootOptions& opts = {});

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [lo, hi].
/// The interval with the largest error estimate is bisected until the summed
/// estimate meets max(abs_tol, rel_tol * |value|). Throws Error{QuadratureFailure}
/// on a non-finite integrand or when max_intervals is exhausted.
QuadratureResult integrate(const ScalarFn& f, double lo, double hi, const QuadratureOptions& opts = {});

}  // namespace fdpenv::numerics
