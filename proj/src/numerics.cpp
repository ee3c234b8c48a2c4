#include "fdpenv/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "fdpenv/error.hpp"

namespace fdpenv::numerics {

namespace {

// Signed evaluation that refuses NaN so bracketing never silently stalls.
double eval(const ScalarFn& f, double x) {
  const double v = f(x);
  if (std::isnan(v)) {
    throw Error(Errc::NonConvergence, "residual evaluated to NaN at " + std::to_string(x));
  }
  return v;
}

}  // namespace

double positive_root(const ScalarFn& f, const std::optional<ScalarFn>& df, const RootOptions& opts) {
  double lo = opts.start;
  double flo = eval(f, lo);
  if (flo == 0.0) return lo;

  double hi = lo;
  double fhi = flo;
  if (flo > 0.0) {
    // root sits below the first probe
    while (fhi > 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < opts.min_bracket) {
        throw Error(Errc::NoRoot, "residual is positive all the way down to the minimum bracket");
      }
      flo = eval(f, lo);
      if (flo == 0.0) return lo;
      if (flo < 0.0) {
        fhi = eval(f, hi);
        break;
      }
    }
  } else {
    while (fhi <= 0.0) {
      if (fhi == 0.0 && hi != lo) return hi;
      lo = hi;
      hi *= 2.0;
      if (hi > opts.max_bracket) {
        throw Error(Errc::NoRoot, "no sign change below " + std::to_string(opts.max_bracket));
      }
      fhi = eval(f, hi);
    }
  }

  int iter = 0;
  while (hi - lo > opts.width_tol * std::min(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // exhausted double resolution
    const double fm = eval(f, mid);
    if (fm == 0.0) return mid;
    if (fm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (++iter > opts.max_iterations) {
      throw Error(Errc::NonConvergence, "bisection iteration cap reached");
    }
  }

  double root = 0.5 * (lo + hi);
  double froot = eval(f, root);
  if (df) {
    for (int k = 0; k < opts.newton_steps && froot != 0.0; ++k) {
      const double slope = (*df)(root);
      if (!(std::isfinite(slope)) || slope == 0.0) break;
      const double next = root - froot / slope;
      if (next < lo || next > hi) break;
      const double fnext = eval(f, next);
      if (std::abs(fnext) >= std::abs(froot)) break;
      root = next;
      froot = fnext;
    }
  }
  if (!(std::abs(froot) < opts.residual_tol)) {
    throw Error(Errc::NonConvergence,
                "residual " + std::to_string(froot) + " above tolerance at root " + std::to_string(root));
  }
  return root;
}

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_15(const ScalarFn& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    throw Error(Errc::QuadratureFailure,
                "integrand not finite on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const ScalarFn& f, double lo, double hi, const QuadratureOptions& opts) {
  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double total_error = first.error;
  panels.push(first);

  auto converged = [&] { return total_error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

  // Panels too narrow to split further are set aside; their error still counts.
  std::vector<Panel> frozen;
  while (!converged()) {
    if (panels.empty() || panels.size() + frozen.size() >= opts.max_intervals) {
      throw Error(Errc::QuadratureFailure, "error estimate " + std::to_string(total_error) +
                                               " did not reach tolerance within interval budget");
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      frozen.push_back(worst);
      continue;
    }
    const Panel left = gauss_kronrod_15(f, worst.lo, mid);
    const Panel right = gauss_kronrod_15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum from the panels to shed the drift of the running updates.
  QuadratureResult result;
  result.intervals = panels.size() + frozen.size();
  while (!panels.empty()) {
    result.value += panels.top().value;
    result.error += panels.top().error;
    panels.pop();
  }
  for (const Panel& p : frozen) {
    result.value += p.value;
    result.error += p.error;
  }
  return result;
}

}  // namespace fdpenv::numerics
