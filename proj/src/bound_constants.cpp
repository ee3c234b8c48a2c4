#include "fdpenv/bound_constants.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "fdpenv/error.hpp"
#include "fdpenv/numerics.hpp"

namespace fdpenv {

std::string_view to_string(BoundFamily family) noexcept {
  switch (family) {
    case BoundFamily::Sort: return "sort";
    case BoundFamily::PreorderAccGeneral: return "preorder-acc-general";
    case BoundFamily::PreorderAccBounded: return "preorder-acc-bounded";
    case BoundFamily::Sel: return "sel";
    case BoundFamily::Knockoff: return "knockoff";
    case BoundFamily::OnlineSimple: return "online-simple";
    case BoundFamily::OnlineAdaptive: return "online-adaptive";
  }
  return "unknown";
}

// --- AccumulationFn ---------------------------------------------------------

AccumulationFn::AccumulationFn(Kind kind, std::function<double(double)> eval, std::optional<double> bound,
                               double lambda, std::string name)
    : kind_(kind), eval_(std::move(eval)), bound_(bound), lambda_(lambda), name_(std::move(name)) {}

AccumulationFn AccumulationFn::seq_step(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw Error(Errc::InvalidAccumulationFn, "SeqStep threshold must lie in [0, 1)");
  }
  const double height = 1.0 / (1.0 - lambda);
  std::ostringstream name;
  name << "seqstep(" << lambda << ")";
  return AccumulationFn(
      Kind::SeqStep, [lambda, height](double u) { return u > lambda ? height : 0.0; }, height, lambda, name.str());
}

AccumulationFn AccumulationFn::forward_stop() {
  return AccumulationFn(
      Kind::ForwardStop, [](double u) { return -std::log1p(-u); }, std::nullopt, 0.0, "forwardstop");
}

AccumulationFn AccumulationFn::custom(std::function<double(double)> h, std::optional<double> bound, std::string name) {
  if (!h) throw Error(Errc::InvalidAccumulationFn, "empty function");
  if (bound && !(*bound > 0.0)) throw Error(Errc::InvalidAccumulationFn, "bound must be positive");

  constexpr int kGrid = 2000;
  double prev = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double u = static_cast<double>(i) / kGrid;
    const double v = h(u);
    if (std::isnan(v) || v < 0.0) {
      throw Error(Errc::InvalidAccumulationFn, "h(" + std::to_string(u) + ") is negative or NaN");
    }
    if (i > 0 && v < prev) {
      throw Error(Errc::InvalidAccumulationFn, "h decreases near u = " + std::to_string(u));
    }
    if (bound && v > *bound) {
      throw Error(Errc::InvalidAccumulationFn, "h exceeds its declared bound near u = " + std::to_string(u));
    }
    prev = v;
  }

  numerics::QuadratureResult mass;
  try {
    mass = numerics::integrate(h, 0.0, 1.0, {.abs_tol = 1e-9, .rel_tol = 0.0, .max_intervals = 20000});
  } catch (const Error& e) {
    throw Error(Errc::QuadratureFailure, std::string("integral of h: ") + e.what());
  }
  if (std::abs(mass.value - 1.0) > 1e-6) {
    throw Error(Errc::InvalidAccumulationFn, "h integrates to " + std::to_string(mass.value) + ", not 1");
  }
  return AccumulationFn(Kind::Custom, std::move(h), bound, 0.0, std::move(name));
}

// --- theta equations --------------------------------------------------------

namespace {

struct ResidualVisitor {
  double theta;
  double x;

  double operator()(const theta_case::AccGeneral& c) const {
    const AccumulationFn& h = c.h;
    double mass;
    if (h.kind() == AccumulationFn::Kind::SeqStep) {
      // two-valued h: the integral is exact
      mass = (1.0 - h.lambda()) * std::expm1(-theta * x * *h.bound());
    } else {
      const double tx = theta * x;
      mass = numerics::integrate([&](double u) { return std::expm1(-tx * h(u)); }, 0.0, 1.0,
                                 {.abs_tol = 1e-14, .rel_tol = 1e-12, .max_intervals = 20000})
                 .value;
    }
    return mass - std::expm1(-theta);
  }
  double operator()(const theta_case::AccBounded& c) const {
    return -std::expm1(-theta) + std::expm1(-theta * x * c.b) / c.b;
  }
  double operator()(const theta_case::Selective& c) const {
    return std::expm1(theta) + std::expm1(-theta * x * c.b) / c.b;
  }
  double operator()(const theta_case::Simple&) const { return std::expm1(theta) - theta * x; }
};

void check_case(const ThetaCase& which) {
  if (const auto* bounded = std::get_if<theta_case::AccBounded>(&which); bounded && !(bounded->b > 0.0)) {
    throw Error(Errc::DomainError, "bounded accumulation case needs B > 0");
  }
  if (const auto* sel = std::get_if<theta_case::Selective>(&which); sel && !(sel->b > 0.0)) {
    throw Error(Errc::DomainError, "selective case needs B > 0");
  }
}

}  // namespace

double theta_residual(const ThetaCase& which, double theta, double x) {
  check_case(which);
  return std::visit(ResidualVisitor{theta, x}, which);
}

double solve_theta(const ThetaCase& which, double x, double /*a*/) {
  check_case(which);
  if (!(x > 1.0)) {
    throw Error(Errc::NoRoot, "theta equations have no positive root for x <= 1 (x = " + std::to_string(x) + ")");
  }
  const numerics::ScalarFn residual = [&](double theta) { return std::visit(ResidualVisitor{theta, x}, which); };

  std::optional<numerics::ScalarFn> slope;
  if (const auto* b = std::get_if<theta_case::AccBounded>(&which)) {
    const double bb = b->b;
    slope = [x, bb](double t) { return std::exp(-t) - x * std::exp(-t * x * bb); };
  } else if (const auto* s = std::get_if<theta_case::Selective>(&which)) {
    const double bb = s->b;
    slope = [x, bb](double t) { return std::exp(t) - x * std::exp(-t * x * bb); };
  } else if (std::holds_alternative<theta_case::Simple>(which)) {
    slope = [x](double t) { return std::exp(t) - x; };
  }
  return numerics::positive_root(residual, slope);
}

// --- constants --------------------------------------------------------------

namespace {

void check_alpha_a(double alpha, double a) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(Errc::DomainError, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(Errc::DomainError, "regularization a must be positive, got " + std::to_string(a));
  }
}

// log(1/alpha) / (a * denom), with theta recovered from exp(-a theta c) = alpha.
BoundConstant make_constant(double alpha, double a, double denom, BoundFamily family, double b) {
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(Errc::DomainError, "constant denominator is not positive for alpha = " + std::to_string(alpha));
  }
  const double log_inv_alpha = -std::log(alpha);
  BoundConstant out;
  out.c = log_inv_alpha / (a * denom);
  out.theta = log_inv_alpha / (a * out.c);
  out.alpha = alpha;
  out.a = a;
  out.family = family;
  out.b = b;
  return out;
}

// log(1 + (1 - alpha^{B/a}) / B)
double selective_denominator(double alpha, double a, double b) {
  return std::log1p(-std::expm1((b / a) * std::log(alpha)) / b);
}

}  // namespace

BoundConstant constant_sort(double alpha, const SortOptions& opts) {
  check_alpha_a(alpha, 1.0);
  std::string warning;
  if (alpha > kSortProvenAlphaMax) {
    if (!opts.allow_unproven_alpha) {
      throw Error(Errc::AlphaOutOfProvenRange,
                  "the sorted-path bound is proven only for alpha <= 0.31 (got " + std::to_string(alpha) +
                      "); pass allow_unproven_alpha to override");
    }
    warning =
        "alpha above 0.31: the sorted-path guarantee rests on strong numerical evidence only, not on a proof";
  }
  const double log_inv_alpha = -std::log(alpha);
  BoundConstant out = make_constant(alpha, 1.0, std::log1p(log_inv_alpha), BoundFamily::Sort, 0.0);
  out.warning = std::move(warning);
  return out;
}

BoundConstant constant_preorder_acc_general(double alpha, double a, const AccumulationFn& h) {
  check_alpha_a(alpha, a);
  double mass;
  if (h.kind() == AccumulationFn::Kind::SeqStep) {
    mass = h.lambda() + (1.0 - h.lambda()) * std::pow(alpha, *h.bound() / a);
  } else {
    const double log_alpha_over_a = std::log(alpha) / a;
    mass = numerics::integrate([&](double u) { return std::exp(log_alpha_over_a * h(u)); }, 0.0, 1.0,
                               {.abs_tol = 1e-12, .rel_tol = 1e-13, .max_intervals = 20000})
               .value;
  }
  if (!(mass > 0.0 && mass <= 1.0)) {
    throw Error(Errc::QuadratureFailure, "integral of alpha^{h/a} left (0, 1]: " + std::to_string(mass));
  }
  return make_constant(alpha, a, -std::log(mass), BoundFamily::PreorderAccGeneral, h.bound().value_or(0.0));
}

BoundConstant constant_preorder_acc_bounded(double alpha, double a, double b) {
  check_alpha_a(alpha, a);
  if (!(b >= 1.0) || !std::isfinite(b)) {
    throw Error(Errc::DomainError, "an accumulation bound B must be >= 1 (h integrates to 1), got " +
                                       std::to_string(b));
  }
  const double shrink = -std::expm1((b / a) * std::log(alpha)) / b;  // (1 - alpha^{B/a}) / B
  if (!(1.0 - shrink > 0.0)) {
    throw Error(Errc::DomainError, "1 - (1 - alpha^{B/a}) / B is not positive");
  }
  return make_constant(alpha, a, -std::log1p(-shrink), BoundFamily::PreorderAccBounded, b);
}

BoundConstant constant_sel(double alpha, double a, double b) {
  check_alpha_a(alpha, a);
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(Errc::DomainError, "selective bound B must be positive, got " + std::to_string(b));
  }
  return make_constant(alpha, a, selective_denominator(alpha, a, b), BoundFamily::Sel, b);
}

BoundConstant constant_knockoff(double alpha, double a) {
  BoundConstant out = constant_sel(alpha, a, 1.0);
  out.family = BoundFamily::Knockoff;
  return out;
}

BoundConstant constant_online_simple(double alpha, double a) {
  check_alpha_a(alpha, a);
  const double log_inv_alpha = -std::log(alpha);
  return make_constant(alpha, a, std::log1p(log_inv_alpha / a), BoundFamily::OnlineSimple, 0.0);
}

BoundConstant constant_online_adaptive(double alpha, double a, double b_cap) {
  BoundConstant out = constant_sel(alpha, a, b_cap);
  out.family = BoundFamily::OnlineAdaptive;
  return out;
}

}  // namespace fdpenv
