#include "fdpenv/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "fdpenv/error.hpp"

namespace fdpenv {

EnvelopeRecord make_record(std::size_t k, std::size_t size, double v_hat, std::int64_t v_bar) {
  EnvelopeRecord r;
  r.k = k;
  r.size = size;
  r.v_hat = v_hat;
  r.v_bar = v_bar;
  if (size > 0) {
    r.fdp_bar_raw = static_cast<double>(v_bar) / static_cast<double>(size);
    r.fdp_bar = std::min(1.0, r.fdp_bar_raw);
  }
  return r;
}

namespace {

// Relative slack when comparing a constant's B against the estimator's.
constexpr double kBSlack = 1e-12;

bool b_covers(double constant_b, double needed) { return constant_b >= needed * (1.0 - kBSlack); }

[[noreturn]] void mismatch(const BoundConstant& constant, const std::string& what) {
  throw Error(Errc::FamilyMismatch,
              "constant family '" + std::string(to_string(constant.family)) + "' cannot bound " + what);
}

void check_family(const VhatSeries& vhat, const BoundConstant& constant) {
  std::visit(
      [&](const auto& est) {
        using T = std::decay_t<decltype(est)>;
        if constexpr (std::is_same_v<T, estimator::Sort>) {
          if (constant.family != BoundFamily::Sort) mismatch(constant, "a sorted-path estimate");
        } else if constexpr (std::is_same_v<T, estimator::Acc>) {
          if (constant.family == BoundFamily::PreorderAccGeneral) return;
          if (constant.family != BoundFamily::PreorderAccBounded) mismatch(constant, "an accumulation estimate");
          if (!est.h.bound()) mismatch(constant, "an unbounded accumulation function");
          if (!b_covers(constant.b, *est.h.bound())) mismatch(constant, "an accumulation function above its B");
        } else if constexpr (std::is_same_v<T, estimator::Sel>) {
          if (constant.family != BoundFamily::Sel && constant.family != BoundFamily::Knockoff) {
            mismatch(constant, "a selective estimate");
          }
          if (!b_covers(constant.b, est.p_star / (1.0 - est.lambda))) {
            mismatch(constant, "a selective estimate with p_star / (1 - lambda) above its B");
          }
        } else if constexpr (std::is_same_v<T, estimator::OnlineSimple>) {
          if (constant.family != BoundFamily::OnlineSimple) mismatch(constant, "an online-simple estimate");
        } else {
          if (constant.family != BoundFamily::OnlineAdaptive) mismatch(constant, "an online-adaptive estimate");
          if (!b_covers(constant.b, est.b_seen)) mismatch(constant, "a stream whose alpha_j / (1 - lambda_j) exceeds B");
        }
      },
      vhat.estimator);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::DomainError, "alpha must lie in (0, 1)");
}

template <typename BoundAt>
EnvelopeCurve sorted_baseline(std::span<const double> p, const std::string& family, double alpha, BoundAt bound_at) {
  const PathWithVhat sorted = build_sorted_path(p);
  EnvelopeCurve curve;
  curve.meta.family = family;
  curve.meta.alpha = alpha;
  curve.meta.tie_blocks = sorted.path.tie_blocks;
  curve.records.reserve(sorted.path.steps() + 1);
  curve.records.push_back(make_record(0, 0, 0.0, bound_at(0.0)));
  for (std::size_t k = 1; k <= sorted.path.steps(); ++k) {
    const double t = p[sorted.path.ordering[k - 1]];
    curve.records.push_back(make_record(k, sorted.path.size_at(k), sorted.vhat.at(k), bound_at(t)));
  }
  return curve;
}

}  // namespace

EnvelopeCurve compute_envelope(const Path& path, const VhatSeries& vhat, const BoundConstant& constant) {
  if (vhat.values.size() != path.steps()) {
    throw Error(Errc::LengthMismatch, "estimate has " + std::to_string(vhat.values.size()) + " steps, path has " +
                                          std::to_string(path.steps()));
  }
  check_family(vhat, constant);

  EnvelopeCurve curve;
  curve.meta.family = std::string(to_string(constant.family));
  curve.meta.alpha = constant.alpha;
  curve.meta.a = constant.a;
  curve.meta.c = constant.c;
  curve.meta.tie_blocks = path.tie_blocks;
  curve.meta.dropped_zero_stats = path.dropped_zero_stats;
  curve.meta.warning = constant.warning;

  curve.records.reserve(path.steps() + 1);
  for (std::size_t k = 0; k <= path.steps(); ++k) {
    const double v_hat = vhat.at(k);
    curve.records.push_back(make_record(k, path.size_at(k), v_hat, envelope_vbar(constant.c, constant.a, v_hat)));
  }
  return curve;
}

EnvelopeCurve robbins_envelope(std::span<const double> p, double alpha) {
  check_alpha(alpha);
  const double n = static_cast<double>(p.size());
  EnvelopeCurve curve = sorted_baseline(p, "robbins", alpha, [&](double t) {
    return static_cast<std::int64_t>(std::floor(n * t / alpha + kFloorGuard));
  });
  curve.meta.c = 1.0 / alpha;
  return curve;
}

EnvelopeCurve dkw_envelope(std::span<const double> p, double alpha) {
  check_alpha(alpha);
  if (!(alpha < 0.5)) {
    throw Error(Errc::AlphaTooLargeForDkw, "the one-sided DKW band needs alpha < 0.5, got " + std::to_string(alpha));
  }
  const double n = static_cast<double>(p.size());
  const double offset = std::sqrt(0.5 * n * std::log(1.0 / alpha));
  return sorted_baseline(p, "dkw", alpha, [&](double t) {
    return static_cast<std::int64_t>(std::floor(offset + n * t + kFloorGuard));
  });
}

std::vector<double> true_fdp_curve(const Path& path, const TruthMask& truth) {
  std::vector<std::size_t> nulls_in_prefix(path.rejection_order.size() + 1, 0);
  for (std::size_t i = 0; i < path.rejection_order.size(); ++i) {
    const std::size_t idx = path.rejection_order[i];
    if (idx >= truth.is_null.size()) throw Error(Errc::LengthMismatch, "truth mask shorter than the path");
    nulls_in_prefix[i + 1] = nulls_in_prefix[i] + (truth.is_null[idx] ? 1 : 0);
  }
  std::vector<double> fdp(path.steps() + 1, 0.0);
  for (std::size_t k = 1; k <= path.steps(); ++k) {
    const std::size_t size = path.size_at(k);
    if (size > 0) fdp[k] = static_cast<double>(nulls_in_prefix[size]) / static_cast<double>(size);
  }
  return fdp;
}

double robbins_crossover(double alpha) {
  const double c = constant_sort(alpha, {.allow_unproven_alpha = true}).c;
  if (!(alpha * c < 1.0)) {
    throw Error(Errc::DomainError, "the sorted bound never undercuts Robbins at this alpha");
  }
  return c / (1.0 - alpha * c);
}

}  // namespace fdpenv
