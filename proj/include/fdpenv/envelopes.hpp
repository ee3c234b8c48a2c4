#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdpenv/bound_constants.hpp"
#include "fdpenv/paths.hpp"

namespace fdpenv {

/// One point of an envelope curve. v_bar is the raw floor and may exceed size.
struct EnvelopeRecord {
  std::size_t k = 0;
  std::size_t size = 0;
  double v_hat = 0.0;
  std::int64_t v_bar = 0;
  double fdp_bar_raw = 0.0;
  double fdp_bar = 0.0;

  bool operator==(const EnvelopeRecord&) const = default;
};

struct EnvelopeMetadata {
  std::string family;
  double alpha = 0.0;
  double a = 0.0;
  double c = 0.0;
  std::vector<TieBlock> tie_blocks;
  std::size_t dropped_zero_stats = 0;
  std::string warning;
};

/// Records for k = 0..steps; the k = 0 record is the empty set.
struct EnvelopeCurve {
  std::vector<EnvelopeRecord> records;
  EnvelopeMetadata meta;
};

/// Which hypotheses are null; only meaningful in simulations.
struct TruthMask {
  std::vector<char> is_null;
};

/// Guard added before flooring so products that should land on an integer are
/// not pushed below it by representation error.
inline constexpr double kFloorGuard = 1e-9;

inline std::int64_t envelope_vbar(double c, double a, double v_hat) {
  return static_cast<std::int64_t>(std::floor(c * (a + v_hat) + kFloorGuard));
}

/// Fills in the FDP columns: raw = v_bar / size, clamped = min(1, raw), both 0 on the empty set.
EnvelopeRecord make_record(std::size_t k, std::size_t size, double v_hat, std::int64_t v_bar);

/// Vbar(R_k) = floor(c (a + Vhat(R_k))) along the path. Throws
/// Error{FamilyMismatch} when the constant does not belong to the estimator
/// (or its B is below the estimator's) and Error{LengthMismatch} when the
/// series and path disagree.
EnvelopeCurve compute_envelope(const Path& path, const VhatSeries& vhat, const BoundConstant& constant);

/// floor(n t / alpha) at t = p_(k) along the sorted path.
EnvelopeCurve robbins_envelope(std::span<const double> p, double alpha);

/// floor(sqrt(n/2 log(1/alpha)) + n t) at t = p_(k). Throws Error{AlphaTooLargeForDkw} for alpha >= 0.5.
EnvelopeCurve dkw_envelope(std::span<const double> p, double alpha);

/// FDP(R_k) = |R_k ∩ H0| / |R_k| for k = 0..steps (0 on the empty set).
std::vector<double> true_fdp_curve(const Path& path, const TruthMask& truth);

/// Value of the Robbins bound n t / alpha above which the unfloored sorted
/// bound c (1 + n t) is strictly tighter; c / (1 - alpha c). Requires alpha c < 1.
double robbins_crossover(double alpha);

}  // namespace fdpenv
