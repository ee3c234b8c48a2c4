#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "fdpenv/bound_constants.hpp"
#include "fdpenv/envelopes.hpp"

namespace fdpenv {

enum class OnlineMode { Simple, Adaptive };

/// Proof that a level was committed before its p-value was seen. Only the
/// monitor that issued it can redeem it, and only once.
class LevelTicket {
 public:
  std::uint64_t step() const noexcept { return step_; }

 private:
  friend class OnlineMonitor;
  LevelTicket(std::uint64_t monitor, std::uint64_t step) : monitor_(monitor), step_(step) {}

  std::uint64_t monitor_;
  std::uint64_t step_;
};

struct OnlinePoint {
  bool rejected = false;
  EnvelopeRecord record;
};

/// Streaming envelope over R_k = {j <= k : p_j <= alpha_j}.
///
/// Each step is two-phase: commit_level() freezes alpha_j (and lambda_j) and
/// hands back a ticket, observe() takes that ticket with p_j. A level can
/// therefore never depend on the p-value it is applied to. State is O(1).
class OnlineMonitor {
 public:
  /// Simple mode uses Vhat = sum alpha_j; Adaptive uses
  /// sum alpha_j / (1 - lambda_j) 1{p_j > lambda_j} and needs b_cap, the
  /// declared sup of alpha_j / (1 - lambda_j). Throws Error{MissingBCap}.
  OnlineMonitor(OnlineMode mode, double alpha, double a, std::optional<double> b_cap = std::nullopt);

  /// Throws Error{TicketOutstanding}, Error{BCapExceeded}, Error{LambdaBelowAlpha},
  /// Error{MissingLambda} (adaptive without lambda_j).
  LevelTicket commit_level(double alpha_j, std::optional<double> lambda_j = std::nullopt);

  /// Throws Error{StaleTicket} unless `ticket` is the one currently outstanding.
  OnlinePoint observe(const LevelTicket& ticket, double p_j);

  OnlineMode mode() const noexcept { return mode_; }
  const BoundConstant& constant() const noexcept { return constant_; }
  std::optional<double> b_cap() const noexcept { return b_cap_; }
  std::size_t steps() const noexcept { return step_; }
  std::size_t rejections() const noexcept { return rejections_; }
  double v_hat() const noexcept { return sum_vhat_; }
  double b_seen() const noexcept { return b_seen_; }
  bool has_outstanding() const noexcept { return pending_.has_value(); }
  /// Envelope point at the current step (k = 0 before any observation).
  EnvelopeRecord current() const;

 private:
  struct Pending {
    std::uint64_t step;
    double alpha_j;
    double lambda_j;
  };

  OnlineMode mode_;
  BoundConstant constant_;
  std::optional<double> b_cap_;
  std::uint64_t id_;
  std::size_t step_ = 0;
  std::size_t rejections_ = 0;
  double sum_vhat_ = 0.0;
  double b_seen_ = 0.0;
  std::optional<Pending> pending_;
};

}  // namespace fdpenv
