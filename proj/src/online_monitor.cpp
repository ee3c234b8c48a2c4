#include "fdpenv/online_monitor.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "fdpenv/error.hpp"
#include "fdpenv/paths.hpp"

namespace fdpenv {

namespace {

std::uint64_t next_monitor_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

BoundConstant resolve_constant(OnlineMode mode, double alpha, double a, std::optional<double> b_cap) {
  if (mode == OnlineMode::Simple) return constant_online_simple(alpha, a);
  if (!b_cap) throw Error(Errc::MissingBCap, "adaptive mode needs the declared cap B on alpha_j / (1 - lambda_j)");
  return constant_online_adaptive(alpha, a, *b_cap);
}

}  // namespace

OnlineMonitor::OnlineMonitor(OnlineMode mode, double alpha, double a, std::optional<double> b_cap)
    : mode_(mode), constant_(resolve_constant(mode, alpha, a, b_cap)), b_cap_(b_cap), id_(next_monitor_id()) {}

LevelTicket OnlineMonitor::commit_level(double alpha_j, std::optional<double> lambda_j) {
  if (pending_) {
    throw Error(Errc::TicketOutstanding, "level for step " + std::to_string(pending_->step) + " is still unobserved");
  }
  if (!(alpha_j > 0.0 && alpha_j < 1.0)) {
    throw Error(Errc::DomainError, "alpha_j must lie in (0, 1), got " + std::to_string(alpha_j));
  }
  if (lambda_j && !(*lambda_j < 1.0)) throw Error(Errc::DomainError, "lambda_j must be below 1");

  if (mode_ == OnlineMode::Adaptive) {
    if (!lambda_j) throw Error(Errc::MissingLambda, "adaptive mode needs lambda_j with every level");
    const double ratio = alpha_j / (1.0 - *lambda_j);
    if (ratio > *b_cap_) {
      throw Error(Errc::BCapExceeded,
                  "alpha_j / (1 - lambda_j) = " + std::to_string(ratio) + " exceeds B = " + std::to_string(*b_cap_));
    }
  }
  if (lambda_j && *lambda_j < alpha_j) {
    throw Error(Errc::LambdaBelowAlpha,
                "lambda_j " + std::to_string(*lambda_j) + " is below alpha_j " + std::to_string(alpha_j));
  }

  const std::uint64_t step = step_ + 1;
  pending_ = Pending{step, alpha_j, lambda_j.value_or(0.0)};
  return LevelTicket(id_, step);
}

OnlinePoint OnlineMonitor::observe(const LevelTicket& ticket, double p_j) {
  if (!pending_ || ticket.monitor_ != id_ || ticket.step_ != pending_->step) {
    throw Error(Errc::StaleTicket, "ticket for step " + std::to_string(ticket.step_) + " is not outstanding");
  }
  if (!(p_j >= 0.0 && p_j <= 1.0)) {
    throw Error(Errc::ValueOutOfRange, "p_j must lie in [0, 1], got " + std::to_string(p_j));
  }
  const Pending level = *pending_;
  pending_.reset();

  ++step_;
  const bool rejected = p_j <= level.alpha_j;
  if (rejected) ++rejections_;
  if (mode_ == OnlineMode::Simple) {
    sum_vhat_ += level.alpha_j;
  } else {
    b_seen_ = std::max(b_seen_, level.alpha_j / (1.0 - level.lambda_j));
    sum_vhat_ += online_adaptive_increment(p_j, level.alpha_j, level.lambda_j);
  }
  return OnlinePoint{rejected, current()};
}

EnvelopeRecord OnlineMonitor::current() const {
  return make_record(step_, rejections_, sum_vhat_, envelope_vbar(constant_.c, constant_.a, sum_vhat_));
}

}  // namespace fdpenv
