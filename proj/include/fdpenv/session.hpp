#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fdpenv/bound_constants.hpp"
#include "fdpenv/envelopes.hpp"
#include "json.hpp"

namespace fdpenv {

/// g(p) = min(p, p_star / (1 - p_star) * (1 - p)); min(p, 1 - p) at p_star = 1/2.
double mask_pvalue(double p, double p_star);

std::vector<double> mask(std::span<const double> p, double p_star);

struct SessionConfig {
  double p_star = 0.5;
  double lambda = 0.5;
  double alpha = 0.05;
  double a = 1.0;
};

struct Hypothesis {
  std::string id;
  double p = 0.0;
  nlohmann::json side_info = nlohmann::json::object();
};

struct MaskedEntry {
  std::string id;
  nlohmann::json side_info;
  double g_p = 0.0;
};

struct PrefixEntry {
  std::string id;
  double p = 0.0;
  bool included = false;
};

struct SelectResult {
  double p_unmasked = 0.0;
  bool included = false;
  EnvelopeRecord point;
  std::vector<std::string> remaining;
};

/// Interactive selective path: hypotheses are picked one at a time from their
/// side information and masked p-values; each pick unmasks that p-value and
/// extends the envelope with the selective estimate and constant.
///
/// Raw p-values of unselected hypotheses never leave the object except through
/// to_persisted_json(), which is for server-side storage only.
class Session {
 public:
  /// Throws Error{ConfigInvalid}, Error{EmptyInput}, Error{DuplicateId},
  /// Error{ValueOutOfRange}.
  Session(std::vector<Hypothesis> hypotheses, const SessionConfig& config);

  /// Throws Error{UnknownId}, Error{AlreadySelected}.
  SelectResult select_next(const std::string& id);

  /// Snapshot for rendering: config, constant, masked remaining pool,
  /// unmasked prefix, envelope and the selection log.
  nlohmann::json state() const;

  std::vector<MaskedEntry> masked_view() const;
  std::vector<std::string> remaining_ids() const;
  const std::vector<PrefixEntry>& prefix() const noexcept { return prefix_; }
  const EnvelopeCurve& envelope() const noexcept { return envelope_; }
  const BoundConstant& constant() const noexcept { return constant_; }
  const SessionConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return hypotheses_.size(); }
  /// 0-based indices of the selected hypotheses in selection order.
  std::vector<std::size_t> ordering() const;
  /// Raw p-values in input order. Server-side use only.
  std::vector<double> raw_pvalues() const;

  nlohmann::json to_persisted_json() const;
  /// Rebuilds a session by replaying its recorded selections.
  static Session from_persisted_json(const nlohmann::json& doc);

 private:
  std::vector<Hypothesis> hypotheses_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<char> selected_;
  SessionConfig config_;
  BoundConstant constant_;
  std::vector<PrefixEntry> prefix_;
  std::vector<std::size_t> order_;
  EnvelopeCurve envelope_;
  std::size_t size_ = 0;
  double v_hat_ = 0.0;
};

nlohmann::json to_json(const EnvelopeRecord& record);
nlohmann::json to_json(const BoundConstant& constant);

}  // namespace fdpenv
