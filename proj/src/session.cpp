#include "fdpenv/session.hpp"

#include <algorithm>
#include <cmath>

#include "fdpenv/error.hpp"
#include "fdpenv/paths.hpp"

namespace fdpenv {

using nlohmann::json;

double mask_pvalue(double p, double p_star) {
  return std::min(p, p_star / (1.0 - p_star) * (1.0 - p));
}

std::vector<double> mask(std::span<const double> p, double p_star) {
  if (!(p_star > 0.0 && p_star < 1.0)) throw Error(Errc::DomainError, "p_star must lie in (0, 1)");
  std::vector<double> g(p.size());
  std::transform(p.begin(), p.end(), g.begin(), [p_star](double v) { return mask_pvalue(v, p_star); });
  return g;
}

namespace {

void check_config(const SessionConfig& config) {
  if (!(config.p_star > 0.0 && config.p_star < 1.0)) throw Error(Errc::ConfigInvalid, "p_star must lie in (0, 1)");
  if (config.lambda < config.p_star) {
    throw Error(Errc::ConfigInvalid, "lambda " + std::to_string(config.lambda) + " is below p_star " +
                                         std::to_string(config.p_star));
  }
  if (!(config.lambda < 1.0)) throw Error(Errc::ConfigInvalid, "lambda must be below 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(Errc::ConfigInvalid, "alpha must lie in (0, 1)");
  if (!(config.a > 0.0)) throw Error(Errc::ConfigInvalid, "a must be positive");
}

json config_json(const SessionConfig& config) {
  return {{"p_star", config.p_star}, {"lambda", config.lambda}, {"alpha", config.alpha}, {"a", config.a}};
}

}  // namespace

json to_json(const EnvelopeRecord& r) {
  return {{"k", r.k},       {"size", r.size},           {"v_hat", r.v_hat},
          {"v_bar", r.v_bar}, {"fdp_bar_raw", r.fdp_bar_raw}, {"fdp_bar", r.fdp_bar}};
}

json to_json(const BoundConstant& c) {
  json out = {{"c", c.c},         {"theta", c.theta}, {"alpha", c.alpha},
              {"a", c.a},         {"family", std::string(to_string(c.family))}, {"b", c.b}};
  if (!c.warning.empty()) out["warning"] = c.warning;
  return out;
}

Session::Session(std::vector<Hypothesis> hypotheses, const SessionConfig& config)
    : hypotheses_(std::move(hypotheses)), config_(config) {
  check_config(config_);
  if (hypotheses_.empty()) throw Error(Errc::EmptyInput, "a session needs at least one hypothesis");
  for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
    const Hypothesis& h = hypotheses_[i];
    if (!(h.p >= 0.0 && h.p <= 1.0)) {
      throw Error(Errc::ValueOutOfRange, "p-value of '" + h.id + "' is outside [0, 1]");
    }
    if (!index_.emplace(h.id, i).second) throw Error(Errc::DuplicateId, "hypothesis id '" + h.id + "' repeats");
  }
  selected_.assign(hypotheses_.size(), 0);
  // Fixed for the lifetime of the session.
  constant_ = constant_sel(config_.alpha, config_.a, config_.p_star / (1.0 - config_.lambda));

  envelope_.meta.family = std::string(to_string(constant_.family));
  envelope_.meta.alpha = constant_.alpha;
  envelope_.meta.a = constant_.a;
  envelope_.meta.c = constant_.c;
  envelope_.records.push_back(make_record(0, 0, 0.0, envelope_vbar(constant_.c, constant_.a, 0.0)));
}

SelectResult Session::select_next(const std::string& id) {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::UnknownId, "no hypothesis '" + id + "'");
  const std::size_t idx = it->second;
  if (selected_[idx]) throw Error(Errc::AlreadySelected, "hypothesis '" + id + "' was already selected");

  selected_[idx] = 1;
  const double p = hypotheses_[idx].p;
  const bool included = p <= config_.p_star;
  if (included) ++size_;
  v_hat_ += sel_increment(p, config_.p_star, config_.lambda);
  order_.push_back(idx);
  prefix_.push_back({id, p, included});

  const EnvelopeRecord point =
      make_record(order_.size(), size_, v_hat_, envelope_vbar(constant_.c, constant_.a, v_hat_));
  envelope_.records.push_back(point);
  return {p, included, point, remaining_ids()};
}

std::vector<MaskedEntry> Session::masked_view() const {
  std::vector<MaskedEntry> view;
  for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
    if (selected_[i]) continue;
    view.push_back({hypotheses_[i].id, hypotheses_[i].side_info, mask_pvalue(hypotheses_[i].p, config_.p_star)});
  }
  return view;
}

std::vector<std::string> Session::remaining_ids() const {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
    if (!selected_[i]) ids.push_back(hypotheses_[i].id);
  }
  return ids;
}

std::vector<std::size_t> Session::ordering() const { return order_; }

std::vector<double> Session::raw_pvalues() const {
  std::vector<double> p;
  p.reserve(hypotheses_.size());
  for (const Hypothesis& h : hypotheses_) p.push_back(h.p);
  return p;
}

json Session::state() const {
  json remaining = json::array();
  for (const MaskedEntry& e : masked_view()) {
    remaining.push_back({{"id", e.id}, {"x", e.side_info}, {"g_p", e.g_p}});
  }
  json prefix = json::array();
  json log = json::array();
  for (std::size_t j = 0; j < prefix_.size(); ++j) {
    const PrefixEntry& e = prefix_[j];
    prefix.push_back(
        {{"id", e.id}, {"p", e.p}, {"included", e.included}, {"x", hypotheses_[order_[j]].side_info}});
    log.push_back({{"step", j + 1}, {"action", "select"}, {"id", e.id}});
  }
  json envelope = json::array();
  for (const EnvelopeRecord& r : envelope_.records) envelope.push_back(to_json(r));
  return {{"config", config_json(config_)},
          {"constant", to_json(constant_)},
          {"n", hypotheses_.size()},
          {"steps", order_.size()},
          {"remaining", std::move(remaining)},
          {"prefix", std::move(prefix)},
          {"envelope", std::move(envelope)},
          {"log", std::move(log)}};
}

json Session::to_persisted_json() const {
  json hyps = json::array();
  for (const Hypothesis& h : hypotheses_) hyps.push_back({{"id", h.id}, {"p", h.p}, {"x", h.side_info}});
  json selections = json::array();
  for (const PrefixEntry& e : prefix_) selections.push_back(e.id);
  return {{"version", 1}, {"config", config_json(config_)}, {"hypotheses", hyps}, {"selections", selections}};
}

Session Session::from_persisted_json(const json& doc) {
  try {
    SessionConfig config;
    const json& c = doc.at("config");
    config.p_star = c.at("p_star").get<double>();
    config.lambda = c.at("lambda").get<double>();
    config.alpha = c.at("alpha").get<double>();
    config.a = c.at("a").get<double>();
    std::vector<Hypothesis> hyps;
    for (const json& h : doc.at("hypotheses")) {
      hyps.push_back({h.at("id").get<std::string>(), h.at("p").get<double>(), h.value("x", json::object())});
    }
    Session session(std::move(hyps), config);
    for (const json& id : doc.at("selections")) session.select_next(id.get<std::string>());
    return session;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("persisted session: ") + e.what());
  }
}

}  // namespace fdpenv
