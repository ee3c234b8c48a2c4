#include "fdpenv/session_service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fdpenv/error.hpp"
#include "fdpenv/io.hpp"
#include "httplib.h"

namespace fdpenv {

using nlohmann::json;

json to_json(const SelectResult& result) {
  return {{"p_unmasked", result.p_unmasked},
          {"included", result.included},
          {"envelope_point", to_json(result.point)},
          {"remaining", result.remaining}};
}

SessionStore::SessionStore(std::optional<std::filesystem::path> state_dir) : state_dir_(std::move(state_dir)) {
  if (!state_dir_) return;
  std::filesystem::create_directories(*state_dir_);
  for (const auto& file : std::filesystem::directory_iterator(*state_dir_)) {
    const std::filesystem::path& path = file.path();
    const std::string stem = path.stem().string();
    if (path.extension() != ".json" || stem.size() < 2 || stem[0] != 's') continue;
    std::uint64_t number = 0;
    try {
      number = std::stoull(stem.substr(1));
    } catch (const std::exception&) {
      continue;
    }
    std::ifstream in(path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "session file " + path.string() + ": " + e.what());
    }
    sessions_.emplace(stem, std::make_shared<Entry>(Session::from_persisted_json(doc)));
    next_id_ = std::max(next_id_, number + 1);
  }
}

std::string SessionStore::create(std::vector<Hypothesis> hypotheses, const SessionConfig& config) {
  auto entry = std::make_shared<Entry>(Session(std::move(hypotheses), config));
  std::string id;
  {
    std::lock_guard lock(map_mutex_);
    id = "s" + std::to_string(next_id_++);
    sessions_.emplace(id, entry);
  }
  std::lock_guard lock(entry->mutex);
  persist(id, entry->session);
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) const {
  std::lock_guard lock(map_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::UnknownId, "no session '" + session_id + "'");
  return it->second;
}

json SessionStore::state(const std::string& session_id) const {
  const auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  json out = entry->session.state();
  out["id"] = session_id;
  return out;
}

json SessionStore::select(const std::string& session_id, const std::string& hypothesis_id) {
  const auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  const SelectResult result = entry->session.select_next(hypothesis_id);
  persist(session_id, entry->session);
  return to_json(result);
}

std::string SessionStore::envelope_csv(const std::string& session_id) const {
  const auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return io::envelope_csv(entry->session.envelope());
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, entry] : sessions_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

void SessionStore::persist(const std::string& session_id, const Session& session) const {
  if (!state_dir_) return;
  const std::filesystem::path target = *state_dir_ / (session_id + ".json");
  const std::filesystem::path tmp = *state_dir_ / (session_id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << session.to_persisted_json().dump() << '\n';
  }
  std::filesystem::rename(tmp, target);
}

namespace {

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownId: return 404;
    case Errc::AlreadySelected: return 409;
    default: return 400;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, to_string(Errc::ParseError), e.what());
  }
}

std::filesystem::path resolve_dataset(const SessionApiOptions& options, const std::string& ref) {
  if (!options.data_dir) throw Error(Errc::ConfigInvalid, "dataset references are disabled on this server");
  const std::filesystem::path rel(ref);
  if (rel.empty() || rel.is_absolute()) throw Error(Errc::ConfigInvalid, "dataset must be a relative path");
  for (const auto& part : rel) {
    if (part == "..") throw Error(Errc::ConfigInvalid, "dataset path may not contain '..'");
  }
  return *options.data_dir / rel;
}

SessionConfig parse_config(const json& body) {
  SessionConfig config;
  const json c = body.value("config", json::object());
  config.p_star = c.value("p_star", config.p_star);
  config.lambda = c.value("lambda", config.lambda);
  config.alpha = c.value("alpha", config.alpha);
  config.a = c.value("a", config.a);
  return config;
}

std::vector<Hypothesis> parse_hypotheses(const json& body, const SessionApiOptions& options) {
  std::vector<Hypothesis> hyps;
  if (body.contains("hypotheses")) {
    for (const json& h : body.at("hypotheses")) {
      hyps.push_back({h.at("id").get<std::string>(), h.at("p").get<double>(), h.value("x", json::object())});
    }
    return hyps;
  }
  if (!body.contains("dataset")) throw Error(Errc::ConfigInvalid, "body needs 'hypotheses' or 'dataset'");
  const io::InputDataset data =
      io::parse_dataset(resolve_dataset(options, body.at("dataset").get<std::string>()), io::DatasetKind::PValues);
  for (const io::PValueRow& row : data.pvalues) hyps.push_back({row.id, row.p, row.x});
  return hyps;
}

}  // namespace

void mount_session_api(httplib::Server& server, SessionStore& store, const SessionApiOptions& options) {
  server.Post("/sessions", [&store, options](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const std::string id = store.create(parse_hypotheses(body, options), parse_config(body));
      send_json(res, {{"id", id}, {"state", store.state(id)}}, 201);
    });
  });
  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, store.state(req.matches[1])); });
  });
  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/select)", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      send_json(res, store.select(req.matches[1], body.at("id").get<std::string>()));
    });
  });
  server.Get(R"(/sessions/([A-Za-z0-9_-]+)/envelope\.csv)",
             [&store](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { res.set_content(store.envelope_csv(req.matches[1]), "text/csv; charset=utf-8"); });
             });
}

}  // namespace fdpenv
