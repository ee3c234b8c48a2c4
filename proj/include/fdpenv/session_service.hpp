#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fdpenv/session.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace fdpenv {

/// Thread-safe registry of interactive sessions. Selections on one session are
/// serialized by that session's mutex; distinct sessions proceed independently.
/// With a state directory every session is written to <dir>/<id>.json after
/// each change and reloaded on construction.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> state_dir = std::nullopt);

  /// Returns the new session id ("s1", "s2", ...).
  std::string create(std::vector<Hypothesis> hypotheses, const SessionConfig& config);

  /// Throws Error{UnknownId} for an unknown session.
  nlohmann::json state(const std::string& session_id) const;
  nlohmann::json select(const std::string& session_id, const std::string& hypothesis_id);
  std::string envelope_csv(const std::string& session_id) const;
  std::vector<std::string> ids() const;

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    mutable std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& session_id) const;
  void persist(const std::string& session_id, const Session& session) const;

  mutable std::mutex map_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
  std::optional<std::filesystem::path> state_dir_;
};

struct SessionApiOptions {
  /// Root against which "dataset" references in POST /sessions resolve.
  /// Absolute paths and ".." components are refused. Unset disables references.
  std::optional<std::filesystem::path> data_dir;
};

/// Registers POST /sessions, GET /sessions/{id}, POST /sessions/{id}/select and
/// GET /sessions/{id}/envelope.csv. Errors answer {"error": code, "message": text}
/// with 400, 404 or 409.
void mount_session_api(httplib::Server& server, SessionStore& store, const SessionApiOptions& options = {});

/// JSON body of POST /select: the unmasked p-value, the new envelope point and the remaining ids.
nlohmann::json to_json(const SelectResult& result);

}  // namespace fdpenv
