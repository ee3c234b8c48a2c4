#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <sstream>
#include <thread>

#include "fdpenv/io.hpp"
#include "fdpenv/session_service.hpp"
#include "httplib.h"
#include "test_support.hpp"

using namespace fdpenv;
using nlohmann::json;

namespace {

class ServerFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    SessionApiOptions options;
    options.data_dir = FDPENV_FIXTURE_DIR;
    mount_session_api(server_, store_, options);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  std::string create(const json& body) {
    auto res = client().Post("/sessions", body.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body).at("id").get<std::string>();
  }

  SessionStore store_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

const json kInline = {{"config", {{"p_star", 0.5}, {"lambda", 0.5}, {"alpha", 0.05}, {"a", 1.0}}},
                      {"hypotheses",
                       {{{"id", "A"}, {"p", 0.7}, {"x", {{"score", 1}}}},
                        {{"id", "B"}, {"p", 0.1}},
                        {{"id", "C"}, {"p", 0.4}}}}};

}  // namespace

TEST_F(ServerFixture, CreateSelectAndFetchEnvelope) {
  const std::string id = create(kInline);
  EXPECT_EQ(id, "s1");
  auto c = client();

  auto res = c.Post("/sessions/" + id + "/select", R"({"id":"A"})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const json first = json::parse(res->body);
  EXPECT_EQ(first["p_unmasked"], 0.7);
  EXPECT_EQ(first["included"], false);
  EXPECT_EQ(first["envelope_point"]["v_hat"], 1.0);
  EXPECT_EQ(first["remaining"], json({"B", "C"}));

  res = c.Post("/sessions/" + id + "/select", R"({"id":"B"})", "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["envelope_point"]["v_bar"], 8);

  res = c.Get("/sessions/" + id);
  ASSERT_EQ(res->status, 200);
  const json state = json::parse(res->body);
  EXPECT_EQ(state["prefix"].size(), 2u);
  EXPECT_EQ(state["remaining"].size(), 1u);
  EXPECT_EQ(state["remaining"][0]["g_p"], 0.4);
  EXPECT_FALSE(state["remaining"][0].contains("p"));

  res = c.Get("/sessions/" + id + "/envelope.csv");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type").rfind("text/csv", 0), 0u);
  std::istringstream csv(res->body);
  const std::vector<EnvelopeRecord> records = io::parse_envelope_csv(csv);
  ASSERT_EQ(records.size(), state["envelope"].size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    EXPECT_EQ(records[k].v_bar, state["envelope"][k]["v_bar"].get<std::int64_t>());
    EXPECT_EQ(records[k].fdp_bar, state["envelope"][k]["fdp_bar"].get<double>());
  }
}

TEST_F(ServerFixture, ErrorStatuses) {
  auto c = client();
  auto res = c.Get("/sessions/s99");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["error"], "UnknownId");

  const std::string id = create(kInline);
  res = c.Post("/sessions/" + id + "/select", R"({"id":"A"})", "application/json");
  res = c.Post("/sessions/" + id + "/select", R"({"id":"A"})", "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body)["error"], "AlreadySelected");
  res = c.Post("/sessions/" + id + "/select", R"({"id":"nope"})", "application/json");
  EXPECT_EQ(res->status, 404);
  res = c.Post("/sessions/" + id + "/select", "not json", "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "ParseError");

  json bad = kInline;
  bad["config"]["lambda"] = 0.2;
  res = c.Post("/sessions", bad.dump(), "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "ConfigInvalid");
}

TEST_F(ServerFixture, DatasetReferences) {
  const std::string id = create({{"dataset", "session_pvalues.csv"}});
  auto res = client().Get("/sessions/" + id);
  const json state = json::parse(res->body);
  ASSERT_EQ(state["remaining"].size(), 3u);
  EXPECT_EQ(state["remaining"][0]["x"]["score"], 1.5);
  EXPECT_EQ(state["remaining"][2]["x"]["score"], "abc");

  res = client().Post("/sessions", json{{"dataset", "../CMakeLists.txt"}}.dump(), "application/json");
  EXPECT_EQ(res->status, 400);
  res = client().Post("/sessions", json{{"dataset", "/etc/passwd"}}.dump(), "application/json");
  EXPECT_EQ(res->status, 400);
}

TEST(SessionStore, PersistsAndReloads) {
  const auto dir = std::filesystem::temp_directory_path() / ("fdpenv_store_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  json before;
  {
    SessionStore store(dir);
    const std::string id = store.create({{"A", 0.2, {}}, {"B", 0.9, {}}}, {});
    store.select(id, "B");
    before = store.state(id);
  }
  SessionStore reloaded(dir);
  EXPECT_EQ(reloaded.ids(), (std::vector<std::string>{"s1"}));
  EXPECT_EQ(reloaded.state("s1"), before);
  EXPECT_EQ(reloaded.create({{"C", 0.5, {}}}, {}), "s2");
  std::filesystem::remove_all(dir);
}

TEST(SessionStore, ConcurrentSelectionsAreSerialized) {
  SessionStore store;
  std::vector<Hypothesis> hs;
  for (int i = 0; i < 200; ++i) hs.push_back({"h" + std::to_string(i), (i + 0.5) / 200.0, {}});
  const std::string id = store.create(hs, {});
  std::vector<std::thread> workers;
  std::atomic<int> conflicts{0};
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        try {
          store.select(id, "h" + std::to_string(i));
        } catch (const Error& e) {
          if (e.code() == Errc::AlreadySelected) ++conflicts;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(conflicts.load(), 600);
  EXPECT_EQ(store.state(id)["steps"], 200);
}
