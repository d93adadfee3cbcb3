#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "fixtures.hpp"
#include "linkforge/preprocess.hpp"
#include "linkforge/service.hpp"

namespace lf = linkforge;
namespace fs = std::filesystem;
using lf::json;

namespace {

fs::path make_session(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("lf_service_" + name);
  fs::remove_all(dir);
  auto ds = lf::preprocess_dataset(fixture::noisy_community(150, 300, 4), {}).dataset;
  lf::TuningParams p;
  p.n_contacts = 60;
  p.n_weights = 4;
  p.seed = 3;
  p.threads = 1;
  auto s = lf::sample_session(ds, p);
  lf::save_session(s, dir);
  return dir;
}

// Runs a service on a free port for the lifetime of the object.
struct Running {
  lf::ReviewService svc;
  int port;
  std::thread th;
  httplib::Client client;

  explicit Running(const fs::path& dir, std::optional<fs::path> statics = std::nullopt)
      : svc(dir, statics), port(svc.bind("127.0.0.1", 0)), th([this] { svc.serve(); }), client("127.0.0.1", port) {
    svc.wait_until_ready();
  }
  ~Running() {
    svc.stop();
    th.join();
  }

  json get(const std::string& path, int expect = 200) {
    auto r = client.Get(path);
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
  json post(const std::string& path, const std::string& body, int expect = 200) {
    auto r = client.Post(path, body, "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
};

}  // namespace

TEST(Service, SessionAndPairs) {
  auto dir = make_session("basic");
  Running rs(dir);
  auto s = rs.get("/api/session");
  const auto total = s["progress"]["total"].get<std::size_t>();
  ASSERT_GT(total, 2u);
  EXPECT_EQ(s["progress"]["labeled"], 0);
  EXPECT_TRUE(s["selected_config_id"].is_null());

  auto pairs = rs.get("/api/pairs?filter=unlabeled&order=disagreement");
  EXPECT_EQ(pairs["total"], total);
  const auto& p0 = pairs["pairs"][0];
  EXPECT_TRUE(p0.contains("similarities"));
  EXPECT_TRUE(p0["resident"].contains("resident_id"));
  EXPECT_TRUE(p0["contact"].contains("contact_id"));
  EXPECT_TRUE(p0["label"].is_null());

  auto page = rs.get("/api/pairs?order=id&offset=1&limit=2");
  ASSERT_EQ(page["pairs"].size(), 2u);
  EXPECT_EQ(page["pairs"][0]["pair_id"], 1);

  rs.get("/api/pairs?filter=bogus", 400);
  rs.get("/api/pairs/999999", 404);
  rs.get("/api/pairs/abc", 404);
  fs::remove_all(dir);
}

TEST(Service, LabelThenConfigsReflectsIt) {
  auto dir = make_session("rw");
  Running rs(dir);
  auto before = rs.get("/api/configs");
  EXPECT_EQ(before["n_labels"], 0);
  EXPECT_TRUE(before["recommended"].is_null());
  EXPECT_TRUE(before["configs"][0]["tpr"].is_null());

  auto ack = rs.post("/api/pairs/0/label", R"({"label":"match","annotator":"ra1"})");
  EXPECT_EQ(ack["label"], "match");
  EXPECT_EQ(ack["labeled"], 1);
  rs.post("/api/pairs/1/label", R"({"label":"nonmatch","annotator":"ra1"})");

  auto after = rs.get("/api/configs");
  EXPECT_EQ(after["n_labels"], 2);
  std::size_t decided = 0;
  for (const auto& c : after["configs"]) {
    decided = c["tp"].get<std::size_t>() + c["fp"].get<std::size_t>() + c["fn"].get<std::size_t>() +
              c["tn"].get<std::size_t>();
    EXPECT_EQ(decided, 2u);
  }
  // durable: the log on disk already has both rows
  auto reloaded = lf::load_session(dir);
  EXPECT_EQ(reloaded.label_log.size(), 2u);
  fs::remove_all(dir);
}

TEST(Service, MalformedLabelsAndUnknownPairs) {
  auto dir = make_session("bad");
  Running rs(dir);
  rs.post("/api/pairs/0/label", R"({"label":"maybe"})", 400);
  rs.post("/api/pairs/0/label", "not json", 400);
  rs.post("/api/pairs/0/label", R"({"annotator":"x"})", 400);
  rs.post("/api/pairs/0/label", R"({"label":"match","annotator":7})", 400);
  auto err = rs.post("/api/pairs/999999/label", R"({"label":"match"})", 404);
  EXPECT_EQ(err["error"]["kind"], "not_found");
  EXPECT_EQ(lf::load_session(dir).label_log.size(), 0u);
  fs::remove_all(dir);
}

TEST(Service, SelectNeedsLabelsThenWritesChosenConfig) {
  auto dir = make_session("select");
  Running rs(dir);
  rs.post("/api/configs/select", R"({"config_id":0})", 409);
  EXPECT_FALSE(fs::exists(dir / "chosen_config.json"));
  rs.post("/api/pairs/0/label", R"({"label":"match","annotator":"a"})");
  rs.post("/api/configs/select", R"({"config_id":100000})", 404);
  rs.post("/api/configs/select", R"({"config_id":"x"})", 400);
  auto chosen = rs.post("/api/configs/select", R"({"config_id":2})");
  ASSERT_TRUE(fs::exists(dir / "chosen_config.json"));
  auto cfg = lf::read_match_config(dir / "chosen_config.json");
  EXPECT_EQ(chosen["source"]["config_id"], 2);
  EXPECT_EQ(rs.svc.selected(), std::optional<std::uint32_t>(2));
  EXPECT_EQ(rs.svc.wait_for_selection(), 2u);
  EXPECT_EQ(rs.get("/api/session")["selected_config_id"], 2);
  (void)cfg;
  fs::remove_all(dir);
}

TEST(Service, FullyLabeledHasNoUnlabeledPairs) {
  auto dir = make_session("full");
  Running rs(dir);
  const auto total = rs.get("/api/session")["progress"]["total"].get<std::size_t>();
  for (std::size_t i = 0; i < total; ++i)
    rs.post("/api/pairs/" + std::to_string(i) + "/label", i % 2 ? R"({"label":"match"})" : R"({"label":"unsure"})");
  auto un = rs.get("/api/pairs?filter=unlabeled");
  EXPECT_EQ(un["pairs"].size(), 0u);
  EXPECT_EQ(rs.get("/api/pairs?filter=labeled")["total"], total);
  fs::remove_all(dir);
}

TEST(Service, UndoRevisionKeepsHistory) {
  auto dir = make_session("undo");
  Running rs(dir);
  rs.post("/api/pairs/0/label", R"({"label":"match"})");
  rs.post("/api/pairs/0/label", R"({"label":"cleared"})");
  auto p = rs.get("/api/pairs/0");
  EXPECT_TRUE(p["label"].is_null());
  EXPECT_EQ(p["history"].size(), 2u);
  EXPECT_EQ(rs.get("/api/configs")["n_labels"], 0);
  rs.post("/api/pairs/0/label", R"({"label":"nonmatch"})");
  EXPECT_EQ(rs.get("/api/pairs/0")["label"], "nonmatch");
  fs::remove_all(dir);
}

TEST(Service, RestartIsLossless) {
  auto dir = make_session("restart");
  {
    Running rs(dir);
    rs.post("/api/pairs/0/label", R"({"label":"match","annotator":"a"})");
    rs.post("/api/pairs/1/label", R"({"label":"nonmatch","annotator":"a"})");
    rs.post("/api/configs/select", R"({"config_id":1})");
  }
  Running again(dir);
  auto s = again.get("/api/session");
  EXPECT_EQ(s["progress"]["labeled"], 2);
  EXPECT_EQ(s["selected_config_id"], 1);
  auto ex = again.get("/api/export");
  EXPECT_EQ(ex["label_log"].size(), 2u);
  EXPECT_EQ(ex["labels"]["0"], "match");
  EXPECT_EQ(ex["chosen_config"]["source"]["config_id"], 1);
  fs::remove_all(dir);
}

TEST(Service, ConcurrentLabelWritesAllLand) {
  auto dir = make_session("concurrent");
  Running rs(dir);
  const auto total = rs.get("/api/session")["progress"]["total"].get<std::size_t>();
  std::vector<std::thread> ths;
  for (int t = 0; t < 4; ++t)
    ths.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", rs.port);
      for (std::size_t i = t; i < total; i += 4) {
        auto r = c.Post("/api/pairs/" + std::to_string(i) + "/label", R"({"label":"match"})", "application/json");
        ASSERT_TRUE(r);
        ASSERT_EQ(r->status, 200);
      }
    });
  for (auto& t : ths) t.join();
  EXPECT_EQ(lf::load_session(dir).label_log.size(), total);
  EXPECT_EQ(rs.get("/api/session")["progress"]["labeled"], total);
  fs::remove_all(dir);
}

TEST(Service, StaticFilesAtRoot) {
  auto dir = make_session("static");
  auto ui = fs::temp_directory_path() / "lf_service_ui";
  fs::create_directories(ui);
  lf::csv::write_file((ui / "index.html").string(), "<html>review</html>");
  {
    Running rs(dir, ui);
    auto r = rs.client.Get("/");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->body, "<html>review</html>");
    rs.get("/api/session");
  }
  {
    Running rs(dir);
    auto r = rs.client.Get("/");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
  }
  EXPECT_THROW(lf::ReviewService(dir, ui / "missing"), lf::Error);
  fs::remove_all(ui);
  fs::remove_all(dir);
}
