#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "tracelens/error.hpp"
#include "tracelens/model_io.hpp"
#include "tracelens/server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tracelens;

namespace {

const char* kOnground = R"J({"name":"onground","fields":["altitude","speed"],
  "functions":["accelerate","takeoff"],"constraints":["cmp(altitude, 0)"],
  "filters":[],"eq_epsilon":0})J";

struct Running {
  fs::path dir;
  std::unique_ptr<server::Server> server;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;

  explicit Running(fs::path root) : dir(std::move(root)) {
    server::ServerOptions o;
    o.workspace = dir;
    o.port = 0;
    server = std::make_unique<server::Server>(o);
    int port = server->bind();
    thread = std::thread([this] { server->run(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(30, 0);
  }
  ~Running() {
    server->stop();
    thread.join();
  }
  httplib::Client& http() { return *client; }
};

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

json body(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

std::string post_abstract(httplib::Client& c, const std::string& config,
                          const std::vector<std::string>& traces) {
  json req{{"config", config}, {"traces", traces}};
  auto r = c.Post("/api/abstract", req.dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  return json::parse(r->body)["id"];
}

std::string run_cli(const std::string& args) {
  auto out = fs::temp_directory_path() / "tracelens_cli_out";
  std::string cmd = std::string(TRACELENS_CLI) + " " + args + " > " + out.string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  return read_file(out);
}

}  // namespace

TEST_CASE("server: demo workspace end to end") {
  auto dir = fresh_dir("tracelens_server_e2e");
  Running s(dir);
  auto& c = s.http();

  auto r = c.Post("/api/traces:demo", R"({"scenario":"takeoff"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  CHECK(json::parse(r->body)["events"] == 30);

  json symbols = body(c.Get("/api/symbols"));
  std::set<std::string> fields;
  for (const auto& f : symbols["fields"]) fields.insert(f["path"]);
  CHECK(fields == std::set<std::string>{"gear", "speed", "takeOffSpeed", "altitude", "groundAlt",
                                        "safeAltForGearRetract"});

  // Config create, conditional update, stale update.
  r = c.Put("/api/configs/onground", kOnground, "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  std::string etag = r->get_header_value("ETag");
  CHECK_FALSE(etag.empty());
  r = c.Get("/api/configs/onground");
  CHECK(r->get_header_value("ETag") == etag);
  httplib::Headers stale{{"If-Match", "\"0000\""}};
  r = c.Put("/api/configs/onground", stale, kOnground, "application/json");
  CHECK(r->status == 412);
  CHECK(json::parse(r->body)["code"] == "VERSION_CONFLICT");
  httplib::Headers fresh{{"If-Match", etag}};
  r = c.Put("/api/configs/onground", fresh, kOnground, "application/json");
  CHECK(r->status == 200);

  r = c.Put("/api/configs/bad", R"({"name":"bad","fields":["wings"],"functions":[],"constraints":[]})",
            "application/json");
  CHECK(r->status == 422);
  CHECK(json::parse(r->body)["code"] == "CONFIG_INVALID");

  // Abstraction and model retrieval.
  std::string id = post_abstract(c, "onground", {"takeoff"});
  r = c.Get("/api/models/" + id);
  REQUIRE(r);
  CHECK(r->status == 200);
  Efsm m = parse_model(r->body);
  CHECK(m.states.size() == 2);
  CHECK(m.transitions.size() == 3);
  CHECK(c.Get("/api/model/" + id)->body == r->body);

  // CLI parity on the same workspace files.
  std::string ftrc = (dir / "takeoff.ftrc").string();
  run_cli("filter --config " + (dir / "configs" / "onground.cfg.json").string() + " " +
          (dir / "traces" / "takeoff.trc").string() + " -o " + ftrc);
  std::string cli_model =
      run_cli("abstract --config " + (dir / "configs" / "onground.cfg.json").string() + " " + ftrc);
  CHECK(cli_model == r->body);
  std::string model_file = (dir / "cli.model.json").string();
  write_file(model_file, cli_model);
  CHECK(run_cli("dot " + model_file + " --highlight s1") ==
        c.Get("/api/models/" + id + "/dot?highlight=s1")->body);

  // Zoom counts agree with the returned paths.
  json z = body(c.Get("/api/models/" + id + "/state/s0/zoom"));
  std::size_t nodes = 0, edges = 0;
  for (const auto& p : z["paths"]) {
    nodes += p["nodes"].size();
    edges += p["edges"].size();
  }
  CHECK(z["node_count"] == nodes);
  CHECK(z["edge_count"] == edges);
  std::string cli_zoom = run_cli("zoom " + model_file + " --state s0 --trace " +
                                 (dir / "traces" / "takeoff.trc").string());
  CHECK(json::parse(cli_zoom) == z);
  std::string dot = c.Get("/api/models/" + id + "/dot")->body;
  CHECK(dot.find("doublecircle") != std::string::npos);

  json exam = body(c.Get("/api/models/" + id + "/exam?state=s1"));
  CHECK(exam["score"] == 2);

  // Diff between two demo scenarios under one config.
  c.Post("/api/traces:demo", R"({"scenario":"takeoff_with_gear"})", "application/json");
  c.Post("/api/traces:demo", R"({"scenario":"buggy_takeoff"})", "application/json");
  std::string gear = R"J({"name":"t1","fields":["gear","speed","takeOffSpeed","altitude","groundAlt","safeAltForGearRetract"],
    "functions":["retractGear"],"constraints":["value_change(gear)","cmp(speed, takeOffSpeed)",
    "range(altitude, groundAlt, safeAltForGearRetract)"]})J";
  REQUIRE(c.Put("/api/configs/t1", gear, "application/json")->status == 201);
  std::string good = post_abstract(c, "t1", {"takeoff_with_gear"});
  std::string bad = post_abstract(c, "t1", {"buggy_takeoff"});
  json d = body(c.Get("/api/diff?a=" + good + "&b=" + bad));
  CHECK(d["transitions_only_b"].size() == 1);
  r = c.Get("/api/diff?a=" + good + "&b=" + id);
  CHECK(r->status == 422);
  CHECK(json::parse(r->body)["code"] == "DIFF_CONFIG_MISMATCH");

  // Mining runs as a job.
  r = c.Post("/api/mine", R"({"traces":["takeoff"],"strategy":"ktails","k":1})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 202);
  std::string job = json::parse(r->body)["job"];
  json status;
  for (int i = 0; i < 200; ++i) {
    status = body(c.Get("/api/jobs/" + job));
    if (status["state"] == "done" || status["state"] == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(status["state"] == "done");
  CHECK(status["outcome"] == "ok");
  CHECK(c.Get("/api/models/" + status["model"].get<std::string>())->status == 200);

  // Errors.
  r = c.Get("/api/models/nothing");
  CHECK(r->status == 404);
  CHECK(json::parse(r->body)["code"] == "NOT_FOUND");
  r = c.Get("/api/models/" + id + "/state/s9/zoom");
  CHECK(json::parse(r->body)["code"] == "ZOOM_UNKNOWN_STATE");
  r = c.Post("/api/abstract", "[1]", "application/json");
  CHECK(r->status == 400);
  CHECK(c.Get("/")->status == 200);

  json traces = body(c.Get("/api/traces"));
  CHECK(traces.size() == 3);
}

TEST_CASE("server: restart reproduces reads") {
  auto dir = fresh_dir("tracelens_server_restart");
  std::string id, model, job;
  {
    Running s(dir);
    auto& c = s.http();
    c.Post("/api/traces:demo", R"({"scenario":"takeoff"})", "application/json");
    c.Put("/api/configs/onground", kOnground, "application/json");
    id = post_abstract(c, "onground", {"takeoff"});
    model = c.Get("/api/models/" + id)->body;
  }
  Running s(dir);
  CHECK(s.http().Get("/api/models/" + id)->body == model);
  CHECK(s.http().Get("/api/configs/onground")->status == 200);
}

TEST_CASE("server: busy port") {
  auto dir = fresh_dir("tracelens_server_bind");
  Running a(dir);
  server::ServerOptions o;
  o.workspace = dir;
  o.port = 0;
  server::Server probe(o);
  int port = probe.bind();
  server::ServerOptions clash = o;
  clash.port = port;
  server::Server second(clash);
  CHECK_THROWS_AS(second.bind(), tracelens::Error);
}
