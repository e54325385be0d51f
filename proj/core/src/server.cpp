#include "tracelens/server.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "httplib.h"
#include "tracelens/abstractor.hpp"
#include "tracelens/error.hpp"
#include "tracelens/flight_demo.hpp"
#include "tracelens/metrics.hpp"
#include "tracelens/model_io.hpp"
#include "tracelens/symbols.hpp"
#include "tracelens/trace.hpp"

namespace tracelens::server {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void check_name(const std::string& name, const char* what) {
  bool ok = !name.empty() && name.size() <= 128 && name.front() != '.';
  for (char c : name)
    ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.');
  if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("invalid ") + what + " '" + name + "'");
}

std::string etag_of(const std::string& text) { return "\"" + fnv1a_hex(text) + "\""; }

std::vector<std::string> string_list(const nlohmann::json& request, const char* key) {
  if (!request.contains(key) || !request[key].is_array())
    throw Error(ErrorCode::kInvalidArgument, std::string("expected array '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : request[key]) {
    if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kZoomUnknownState:
    case ErrorCode::kExamUnknownState:
      return 404;
    case ErrorCode::kVersionConflict:
      return 412;
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kAbstractConfigMismatch:
    case ErrorCode::kDiffConfigMismatch:
    case ErrorCode::kFilterFields:
    case ErrorCode::kExamUnreachable:
    case ErrorCode::kZoomMissingTrace:
    case ErrorCode::kEvalMissingField:
      return 422;
    case ErrorCode::kIo:
    case ErrorCode::kScanIo:
    case ErrorCode::kServeBind:
      return 500;
    default:
      return 400;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Workspace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  for (const char* sub : {"configs", "traces", "models", "jobs"}) {
    std::error_code ec;
    fs::create_directories(root_ / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create '" + (root_ / sub).string() + "': " + ec.message());
  }
}

std::string Workspace::model_id(const std::string& text) { return "m" + fnv1a_hex(text); }

fs::path Workspace::config_path(const std::string& name) const {
  check_name(name, "config name");
  return root_ / "configs" / (name + ".cfg.json");
}

fs::path Workspace::trace_path(const std::string& id) const {
  check_name(id, "trace id");
  return root_ / "traces" / (id + ".trc");
}

fs::path Workspace::model_path(const std::string& id) const {
  check_name(id, "model id");
  return root_ / "models" / (id + ".model.json");
}

ojson Workspace::symbols() const {
  std::shared_lock lock(mutex_);
  auto path = root_ / "symbols.manifest";
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "workspace has no symbols.manifest");
  SymbolTable table = load_manifest(path);
  ojson out;
  out["fields"] = ojson::array();
  for (const auto& f : table.fields)
    out["fields"].push_back({{"path", f.path}, {"kind", to_string(f.kind)}, {"unit", f.unit}});
  out["functions"] = ojson::array();
  for (const auto& f : table.functions)
    out["functions"].push_back({{"name", f.name}, {"file", f.file}, {"line", f.line}});
  return out;
}

Workspace::Versioned Workspace::get_config(const std::string& name) const {
  auto path = config_path(name);
  std::shared_lock lock(mutex_);
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no config '" + name + "'");
  std::string text = read_file(path);
  return {text, etag_of(text)};
}

std::pair<Workspace::Versioned, bool> Workspace::put_config(const std::string& name,
                                                            const std::string& body,
                                                            const std::string& if_match) {
  auto path = config_path(name);
  MonitorConfig config = parse_config(body);
  config.name = name;
  std::unique_lock lock(mutex_);
  auto manifest = root_ / "symbols.manifest";
  if (fs::exists(manifest)) {
    auto findings = validate_config(config, load_manifest(manifest));
    if (!findings.empty()) {
      std::string msg;
      for (const auto& f : findings) msg += (msg.empty() ? "" : "; ") + f.code + ": " + f.message;
      throw Error(ErrorCode::kConfigInvalid, msg);
    }
  }
  bool exists = fs::exists(path);
  if (!if_match.empty() && if_match != "*") {
    std::string current = exists ? etag_of(read_file(path)) : "";
    if (current != if_match)
      throw Error(ErrorCode::kVersionConflict, "config '" + name + "' was modified concurrently");
  }
  std::string text = serialize_config(config);
  write_file(path, text);
  return {{text, etag_of(text)}, !exists};
}

ojson Workspace::list_traces() const {
  std::shared_lock lock(mutex_);
  std::vector<std::pair<std::string, std::size_t>> traces;
  for (const auto& entry : fs::directory_iterator(root_ / "traces")) {
    if (entry.path().extension() != ".trc") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::size_t events = 0;
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) ++events;
    traces.emplace_back(entry.path().stem().string(), events);
  }
  std::sort(traces.begin(), traces.end());
  ojson out = ojson::array();
  for (const auto& [id, n] : traces) out.push_back({{"id", id}, {"events", n}});
  return out;
}

ojson Workspace::run_demo(const nlohmann::json& request) {
  demo::FlightScenario scenario;
  scenario.name = demo::parse_scenario(request.value("scenario", std::string("takeoff")));
  if (request.contains("params")) {
    const auto& params = request["params"];
    if (params.is_object()) {
      for (const auto& [k, v] : params.items())
        demo::apply_param(scenario.params, k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
    } else if (params.is_array()) {
      for (const auto& p : params) demo::apply_param(scenario.params, p.get<std::string>());
    } else {
      throw Error(ErrorCode::kInvalidArgument, "'params' must be an object or array");
    }
  }
  std::string id = request.value("id", std::string(demo::to_string(scenario.name)));
  auto path = trace_path(id);
  ConcreteTrace trace = demo::run_scenario(scenario);
  trace.id = id;
  std::string text = serialize_trace(trace);
  std::unique_lock lock(mutex_);
  write_file(path, text);
  auto manifest = root_ / "symbols.manifest";
  if (!fs::exists(manifest)) write_file(manifest, format_manifest(demo::demo_symbols()));
  return {{"id", id}, {"events", trace.events.size()}};
}

std::string Workspace::store_model(const std::string& text) {
  std::string id = model_id(text);
  auto path = model_path(id);
  if (!fs::exists(path)) write_file(path, text);
  return id;
}

ojson Workspace::abstract(const nlohmann::json& request) {
  if (!request.contains("config") || !request["config"].is_string())
    throw Error(ErrorCode::kInvalidArgument, "expected string 'config'");
  auto trace_ids = string_list(request, "traces");
  AbstractOptions options;
  options.warn_unexplained = request.value("warn_unexplained", false);

  Efsm model;
  {
    std::shared_lock lock(mutex_);
    auto cfg_path = config_path(request["config"].get<std::string>());
    if (!fs::exists(cfg_path))
      throw Error(ErrorCode::kNotFound, "no config '" + request["config"].get<std::string>() + "'");
    MonitorConfig config = load_config(cfg_path);
    std::vector<FilteredTrace> filtered;
    for (const auto& id : trace_ids) {
      auto path = trace_path(id);
      if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no trace '" + id + "'");
      filtered.push_back(filter_trace(load_trace(path), config));
    }
    model = build_model(filtered, config, options);
  }
  std::string text = serialize_model(model);
  std::unique_lock lock(mutex_);
  std::string id = store_model(text);
  auto stats = model_stats(model);
  return {{"id", id}, {"states", stats.states}, {"transitions", stats.transitions},
          {"warnings", model.warnings}};
}

std::string Workspace::model_text(const std::string& id) const {
  auto path = model_path(id);
  std::shared_lock lock(mutex_);
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no model '" + id + "'");
  return read_file(path);
}

std::string Workspace::model_dot(const std::string& id, const std::string& highlight) const {
  Efsm model = parse_model(model_text(id));
  DotOptions options;
  std::size_t start = 0;
  while (start < highlight.size()) {
    auto comma = highlight.find(',', start);
    if (comma == std::string::npos) comma = highlight.size();
    if (comma > start) options.highlight.insert(highlight.substr(start, comma - start));
    start = comma + 1;
  }
  return export_dot(model, options);
}

ojson Workspace::zoom(const std::string& id, const std::string& state) const {
  Efsm model = parse_model(model_text(id));
  const EfsmState* st = model.find_state(state);
  if (!st) throw Error(ErrorCode::kZoomUnknownState, "no state '" + state + "'");
  std::set<std::string> ids;
  for (const auto& seg : st->segments) ids.insert(seg.trace);
  std::vector<ConcreteTrace> raw;
  {
    std::shared_lock lock(mutex_);
    for (const auto& t : ids) {
      auto path = trace_path(t);
      if (!fs::exists(path))
        throw Error(ErrorCode::kZoomMissingTrace, "raw trace '" + t + "' is not in the workspace");
      raw.push_back(load_trace(path));
    }
  }
  return zoom_to_json(tracelens::zoom(model, state, raw));
}

ojson Workspace::diff(const std::string& a, const std::string& b) const {
  return diff_to_json(diff_models(parse_model(model_text(a)), parse_model(model_text(b))));
}

ojson Workspace::exam(const std::string& id, const std::string& state,
                      const std::string& order) const {
  ExamOrder o = ExamOrder::kLabelLexicographic;
  if (order == "id") o = ExamOrder::kStateId;
  else if (!order.empty() && order != "label")
    throw Error(ErrorCode::kInvalidArgument, "order must be 'label' or 'id'");
  Efsm model = parse_model(model_text(id));
  return {{"state", state}, {"score", exam_score(model, state, o)}};
}

Workspace::MineRequest Workspace::parse_mine_request(const nlohmann::json& request) const {
  MineRequest out;
  out.traces = string_list(request, "traces");
  for (const auto& t : out.traces) check_name(t, "trace id");
  out.params.strategy = parse_strategy(request.value("strategy", std::string("ktails")));
  out.params.k = request.value("k", 2);
  if (out.params.k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be non-negative");
  out.params.careful_det = request.value("careful_det", false);
  if (request.contains("timeout")) out.params.timeout = parse_duration(request["timeout"].get<std::string>());
  if (request.contains("memory_budget"))
    out.params.memory_budget = parse_bytes(request["memory_budget"].get<std::string>());
  if (request.contains("config")) {
    if (!request["config"].is_string())
      throw Error(ErrorCode::kInvalidArgument, "'config' must be a string");
    out.config = request["config"].get<std::string>();
    check_name(out.config, "config name");
  }
  return out;
}

ojson Workspace::run_mine(const MineRequest& request) {
  std::vector<FilteredTrace> filtered;
  {
    std::shared_lock lock(mutex_);
    std::optional<MonitorConfig> shared;
    if (!request.config.empty()) {
      auto cfg_path = config_path(request.config);
      if (!fs::exists(cfg_path)) throw Error(ErrorCode::kNotFound, "no config '" + request.config + "'");
      shared = load_config(cfg_path);
    }
    for (const auto& id : request.traces) {
      auto path = trace_path(id);
      if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no trace '" + id + "'");
      ConcreteTrace trace = load_trace(path);
      MonitorConfig config;
      if (shared) {
        config = *shared;
      } else {
        // Without a config, every field and every function is selected.
        config.fields = trace.monitored_fields;
        std::set<std::string> fns;
        for (const auto& ev : trace.events) fns.insert(ev.fn);
        config.functions.assign(fns.begin(), fns.end());
      }
      filtered.push_back(filter_trace(trace, config));
    }
  }
  MineResult result = mine(filtered, request.params);
  ojson out;
  out["outcome"] = to_string(result.outcome);
  out["wall_ms"] = result.wall.count();
  if (result.model) {
    std::string text = serialize_model(to_efsm(*result.model, mine_meta(request.params, filtered)));
    std::unique_lock lock(mutex_);
    out["model"] = store_model(text);
  } else {
    out["message"] = result.message;
  }
  return out;
}

void Workspace::save_job(const std::string& id, const ojson& status) {
  std::unique_lock lock(mutex_);
  write_file(root_ / "jobs" / (id + ".json"), status.dump(2) + "\n");
}

ojson Workspace::load_job(const std::string& id) const {
  check_name(id, "job id");
  std::shared_lock lock(mutex_);
  auto path = root_ / "jobs" / (id + ".json");
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "no job '" + id + "'");
  return ojson::parse(read_file(path));
}

std::size_t Workspace::job_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(root_ / "jobs"))
    if (entry.path().extension() == ".json") ++n;
  return n;
}

// ---------------------------------------------------------------------------
// HTTP

Server::Server(ServerOptions options)
    : options_(std::move(options)),
      workspace_(options_.workspace),
      http_(std::make_unique<httplib::Server>()) {
  // httplib defaults to SO_REUSEPORT, which lets a second server share a
  // busy port silently.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  next_job_ = workspace_.job_count();
  routes();
  unsigned n = std::max(1u, options_.job_workers);
  for (unsigned i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Server::~Server() {
  stop();
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  for (auto& w : workers_) w.join();
}

int Server::bind() {
  int port = options_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(options_.host);
    if (port < 0) throw Error(ErrorCode::kServeBind, "cannot bind " + options_.host);
  } else if (!http_->bind_to_port(options_.host, port)) {
    throw Error(ErrorCode::kServeBind,
                "cannot bind " + options_.host + ":" + std::to_string(port));
  }
  return port;
}

void Server::run() { http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

void Server::worker_loop() {
  while (true) {
    std::pair<std::string, Workspace::MineRequest> job;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    const std::string& id = job.first;
    try {
      workspace_.save_job(id, {{"id", id}, {"state", "running"}});
      ojson status = workspace_.run_mine(job.second);
      status["id"] = id;
      status["state"] = "done";
      workspace_.save_job(id, status);
    } catch (const Error& e) {
      workspace_.save_job(id, {{"id", id}, {"state", "failed"}, {"code", to_string(e.code())},
                               {"message", e.what()}});
    } catch (const std::exception& e) {
      workspace_.save_job(id, {{"id", id}, {"state", "failed"}, {"code", "INTERNAL"},
                               {"message", e.what()}});
    }
  }
}

std::string Server::submit_job(Workspace::MineRequest request) {
  std::string id = "j" + std::to_string(++next_job_);
  workspace_.save_job(id, {{"id", id}, {"state", "queued"}});
  {
    std::lock_guard lock(jobs_mutex_);
    queue_.emplace_back(id, std::move(request));
  }
  jobs_cv_.notify_one();
  return id;
}

void Server::routes() {
  using httplib::Request;
  using httplib::Response;
  auto& http = *http_;
  constexpr const char* kJson = "application/json";

  auto guarded = [](auto fn) {
    return [fn](const Request& req, Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        res.status = status_for(e.code());
        res.set_content(ojson{{"code", to_string(e.code())}, {"message", e.what()}}.dump(), "application/json");
      } catch (const nlohmann::json::exception& e) {
        res.status = 400;
        res.set_content(ojson{{"code", "INVALID_ARGUMENT"}, {"message", e.what()}}.dump(), "application/json");
      }
    };
  };
  auto body_json = [](const Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    auto doc = nlohmann::json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    return doc;
  };

  http.Get("/api/symbols", guarded([&, kJson](const Request&, Response& res) {
             res.set_content(workspace_.symbols().dump(2) + "\n", kJson);
           }));
  http.Get(R"(/api/configs/([^/]+))", guarded([&, kJson](const Request& req, Response& res) {
             auto v = workspace_.get_config(req.matches[1]);
             res.set_header("ETag", v.etag);
             res.set_content(v.text, kJson);
           }));
  http.Put(R"(/api/configs/([^/]+))", guarded([&, kJson](const Request& req, Response& res) {
             auto [v, created] =
                 workspace_.put_config(req.matches[1], req.body, req.get_header_value("If-Match"));
             res.status = created ? 201 : 200;
             res.set_header("ETag", v.etag);
             res.set_content(v.text, kJson);
           }));
  http.Get("/api/traces", guarded([&, kJson](const Request&, Response& res) {
             res.set_content(workspace_.list_traces().dump(2) + "\n", kJson);
           }));
  http.Post("/api/traces:demo", guarded([&, kJson, body_json](const Request& req, Response& res) {
              res.status = 201;
              res.set_content(workspace_.run_demo(body_json(req)).dump(2) + "\n", kJson);
            }));
  http.Post("/api/abstract", guarded([&, kJson, body_json](const Request& req, Response& res) {
              res.status = 201;
              res.set_content(workspace_.abstract(body_json(req)).dump(2) + "\n", kJson);
            }));
  http.Post("/api/mine", guarded([&, kJson, body_json](const Request& req, Response& res) {
              auto id = submit_job(workspace_.parse_mine_request(body_json(req)));
              res.status = 202;
              res.set_header("Location", "/api/jobs/" + id);
              res.set_content(ojson{{"job", id}}.dump(2) + "\n", kJson);
            }));
  http.Get(R"(/api/jobs/([^/]+))", guarded([&, kJson](const Request& req, Response& res) {
             res.set_content(workspace_.load_job(req.matches[1]).dump(2) + "\n", kJson);
           }));
  for (const std::string prefix : {"/api/models/", "/api/model/"}) {
    http.Get(prefix + R"(([^/]+))", guarded([&, kJson](const Request& req, Response& res) {
               res.set_content(workspace_.model_text(req.matches[1]), kJson);
             }));
    http.Get(prefix + R"(([^/]+)/dot)", guarded([&](const Request& req, Response& res) {
               res.set_content(workspace_.model_dot(req.matches[1], req.get_param_value("highlight")),
                               "text/vnd.graphviz");
             }));
    http.Get(prefix + R"(([^/]+)/state/([^/]+)/zoom)",
             guarded([&, kJson](const Request& req, Response& res) {
               res.set_content(workspace_.zoom(req.matches[1], req.matches[2]).dump(2) + "\n", kJson);
             }));
    http.Get(prefix + R"(([^/]+)/exam)", guarded([&, kJson](const Request& req, Response& res) {
               if (!req.has_param("state"))
                 throw Error(ErrorCode::kInvalidArgument, "missing query parameter 'state'");
               res.set_content(workspace_.exam(req.matches[1], req.get_param_value("state"),
                                               req.get_param_value("order"))
                                       .dump(2) + "\n",
                               kJson);
             }));
  }
  http.Get("/api/diff", guarded([&, kJson](const Request& req, Response& res) {
             if (!req.has_param("a") || !req.has_param("b"))
               throw Error(ErrorCode::kInvalidArgument, "expected query parameters 'a' and 'b'");
             res.set_content(
                 workspace_.diff(req.get_param_value("a"), req.get_param_value("b")).dump(2) + "\n",
                 kJson);
           }));

  if (!options_.static_dir.empty() && fs::is_directory(options_.static_dir)) {
    http.set_mount_point("/", options_.static_dir.string());
  } else {
    http.Get("/", [](const Request&, Response& res) {
      res.set_content(
          "<!doctype html><title>tracelens</title><p>tracelens API is running. "
          "The web console bundle is not installed; see /api/symbols.</p>\n",
          "text/html");
    });
  }
}

}  // namespace tracelens::server
