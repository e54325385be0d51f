// tracelens command-line front end.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tracelens/abstractor.hpp"
#include "tracelens/error.hpp"
#include "tracelens/flight_demo.hpp"
#include "tracelens/metrics.hpp"
#include "tracelens/miners.hpp"
#include "tracelens/model_io.hpp"
#include "tracelens/server.hpp"
#include "tracelens/symbols.hpp"
#include "tracelens/trace.hpp"

namespace fs = std::filesystem;
using namespace tracelens;

namespace {

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(out_path, text);
  }
}

std::vector<FilteredTrace> load_filtered_all(const std::vector<std::string>& paths) {
  std::vector<FilteredTrace> out;
  for (const auto& p : paths) out.push_back(load_filtered(p));
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_switch(const std::string& text) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw Error(ErrorCode::kInvalidArgument, "expected on/off, got '" + text + "'");
}

server::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracelens: specification mining workbench"};
  app.require_subcommand(1);

  // extract-symbols
  std::vector<std::string> scan_roots;
  std::string out;
  auto* extract = app.add_subcommand("extract-symbols", "Scan C sources into a symbol manifest");
  extract->add_option("paths", scan_roots, "Source files or directories")->required();
  extract->add_option("-o,--output", out, "Manifest path (stdout when omitted)");

  // demo
  std::string scenario = "takeoff";
  std::vector<std::string> params;
  std::string symbols_out;
  auto* demo_cmd = app.add_subcommand("demo", "Run a flight-demo scenario and write its trace");
  demo_cmd->add_option("--scenario", scenario, "takeoff | takeoff_with_gear | full_flight | buggy_takeoff");
  demo_cmd->add_option("--param", params, "Parameter override key=value (repeatable)");
  demo_cmd->add_option("-o,--output", out, "Trace path (stdout when omitted)");
  demo_cmd->add_option("--symbols", symbols_out, "Also write the demo symbol manifest here");

  // filter
  std::string config_path;
  std::string input;
  auto* filter_cmd = app.add_subcommand("filter", "Reduce a trace to the calls that change selected fields");
  filter_cmd->add_option("--config", config_path, "Config (.cfg.json)")->required();
  filter_cmd->add_option("trace", input, "Raw trace (.trc)")->required();
  filter_cmd->add_option("-o,--output", out, "Filtered trace path (stdout when omitted)");

  // abstract
  std::vector<std::string> inputs;
  std::string dot_out;
  std::string append_to;
  bool warn = false;
  auto* abstract_cmd = app.add_subcommand("abstract", "Build an EFSM from filtered traces");
  abstract_cmd->add_option("--config", config_path, "Config (.cfg.json)")->required();
  abstract_cmd->add_option("traces", inputs, "Filtered traces (.ftrc)")->required();
  abstract_cmd->add_option("-o,--output", out, "Model path (stdout when omitted)");
  abstract_cmd->add_option("--dot", dot_out, "Also write a DOT rendering");
  abstract_cmd->add_option("--append", append_to, "Existing model to extend");
  abstract_cmd->add_flag("--warn-unexplained", warn, "Warn about changes made by non-selected code");

  // mine
  std::string strategy = "ktails";
  int k = 2;
  bool careful_det = false;
  std::string timeout = "20m";
  std::string memory = "1GiB";
  auto* mine_cmd = app.add_subcommand("mine", "Infer an FSM with a baseline miner");
  mine_cmd->add_option("--strategy", strategy, "ktails | redblue | gktail_lite");
  mine_cmd->add_option("--k", k, "k for ktails / gktail_lite")->check(CLI::NonNegativeNumber);
  mine_cmd->add_flag("--careful-det", careful_det, "Determinize the result");
  mine_cmd->add_option("--timeout", timeout, "Time budget, e.g. 20m, 2s, 500ms");
  mine_cmd->add_option("--memory", memory, "Memory budget, e.g. 64MiB");
  mine_cmd->add_option("traces", inputs, "Filtered traces (.ftrc)")->required();
  mine_cmd->add_option("-o,--output", out, "Model path (stdout when omitted)");

  // mine-sweep
  std::vector<std::string> grid_items;
  unsigned workers = 0;
  auto* sweep_cmd = app.add_subcommand("mine-sweep", "Run every miner configuration of a grid");
  sweep_cmd->add_option("--grid", grid_items,
                        "strategies=a,b k=0,1,2 careful_det=on,off")->expected(1, 3);
  sweep_cmd->add_option("--timeout", timeout, "Per-run time budget");
  sweep_cmd->add_option("--memory", memory, "Per-run memory budget");
  sweep_cmd->add_option("--workers", workers, "Parallel runs (0: one per core)");
  sweep_cmd->add_option("traces", inputs, "Filtered traces (.ftrc)")->required();

  // exam
  std::string model_path;
  std::string state;
  std::string order = "label";
  auto* exam_cmd = app.add_subcommand("exam", "Modified EXAM score of a faulty state");
  exam_cmd->add_option("model", model_path, "Model (.model.json)")->required();
  exam_cmd->add_option("--state", state, "Faulty state id")->required();
  exam_cmd->add_option("--order", order, "Successor order: label | id");

  // diff
  std::string model_b;
  std::string format = "text";
  auto* diff_cmd = app.add_subcommand("diff", "Structural difference of two models");
  diff_cmd->add_option("a", model_path, "First model")->required();
  diff_cmd->add_option("b", model_b, "Second model")->required();
  diff_cmd->add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json"}));

  // zoom
  std::vector<std::string> raw_traces;
  auto* zoom_cmd = app.add_subcommand("zoom", "Concrete events inside an abstract state");
  zoom_cmd->add_option("model", model_path, "Model (.model.json)")->required();
  zoom_cmd->add_option("--state", state, "State id")->required();
  zoom_cmd->add_option("--trace", raw_traces, "Raw traces (.trc) referenced by the model")->required();
  zoom_cmd->add_option("-o,--output", out, "Output path (stdout when omitted)");

  // dot
  std::string highlight;
  bool no_valuations = false;
  auto* dot_cmd = app.add_subcommand("dot", "Render a model as Graphviz DOT");
  dot_cmd->add_option("model", model_path, "Model (.model.json)")->required();
  dot_cmd->add_option("--highlight", highlight, "Comma-separated state ids to fill");
  dot_cmd->add_flag("--no-valuations", no_valuations, "Label nodes with ids only");
  dot_cmd->add_option("-o,--output", out, "DOT path (stdout when omitted)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Print state/transition counts of a model");
  stats_cmd->add_option("model", model_path, "Model (.model.json)")->required();

  // serve
  server::ServerOptions serve_opts;
  std::string workspace;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a workspace over HTTP");
  serve_cmd->add_option("--workspace", workspace, "Workspace directory")->required();
  serve_cmd->add_option("--port", serve_opts.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", serve_opts.host, "Bind address");
  serve_cmd->add_option("--static", serve_opts.static_dir, "Web console bundle directory");
  serve_cmd->add_option("--workers", serve_opts.job_workers, "Mining job workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      std::vector<fs::path> roots(scan_roots.begin(), scan_roots.end());
      auto report = scan_sources(collect_sources(roots));
      for (const auto& s : report.skipped)
        std::cerr << "skipped " << s.file << ":" << s.line << ": " << s.reason << "\n";
      emit(out, format_manifest(report.symbols));
    } else if (*demo_cmd) {
      demo::FlightScenario sc;
      sc.name = demo::parse_scenario(scenario);
      for (const auto& p : params) demo::apply_param(sc.params, p);
      ConcreteTrace trace = demo::run_scenario(sc);
      emit(out, serialize_trace(trace));
      if (!symbols_out.empty()) write_file(symbols_out, format_manifest(demo::demo_symbols()));
    } else if (*filter_cmd) {
      MonitorConfig config = load_config(config_path);
      emit(out, serialize_filtered(filter_trace(load_trace(input), config)));
    } else if (*abstract_cmd) {
      MonitorConfig config = load_config(config_path);
      AbstractOptions options;
      options.warn_unexplained = warn;
      auto traces = load_filtered_all(inputs);
      Efsm model;
      if (append_to.empty()) {
        model = build_model(traces, config, options);
      } else {
        model = load_model(append_to);
        for (const auto& t : traces) model = abstract_append(model, t, config, options);
      }
      emit(out, serialize_model(model));
      if (!dot_out.empty()) write_file(dot_out, export_dot(model));
      for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*mine_cmd) {
      MinerParams p;
      p.strategy = parse_strategy(strategy);
      p.k = k;
      p.careful_det = careful_det;
      p.timeout = parse_duration(timeout);
      p.memory_budget = parse_bytes(memory);
      auto traces = load_filtered_all(inputs);
      MineResult r = mine(traces, p);
      if (!r.model) {
        std::cerr << "error: " << (r.outcome == MineOutcome::kTimeout ? "MINE_TIMEOUT" : "MINE_OOM")
                  << ": " << r.message << "\n";
        return 2;
      }
      emit(out, serialize_model(to_efsm(*r.model, mine_meta(p, traces))));
    } else if (*sweep_cmd) {
      SweepGrid grid;
      grid.timeout = parse_duration(timeout);
      grid.memory_budget = parse_bytes(memory);
      grid.workers = workers;
      for (const auto& item : grid_items) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
          throw Error(ErrorCode::kInvalidArgument, "grid item must be key=values: '" + item + "'");
        std::string key = item.substr(0, eq);
        auto values = split_csv(item.substr(eq + 1));
        if (key == "strategies" || key == "strategy") {
          grid.strategies.clear();
          for (const auto& v : values) grid.strategies.push_back(parse_strategy(v));
        } else if (key == "k") {
          grid.ks.clear();
          for (const auto& v : values) grid.ks.push_back(std::stoi(v));
        } else if (key == "careful_det") {
          grid.careful_det.clear();
          for (const auto& v : values) grid.careful_det.push_back(parse_switch(v));
        } else {
          throw Error(ErrorCode::kInvalidArgument, "unknown grid key '" + key + "'");
        }
      }
      std::cout << format_sweep(mine_sweep(load_filtered_all(inputs), grid));
    } else if (*exam_cmd) {
      if (order != "label" && order != "id")
        throw Error(ErrorCode::kInvalidArgument, "order must be 'label' or 'id'");
      std::cout << exam_score(load_model(model_path), state,
                              order == "id" ? ExamOrder::kStateId : ExamOrder::kLabelLexicographic)
                << "\n";
    } else if (*diff_cmd) {
      Efsm a = load_model(model_path);
      ModelDiff d = diff_models(a, load_model(model_b));
      if (format == "json") std::cout << diff_to_json(d).dump(2) << "\n";
      else std::cout << format_diff_text(d, a);
    } else if (*zoom_cmd) {
      std::vector<ConcreteTrace> raw;
      for (const auto& t : raw_traces) raw.push_back(load_trace(t));
      emit(out, zoom_to_json(zoom(load_model(model_path), state, raw)).dump(2) + "\n");
    } else if (*dot_cmd) {
      DotOptions options;
      options.show_valuations = !no_valuations;
      for (const auto& s : split_csv(highlight)) options.highlight.insert(s);
      emit(out, export_dot(load_model(model_path), options));
    } else if (*stats_cmd) {
      auto s = model_stats(load_model(model_path));
      std::cout << "states " << s.states << "\ntransitions " << s.transitions << "\ninitial "
                << s.initial << "\nwarnings " << s.warnings << "\n";
    } else if (*serve_cmd) {
      serve_opts.workspace = workspace;
      server::Server srv(serve_opts);
      int port = srv.bind();
      g_server = &srv;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << workspace << " on http://" << serve_opts.host << ":" << port << "\n";
      srv.run();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
