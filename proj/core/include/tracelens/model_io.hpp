#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "tracelens/model.hpp"

namespace tracelens {

// Canonical model text: top-level keys meta, states, transitions, warnings;
// states sorted by id, transitions by (from, label, to); two-space indent
// and a trailing newline.
std::string serialize_model(const Efsm& model);
Efsm parse_model(const std::string& text);
Efsm load_model(const std::filesystem::path& path);

struct DotOptions {
  bool show_valuations = true;
  std::set<std::string> highlight;
};

std::string export_dot(const Efsm& model, const DotOptions& options = {});

// Config files (.cfg.json).
nlohmann::ordered_json config_to_json(const MonitorConfig& config);
MonitorConfig config_from_json(const nlohmann::json& doc);
std::string serialize_config(const MonitorConfig& config);
MonitorConfig parse_config(const std::string& text);
MonitorConfig load_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tracelens
