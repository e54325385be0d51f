#include "tracelens/model_io.hpp"

#include <fstream>
#include <sstream>

#include "tracelens/constraints.hpp"
#include "tracelens/error.hpp"

namespace tracelens {

using ojson = nlohmann::ordered_json;

std::string serialize_model(const Efsm& input) {
  Efsm model = input;
  model.sort_canonical();
  ojson doc;
  doc["meta"] = model.meta;
  doc["states"] = ojson::array();
  for (const auto& s : model.states) {
    ojson st;
    st["id"] = s.id;
    st["valuation"] = ojson::object();
    for (std::size_t i = 0; i < s.valuation.size(); ++i)
      st["valuation"][std::to_string(i)] = component_text(s.valuation[i]);
    st["label"] = s.label;
    st["initial"] = s.initial;
    st["segments"] = ojson::array();
    for (const auto& seg : s.segments) st["segments"].push_back({seg.trace, seg.start, seg.end});
    doc["states"].push_back(std::move(st));
  }
  doc["transitions"] = ojson::array();
  for (const auto& t : model.transitions)
    doc["transitions"].push_back({{"from", t.from}, {"to", t.to}, {"label", t.label}});
  doc["warnings"] = model.warnings;
  return doc.dump(2) + "\n";
}

Efsm parse_model(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kModelParse, std::string("model is not valid JSON: ") + e.what());
  }
  std::string where = "$";
  try {
    Efsm model;
    if (!doc.is_object()) throw std::invalid_argument("expected an object");
    for (const char* key : {"meta", "states", "transitions", "warnings"})
      if (!doc.contains(key)) throw std::invalid_argument(std::string("missing key '") + key + "'");
    where = "$.meta";
    model.meta = doc.at("meta");
    if (!model.meta.is_object()) throw std::invalid_argument("expected an object");
    std::set<std::string> ids;
    std::size_t i = 0;
    for (const auto& st : doc.at("states")) {
      where = "$.states[" + std::to_string(i++) + "]";
      EfsmState s;
      s.id = st.at("id").get<std::string>();
      if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate state id '" + s.id + "'");
      const auto& val = st.at("valuation");
      if (!val.is_object()) throw std::invalid_argument("valuation must be an object");
      for (std::size_t c = 0; c < val.size(); ++c)
        s.valuation.push_back(parse_component(val.at(std::to_string(c)).get<std::string>()));
      s.label = st.at("label").get<std::string>();
      s.initial = st.at("initial").get<bool>();
      for (const auto& seg : st.at("segments")) {
        if (!seg.is_array() || seg.size() != 3) throw std::invalid_argument("segment must be [trace, start, end]");
        s.segments.push_back({seg[0].get<std::string>(), seg[1].get<std::int64_t>(),
                              seg[2].get<std::int64_t>()});
      }
      model.states.push_back(std::move(s));
    }
    i = 0;
    for (const auto& t : doc.at("transitions")) {
      where = "$.transitions[" + std::to_string(i++) + "]";
      Transition tr{t.at("from").get<std::string>(), t.at("to").get<std::string>(),
                    t.at("label").get<std::string>()};
      if (!ids.count(tr.from) || !ids.count(tr.to))
        throw std::invalid_argument("transition references an unknown state");
      model.transitions.push_back(std::move(tr));
    }
    where = "$.warnings";
    model.warnings = doc.at("warnings").get<std::vector<std::string>>();
    model.sort_canonical();
    return model;
  } catch (const Error& e) {
    throw Error(ErrorCode::kModelParse, where + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kModelParse, where + ": " + e.what());
  }
}

Efsm load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_dot(const Efsm& input, const DotOptions& options) {
  Efsm model = input;
  model.sort_canonical();
  std::string out = "digraph model {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (const auto& s : model.states) {
    std::string label = s.id;
    if (options.show_valuations && !s.label.empty()) label += "\\n" + dot_escape(s.label);
    out += "  \"" + dot_escape(s.id) + "\" [label=\"" + label + "\"";
    if (s.initial) out += ", shape=doublecircle";
    if (options.highlight.count(s.id)) out += ", style=filled, fillcolor=\"#ffd27f\"";
    out += "];\n";
  }
  for (const auto& t : model.transitions)
    out += "  \"" + dot_escape(t.from) + "\" -> \"" + dot_escape(t.to) + "\" [label=\"" +
           dot_escape(t.label) + "\"];\n";
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Configs

nlohmann::ordered_json config_to_json(const MonitorConfig& config) {
  ojson doc;
  doc["name"] = config.name;
  doc["fields"] = config.fields;
  doc["functions"] = config.functions;
  doc["constraints"] = ojson::array();
  for (const auto& c : config.constraints) doc["constraints"].push_back(format_constraint(c));
  doc["filters"] = ojson::array();
  for (const auto& f : config.filters) doc["filters"].push_back(format_filter(f));
  doc["eq_epsilon"] = config.eq_epsilon;
  return doc;
}

MonitorConfig config_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [k, v] : doc.items()) {
      if (k != "name" && k != "fields" && k != "functions" && k != "constraints" &&
          k != "filters" && k != "eq_epsilon")
        throw std::invalid_argument("unknown key '" + k + "'");
    }
    MonitorConfig c;
    c.name = doc.value("name", std::string());
    c.fields = doc.at("fields").get<std::vector<std::string>>();
    c.functions = doc.at("functions").get<std::vector<std::string>>();
    for (const auto& t : doc.at("constraints")) c.constraints.push_back(parse_constraint(t.get<std::string>()));
    if (doc.contains("filters"))
      for (const auto& t : doc.at("filters")) c.filters.push_back(parse_filter(t.get<std::string>()));
    c.eq_epsilon = doc.value("eq_epsilon", 0.0);
    return c;
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
}

std::string serialize_config(const MonitorConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

MonitorConfig parse_config(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfigParse, "config is not valid JSON");
  return config_from_json(doc);
}

MonitorConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  // Write-then-rename so readers never observe a partial file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
    out << text;
    if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "': " + ec.message());
}

}  // namespace tracelens
