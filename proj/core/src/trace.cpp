#include "tracelens/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tracelens/error.hpp"

namespace tracelens {

using ojson = nlohmann::ordered_json;

namespace {

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

Value value_from_json(const ojson& j) {
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  return Value(j.get<double>());
}

ojson value_to_json(const Value& v) {
  if (v.is_int()) return v.as_int();
  return v.as_double();
}

}  // namespace

// ---------------------------------------------------------------------------
// Trace format

std::string format_event(const TraceEvent& event,
                         const std::vector<std::string>& fields) {
  std::string out;
  out.reserve(64 + fields.size() * 16);
  out += "{\"seq\":";
  out += std::to_string(event.seq);
  out += event.kind == EventKind::kEnter ? ",\"kind\":\"enter\"" : ",\"kind\":\"exit\"";
  out += ",\"fn\":";
  out += quote(event.fn);
  out += ",\"depth\":";
  out += std::to_string(event.depth);
  out += ",\"vars\":{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
    out += ':';
    out += format_number(event.vars.at(i));
  }
  out += '}';
  if (event.kind == EventKind::kEnter) {
    out += ",\"args\":{";
    for (std::size_t i = 0; i < event.args.size(); ++i) {
      if (i) out += ',';
      out += quote(event.args[i].first);
      out += ':';
      out += event.args[i].second;
    }
    out += '}';
  }
  out += '}';
  return out;
}

TraceReader::TraceReader(std::istream& in) : in_(in) {}

std::optional<TraceEvent> TraceReader::next() {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kTraceParse,
                 "line " + std::to_string(line_no_) + ": " + why);
  };
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.find_first_not_of(" \t") == std::string::npos) continue;

    ojson j = ojson::parse(line_, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");

    TraceEvent ev;
    auto seq = j.find("seq");
    if (seq == j.end() || !seq->is_number_integer()) throw fail("missing integer 'seq'");
    ev.seq = seq->get<std::int64_t>();
    auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string()) throw fail("missing 'kind'");
    if (*kind == "enter") ev.kind = EventKind::kEnter;
    else if (*kind == "exit") ev.kind = EventKind::kExit;
    else throw fail("kind must be 'enter' or 'exit'");
    auto fn = j.find("fn");
    if (fn == j.end() || !fn->is_string()) throw fail("missing string 'fn'");
    ev.fn = fn->get<std::string>();
    auto depth = j.find("depth");
    if (depth == j.end() || !depth->is_number_integer() || depth->get<std::int64_t>() < 0)
      throw fail("missing non-negative 'depth'");
    ev.depth = depth->get<int>();
    auto vars = j.find("vars");
    if (vars == j.end() || !vars->is_object()) throw fail("missing object 'vars'");

    if (!last_seq_) {
      for (const auto& [k, v] : vars->items()) fields_.push_back(k);
    }
    if (vars->size() != fields_.size()) throw fail("vars keys differ from the first event");
    ev.vars.resize(fields_.size());
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      // Fast path: keys in the canonical order.
      auto it = vars->find(fields_[i]);
      if (it == vars->end()) throw fail("vars lacks '" + fields_[i] + "'");
      if (!it->is_number()) throw fail("var '" + fields_[i] + "' is not a number");
      ev.vars[i] = value_from_json(*it);
    }
    auto args = j.find("args");
    if (args != j.end()) {
      if (ev.kind == EventKind::kExit) throw fail("'args' on an exit event");
      if (!args->is_object()) throw fail("'args' must be an object");
      for (const auto& [k, v] : args->items()) ev.args.emplace_back(k, v.dump());
    }
    for (const auto& [k, v] : j.items()) {
      if (k != "seq" && k != "kind" && k != "fn" && k != "depth" && k != "vars" && k != "args")
        throw fail("unknown key '" + k + "'");
    }

    if (last_seq_ && ev.seq <= *last_seq_)
      throw fail("seq " + std::to_string(ev.seq) + " does not increase");
    last_seq_ = ev.seq;

    auto nesting = [&](const std::string& why) {
      return Error(ErrorCode::kTraceNesting,
                   "seq " + std::to_string(ev.seq) + ": " + why);
    };
    if (ev.kind == EventKind::kEnter) {
      if (static_cast<std::size_t>(ev.depth) != stack_.size())
        throw nesting("enter of '" + ev.fn + "' at depth " + std::to_string(ev.depth) +
                      ", expected " + std::to_string(stack_.size()));
      stack_.emplace_back(ev.fn, ev.depth);
    } else {
      if (stack_.empty()) throw nesting("exit of '" + ev.fn + "' without matching enter");
      if (stack_.back().first != ev.fn || stack_.back().second != ev.depth)
        throw nesting("exit of '" + ev.fn + "' does not match open call '" +
                      stack_.back().first + "'");
      stack_.pop_back();
    }
    return ev;
  }
  if (in_.bad()) throw Error(ErrorCode::kIo, "read error");
  if (!stack_.empty())
    throw Error(ErrorCode::kTraceNesting,
                "seq " + std::to_string(last_seq_.value_or(0)) + ": call to '" +
                    stack_.back().first + "' never returns");
  return std::nullopt;
}

ConcreteTrace parse_trace(std::istream& in, std::string id) {
  TraceReader reader(in);
  ConcreteTrace trace;
  trace.id = std::move(id);
  while (auto ev = reader.next()) trace.events.push_back(std::move(*ev));
  trace.monitored_fields = reader.fields();
  return trace;
}

ConcreteTrace parse_trace_text(const std::string& text, std::string id) {
  std::istringstream in(text);
  return parse_trace(in, std::move(id));
}

ConcreteTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  return parse_trace(in, path.stem().string());
}

void write_trace(std::ostream& out, const ConcreteTrace& trace) {
  for (const auto& ev : trace.events) out << format_event(ev, trace.monitored_fields) << '\n';
}

std::string serialize_trace(const ConcreteTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

// ---------------------------------------------------------------------------
// Attribution

Attributor::Attributor(std::vector<std::size_t> field_indices, double eps,
                       Interest keep_invocation)
    : fields_(std::move(field_indices)), eps_(eps), keep_(std::move(keep_invocation)) {}

void Attributor::feed(const TraceEvent& event) {
  std::vector<Value> cur;
  cur.reserve(fields_.size());
  for (std::size_t idx : fields_) cur.push_back(event.vars.at(idx));

  // Boundary between the previous event and this one. The bracketing calls
  // are exactly the frames open after the previous event.
  if (prev_) {
    for (std::size_t f = 0; f < cur.size(); ++f) {
      if (!differs((*prev_)[f], cur[f], eps_)) continue;
      if (stack_.empty()) {
        loose_.push_back({names_.size() > f ? names_[f] : std::to_string(f), event.seq, "", -1, -1});
      } else {
        stack_.back().pending.push_back({f, event.seq, stack_.back().serial});
      }
    }
  }

  if (event.kind == EventKind::kEnter) {
    if (stack_.empty()) base_serial_ = next_serial_;
    stack_.push_back({next_serial_++, event.fn, event.depth, event.seq, cur, {}});
    closed_.emplace_back();
  } else {
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    Closed c{frame.fn, frame.depth, frame.enter_seq, event.seq, cur, {},
             !keep_ || keep_(frame.fn)};
    closed_[frame.serial - base_serial_] = std::move(c);
    for (const auto& p : frame.pending) {
      if (differs(frame.enter_vars[p.field], cur[p.field], eps_)) {
        credit(frame.serial, p.field, p.seq);
      } else if (!stack_.empty()) {
        stack_.back().pending.push_back(p);
      } else {
        credit(p.fallback, p.field, p.seq);
      }
    }
    if (stack_.empty()) drain();
  }
  prev_ = std::move(cur);
}

void Attributor::credit(std::size_t serial, std::size_t field, std::int64_t seq) {
  credits_.push_back({serial, field, seq});
}

void Attributor::drain() {
  for (const auto& c : credits_) {
    auto& closed = closed_[c.serial - base_serial_];
    closed->credited.push_back(c.field);
  }
  // Loose changes recorded before this call started precede its records.
  std::vector<AttributionRecord> recs;
  recs.reserve(credits_.size());
  for (const auto& c : credits_) {
    const auto& closed = *closed_[c.serial - base_serial_];
    recs.push_back({names_.size() > c.field ? names_[c.field] : std::to_string(c.field),
                    c.seq, closed.fn, closed.depth, closed.enter_seq});
  }
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.seq, a.field) < std::tie(b.seq, b.field);
  });
  for (auto& r : loose_) records_out_.push_back(std::move(r));
  loose_.clear();
  for (auto& r : recs) records_out_.push_back(std::move(r));

  std::vector<Invocation> invs;
  for (auto& slot : closed_) {
    if (!slot || !slot->keep) continue;
    auto credited = std::move(slot->credited);
    std::sort(credited.begin(), credited.end());
    credited.erase(std::unique(credited.begin(), credited.end()), credited.end());
    invs.push_back({std::move(slot->fn), slot->depth, slot->enter_seq, slot->exit_seq,
                    std::move(credited), std::move(slot->exit_vars)});
  }
  std::sort(invs.begin(), invs.end(),
            [](const Invocation& a, const Invocation& b) { return a.exit_seq < b.exit_seq; });
  for (auto& i : invs) invocations_out_.push_back(std::move(i));
  closed_.clear();
  credits_.clear();
  base_serial_ = next_serial_;
}

std::vector<AttributionRecord> Attributor::take_records() {
  // Loose records produced while idle are final as soon as they exist.
  if (stack_.empty() && !loose_.empty()) {
    for (auto& r : loose_) records_out_.push_back(std::move(r));
    loose_.clear();
  }
  return std::exchange(records_out_, {});
}

std::vector<Invocation> Attributor::take_invocations() {
  return std::exchange(invocations_out_, {});
}

namespace {

std::vector<std::size_t> resolve_fields(const std::vector<std::string>& trace_fields,
                                        const std::vector<std::string>& wanted) {
  std::vector<std::size_t> out;
  for (const auto& f : wanted) {
    auto it = std::find(trace_fields.begin(), trace_fields.end(), f);
    if (it == trace_fields.end())
      throw Error(ErrorCode::kFilterFields, "field '" + f + "' is not monitored by the trace");
    out.push_back(static_cast<std::size_t>(it - trace_fields.begin()));
  }
  return out;
}

}  // namespace

ChangeAttribution attribute_changes(const ConcreteTrace& trace,
                                    const std::vector<std::string>& fields,
                                    double eps) {
  Attributor attributor(resolve_fields(trace.monitored_fields, fields), eps,
                        [](const std::string&) { return false; });
  attributor.set_field_names(fields);
  ChangeAttribution out;
  for (const auto& ev : trace.events) attributor.feed(ev);
  out.records = attributor.take_records();
  return out;
}

// ---------------------------------------------------------------------------
// Filtering

TraceFilter::TraceFilter(const MonitorConfig& config,
                         const std::vector<std::string>& trace_fields, std::string id)
    : config_(config),
      indices_(resolve_fields(trace_fields, config.fields)),
      names_(config.fields),
      attributor_(indices_, config.eq_epsilon,
                  [&config](const std::string& fn) { return config.selects_function(fn); }) {
  (void)id;
  attributor_.set_field_names(names_);
}

void TraceFilter::feed(const TraceEvent& event) {
  if (!started_) {
    started_ = true;
    first_seq_ = event.seq;
    initial_.clear();
    for (std::size_t idx : indices_) initial_.push_back(event.vars.at(idx));
  }
  last_seq_ = event.seq;
  attributor_.feed(event);
  if (attributor_.idle()) collect();
}

void TraceFilter::collect() {
  for (auto& inv : attributor_.take_invocations()) {
    FilteredStep step{std::move(inv.fn), inv.enter_seq, inv.exit_seq, {}, std::move(inv.exit_vars)};
    for (std::size_t f : inv.credited) step.changed.push_back(names_[f]);
    std::sort(step.changed.begin(), step.changed.end());
    if (step.changed.empty()) inert_.push_back(std::move(step));
    else steps_.push_back(std::move(step));
  }
  for (auto& rec : attributor_.take_records()) {
    if (rec.fn.empty() || !config_.selects_function(rec.fn))
      unexplained_.push_back({std::move(rec.field), rec.seq, std::move(rec.fn)});
  }
}

std::vector<FilteredStep> TraceFilter::take_steps() { return std::exchange(steps_, {}); }
std::vector<FilteredStep> TraceFilter::take_inert() { return std::exchange(inert_, {}); }
std::vector<UnexplainedChange> TraceFilter::take_unexplained() {
  return std::exchange(unexplained_, {});
}

FilteredTrace filter_trace(const ConcreteTrace& trace, const MonitorConfig& config) {
  TraceFilter filter(config, trace.monitored_fields, trace.id);
  FilteredTrace out;
  out.id = trace.id;
  out.origin = trace.id;
  out.fields = config.fields;
  for (const auto& ev : trace.events) {
    filter.feed(ev);
    for (auto& s : filter.take_steps()) out.steps.push_back(std::move(s));
    for (auto& s : filter.take_inert()) out.inert.push_back(std::move(s));
    for (auto& u : filter.take_unexplained()) out.unexplained.push_back(std::move(u));
  }
  out.initial = filter.initial();
  out.first_seq = filter.first_seq();
  out.last_seq = filter.last_seq();
  return out;
}

// ---------------------------------------------------------------------------
// .ftrc files

std::string serialize_filtered(const FilteredTrace& trace) {
  ojson header;
  header["kind"] = "ftrc";
  header["id"] = trace.id;
  header["origin"] = trace.origin;
  header["fields"] = trace.fields;
  header["initial"] = ojson::array();
  for (const auto& v : trace.initial) header["initial"].push_back(value_to_json(v));
  header["first_seq"] = trace.first_seq;
  header["last_seq"] = trace.last_seq;
  header["unexplained"] = ojson::array();
  for (const auto& u : trace.unexplained)
    header["unexplained"].push_back({{"field", u.field}, {"seq", u.seq}, {"fn", u.fn}});

  std::vector<const FilteredStep*> calls;
  for (const auto& s : trace.steps) calls.push_back(&s);
  for (const auto& s : trace.inert) calls.push_back(&s);
  std::sort(calls.begin(), calls.end(),
            [](const FilteredStep* a, const FilteredStep* b) { return a->exit_seq < b->exit_seq; });

  std::string out = header.dump() + "\n";
  for (const auto* s : calls) {
    ojson line;
    line["fn"] = s->fn;
    line["enter"] = s->enter_seq;
    line["exit"] = s->exit_seq;
    line["changed"] = s->changed;
    line["vars"] = ojson::array();
    for (const auto& v : s->vars) line["vars"].push_back(value_to_json(v));
    out += line.dump() + "\n";
  }
  return out;
}

FilteredTrace parse_filtered(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  FilteredTrace out;
  bool have_header = false;
  auto values = [](const ojson& arr) {
    std::vector<Value> vs;
    for (const auto& v : arr) {
      if (!v.is_number()) throw std::invalid_argument("non-numeric value");
      vs.push_back(value_from_json(v));
    }
    return vs;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      ojson j = ojson::parse(line);
      if (!have_header) {
        if (j.value("kind", "") != "ftrc") throw std::invalid_argument("missing ftrc header");
        out.id = j.at("id").get<std::string>();
        out.origin = j.at("origin").get<std::string>();
        out.fields = j.at("fields").get<std::vector<std::string>>();
        out.initial = values(j.at("initial"));
        out.first_seq = j.at("first_seq").get<std::int64_t>();
        out.last_seq = j.at("last_seq").get<std::int64_t>();
        for (const auto& u : j.at("unexplained"))
          out.unexplained.push_back({u.at("field").get<std::string>(),
                                     u.at("seq").get<std::int64_t>(),
                                     u.at("fn").get<std::string>()});
        have_header = true;
        continue;
      }
      FilteredStep s;
      s.fn = j.at("fn").get<std::string>();
      s.enter_seq = j.at("enter").get<std::int64_t>();
      s.exit_seq = j.at("exit").get<std::int64_t>();
      s.changed = j.at("changed").get<std::vector<std::string>>();
      s.vars = values(j.at("vars"));
      if (s.vars.size() != out.fields.size())
        throw std::invalid_argument("vars length differs from fields");
      (s.changed.empty() ? out.inert : out.steps).push_back(std::move(s));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kTraceParse,
                  "filtered trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::kTraceParse, "filtered trace is empty");
  return out;
}

FilteredTrace load_filtered(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_filtered(buf.str());
}

}  // namespace tracelens
