#include "tracelens/metrics.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "tracelens/constraints.hpp"
#include "tracelens/error.hpp"

namespace tracelens {

using ojson = nlohmann::ordered_json;

ModelStats model_stats(const Efsm& model) {
  ModelStats s;
  s.states = model.states.size();
  s.transitions = model.transitions.size();
  s.initial = static_cast<std::size_t>(std::count_if(
      model.states.begin(), model.states.end(), [](const EfsmState& st) { return st.initial; }));
  s.warnings = model.warnings.size();
  return s;
}

ModelStats model_stats(const Fsm& fsm) {
  return {fsm.state_count, fsm.transitions.size(), fsm.state_count ? std::size_t{1} : 0, 0};
}

std::size_t exam_score(const Efsm& model, const std::string& faulty, ExamOrder order) {
  if (!model.find_state(faulty))
    throw Error(ErrorCode::kExamUnknownState, "no state '" + faulty + "'");
  const std::size_t n = model.states.size();
  auto state_less = [&](std::size_t a, std::size_t b) {
    const auto& x = model.states[a];
    const auto& y = model.states[b];
    if (order == ExamOrder::kLabelLexicographic && x.valuation != y.valuation)
      return x.valuation < y.valuation;
    return id_less(x.id, y.id);
  };

  std::vector<std::vector<std::pair<std::string, std::size_t>>> out(n);
  for (const auto& t : model.transitions)
    out[model.state_index(t.from)].emplace_back(t.label, model.state_index(t.to));
  for (auto& o : out) {
    std::sort(o.begin(), o.end(), [&](const auto& a, const auto& b) {
      if (order == ExamOrder::kLabelLexicographic && a.first != b.first) return a.first < b.first;
      if (a.second != b.second) return state_less(a.second, b.second);
      return a.first < b.first;
    });
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i)
    if (model.states[i].initial) roots.push_back(i);
  std::sort(roots.begin(), roots.end(), state_less);

  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t r : roots) {
    seen[r] = true;
    queue.push_back(r);
  }
  std::size_t position = 0;
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    ++position;
    if (model.states[s].id == faulty) return position;
    for (const auto& [label, to] : out[s]) {
      if (!seen[to]) {
        seen[to] = true;
        queue.push_back(to);
      }
    }
  }
  throw Error(ErrorCode::kExamUnreachable,
              "state '" + faulty + "' is not reachable from an initial state");
}

ModelDiff diff_models(const Efsm& a, const Efsm& b) {
  auto constraints = [](const Efsm& m) {
    return m.meta.contains("constraints") ? m.meta["constraints"] : ojson::array();
  };
  if (constraints(a) != constraints(b))
    throw Error(ErrorCode::kDiffConfigMismatch,
                "models use different constraints: " + constraints(a).dump() + " vs " +
                    constraints(b).dump());

  auto state_keys = [](const Efsm& m) {
    std::set<Valuation> keys;
    for (const auto& s : m.states) keys.insert(s.valuation);
    return keys;
  };
  auto transition_keys = [](const Efsm& m) {
    std::map<std::string, const Valuation*> by_id;
    for (const auto& s : m.states) by_id[s.id] = &s.valuation;
    std::set<TransitionKey> keys;
    for (const auto& t : m.transitions)
      keys.insert({*by_id.at(t.from), t.label, *by_id.at(t.to)});
    return keys;
  };

  ModelDiff d;
  auto sa = state_keys(a), sb = state_keys(b);
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(d.states_only_a));
  std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(d.states_only_b));
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(d.states_shared));
  auto ta = transition_keys(a), tb = transition_keys(b);
  std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(),
                      std::back_inserter(d.transitions_only_a));
  std::set_difference(tb.begin(), tb.end(), ta.begin(), ta.end(),
                      std::back_inserter(d.transitions_only_b));
  return d;
}

namespace {

std::vector<ConstraintSpec> model_constraints(const Efsm& m) {
  std::vector<ConstraintSpec> out;
  if (!m.meta.contains("constraints")) return out;
  for (const auto& c : m.meta["constraints"]) out.push_back(parse_constraint(c.get<std::string>()));
  return out;
}

std::string valuation_text(const Valuation& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += component_text(v[i]);
  }
  return out + ")";
}

ojson valuation_json(const Valuation& v) {
  ojson out = ojson::object();
  for (std::size_t i = 0; i < v.size(); ++i) out[std::to_string(i)] = component_text(v[i]);
  return out;
}

}  // namespace

std::string format_diff_text(const ModelDiff& diff, const Efsm& a) {
  auto specs = model_constraints(a);
  auto name = [&](const Valuation& v) {
    std::string label = describe(specs, v);
    return label.empty() ? valuation_text(v) : valuation_text(v) + " " + label;
  };
  std::string out;
  for (const auto& v : diff.states_only_a) out += "- state " + name(v) + "\n";
  for (const auto& v : diff.states_only_b) out += "+ state " + name(v) + "\n";
  for (const auto& t : diff.transitions_only_a)
    out += "- transition " + valuation_text(t.from) + " --" + t.label + "--> " +
           valuation_text(t.to) + "\n";
  for (const auto& t : diff.transitions_only_b)
    out += "+ transition " + valuation_text(t.from) + " --" + t.label + "--> " +
           valuation_text(t.to) + "\n";
  out += "states: " + std::to_string(diff.states_only_a.size()) + " only in a, " +
         std::to_string(diff.states_only_b.size()) + " only in b, " +
         std::to_string(diff.states_shared.size()) + " shared; transitions: " +
         std::to_string(diff.transitions_only_a.size()) + " only in a, " +
         std::to_string(diff.transitions_only_b.size()) + " only in b\n";
  return out;
}

nlohmann::ordered_json diff_to_json(const ModelDiff& diff) {
  ojson out;
  auto states = [](const std::vector<Valuation>& vs) {
    ojson arr = ojson::array();
    for (const auto& v : vs) arr.push_back(valuation_json(v));
    return arr;
  };
  auto transitions = [](const std::vector<TransitionKey>& ts) {
    ojson arr = ojson::array();
    for (const auto& t : ts)
      arr.push_back({{"from", valuation_json(t.from)}, {"label", t.label}, {"to", valuation_json(t.to)}});
    return arr;
  };
  out["states_only_a"] = states(diff.states_only_a);
  out["states_only_b"] = states(diff.states_only_b);
  out["states_shared"] = states(diff.states_shared);
  out["transitions_only_a"] = transitions(diff.transitions_only_a);
  out["transitions_only_b"] = transitions(diff.transitions_only_b);
  return out;
}

}  // namespace tracelens
