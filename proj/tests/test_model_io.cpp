#include <filesystem>
#include <regex>

#include "doctest.h"
#include "support.hpp"
#include "tracelens/abstractor.hpp"
#include "tracelens/error.hpp"
#include "tracelens/model_io.hpp"

using namespace tracelens;

namespace {

Efsm gear_model() {
  auto c = testing::gear_config();
  return build_model({filter_trace(testing::demo_trace(demo::Scenario::kFullFlight), c)}, c);
}

std::size_t count(const std::string& text, const std::regex& re) {
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_model(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("round trip is byte-identical") {
    Efsm m = gear_model();
    std::string text = serialize_model(m);
    CHECK(text.back() == '\n');
    Efsm back = parse_model(text);
    CHECK(serialize_model(back) == text);
    CHECK(back.states.size() == m.states.size());
    CHECK(back.states[0].valuation == m.states[0].valuation);
  }

  TEST_CASE("baseline models round trip too") {
    Fsm f = ktails(build_pta({{"a", "b"}, {"a", "c"}}), 1, true);
    Efsm m = to_efsm(f, {{"kind", "fsm"}});
    std::string text = serialize_model(m);
    CHECK(serialize_model(parse_model(text)) == text);
  }

  TEST_CASE("malformed models") {
    CHECK(parse_error("{}") == ErrorCode::kModelParse);
    CHECK(parse_error("not json") == ErrorCode::kModelParse);
    CHECK(parse_error(R"({"meta":{},"states":[{"id":"s0"}],"transitions":[],"warnings":[]})") ==
          ErrorCode::kModelParse);
    std::string dangling =
        R"({"meta":{},"states":[],"transitions":[{"from":"s0","to":"s1","label":"f"}],"warnings":[]})";
    CHECK(parse_error(dangling) == ErrorCode::kModelParse);
    try {
      parse_model(R"({"meta":{},"states":[{"id":7}],"transitions":[],"warnings":[]})");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("$.states[0]") != std::string::npos);
    }
  }

  TEST_CASE("DOT export") {
    Efsm m = gear_model();
    std::string dot = export_dot(m);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(count(dot, std::regex(R"(\n  "s\d+" \[)")) == m.states.size());
    CHECK(count(dot, std::regex(" -> ")) == m.transitions.size());
    CHECK(count(dot, std::regex("doublecircle")) == 1);
    DotOptions o;
    o.highlight = {m.states.back().id};
    CHECK(count(export_dot(m, o), std::regex("style=filled")) == 1);
    o.show_valuations = false;
    CHECK(export_dot(m, o).find("&&") == std::string::npos);
    CHECK(export_dot(m) == dot);
  }

  TEST_CASE("config round trip and rejection of unknown keys") {
    auto c = testing::gear_config();
    c.filters = {parse_filter("filter(altitude, -5, 250.5)")};
    c.eq_epsilon = 0.01;
    std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    try {
      parse_config(R"({"name":"x","fields":[],"functions":[],"constraints":[],"colour":1})");
      FAIL("expected CONFIG_PARSE");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfigParse);
    }
  }

  TEST_CASE("file helpers") {
    auto dir = std::filesystem::temp_directory_path() / "tracelens_model_io";
    std::filesystem::create_directories(dir);
    Efsm m = gear_model();
    write_file(dir / "m.model.json", serialize_model(m));
    CHECK(serialize_model(load_model(dir / "m.model.json")) == serialize_model(m));
    CHECK_THROWS_AS(read_file(dir / "missing"), Error);
    std::filesystem::remove_all(dir);
  }
}
