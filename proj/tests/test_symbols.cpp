#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "tracelens/error.hpp"
#include "tracelens/symbols.hpp"

using namespace tracelens;

namespace {

std::set<std::string> paths(const ScanReport& r) {
  std::set<std::string> out;
  for (const auto& f : r.symbols.fields) out.insert(f.path);
  return out;
}

}  // namespace

TEST_SUITE("symbols") {
  TEST_CASE("demo source yields the six fields and four functions") {
    auto r = scan_text(demo::demo_source(), "flight.c");
    CHECK(paths(r) == std::set<std::string>(testing::demo_fields().begin(),
                                            testing::demo_fields().end()));
    CHECK(r.symbols.find_field("gear")->kind == ScalarKind::kInt);
    CHECK(r.symbols.find_field("speed")->kind == ScalarKind::kFloat);
    std::vector<std::string> fns;
    for (const auto& f : r.symbols.functions) fns.push_back(f.name);
    CHECK(fns == std::vector<std::string>{"accelerate", "takeoff", "retractGear", "tick"});
    CHECK(r.symbols.functions[0].line == 16);
  }

  TEST_CASE("checked-in flight.c matches the embedded source") {
    std::ifstream in(std::string(TRACELENS_SOURCE_DIR) + "/data/flight/flight.c");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == demo::demo_source());
  }

  TEST_CASE("structs flatten to dotted leaves") {
    const char* src = R"(
      struct Vec { double x; double y; };
      struct Plane { struct Vec pos; int gear; bool armed; enum Mode { A, B } mode; };
      struct Plane plane;
      static unsigned long counter = 0, other;
    )";
    auto r = scan_text(src, "p.c");
    CHECK(paths(r) == std::set<std::string>{"plane.pos.x", "plane.pos.y", "plane.gear",
                                            "plane.armed", "plane.mode", "counter", "other"});
    CHECK(r.symbols.find_field("plane.armed")->kind == ScalarKind::kBool);
    CHECK(r.symbols.find_field("plane.mode")->kind == ScalarKind::kEnum);
  }

  TEST_CASE("small literal arrays index, others are skipped") {
    auto r = scan_text("int small[3];\nint big[17];\nint dyn[N];\ndouble *ptr;\n", "a.c");
    CHECK(paths(r) == std::set<std::string>{"small[0]", "small[1]", "small[2]"});
    CHECK(r.skipped.size() == 3);
    CHECK(r.skipped[0].line == 2);
  }

  TEST_CASE("typedefs resolve one level only") {
    const char* src = R"(
      typedef struct { int a; float b; } Pair;
      typedef Pair Pair2;
      typedef double meters;
      Pair p;
      Pair2 q;
      meters m;
      Unknown u;
    )";
    auto r = scan_text(src, "t.c");
    CHECK(paths(r) == std::set<std::string>{"p.a", "p.b", "m"});
    CHECK(r.skipped.size() == 2);
  }

  TEST_CASE("prototypes, comments, strings and macros are not symbols") {
    const char* src = R"(
      #define MAX(a, b) ((a) > (b) ? (a) : (b))
      #define MULTI \
        int hidden;
      /* int commented; */
      // int also_commented;
      void proto(int x);
      const char *msg = "int fake;";
      int real = MAX(1, 2);
      int f(int a) { int local = a; return local; }
      static void g(void) { if (1) { } }
    )";
    auto r = scan_text(src, "m.c");
    CHECK(paths(r) == std::set<std::string>{"real"});
    REQUIRE(r.symbols.functions.size() == 2);
    CHECK(r.symbols.functions[0].name == "f");
    CHECK(r.symbols.functions[1].name == "g");
    CHECK(r.symbols.functions[1].line == 11);
  }

  TEST_CASE("recursive composites are cut") {
    auto r = scan_text("struct N { int v; struct N *next; };\nstruct N head;\n", "n.c");
    CHECK(paths(r) == std::set<std::string>{"head.v"});
  }

  TEST_CASE("multi-file scan is order independent and dedupes externs") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "tracelens_scan_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "sub");
    std::ofstream(dir / "b.h") << "struct S { int a; };\nextern int shared;\n";
    std::ofstream(dir / "sub" / "a.c") << "struct S s;\nint shared;\nvoid run(void) {}\n";
    auto r = scan_sources(collect_sources({dir}));
    CHECK(paths(r) == std::set<std::string>{"s.a", "shared"});
    CHECK(r.symbols.functions.size() == 1);
    auto again = scan_sources({dir / "sub" / "a.c", dir / "b.h"});
    CHECK(again == r);
    CHECK_THROWS_AS(scan_sources({dir / "missing.c"}), Error);
    fs::remove_all(dir);
  }

  TEST_CASE("manifest round-trips and reports line numbers") {
    SymbolTable t = demo::demo_symbols();
    CHECK(parse_manifest(format_manifest(t)) == t);
    CHECK(parse_manifest("# comment\n\nfield x int\n").fields.size() == 1);
    try {
      parse_manifest("field x int\nfield y complex\n");
      FAIL("expected MANIFEST_PARSE");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kManifestParse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_manifest("field x int\nfield x float\n"), Error);
    CHECK_THROWS_AS(parse_manifest("function f nofile\n"), Error);
    CHECK_THROWS_AS(parse_manifest("fn f a.c:1\n"), Error);
  }
}
