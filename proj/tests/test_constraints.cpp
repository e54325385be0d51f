#include "doctest.h"
#include "support.hpp"
#include "tracelens/error.hpp"

using namespace tracelens;

TEST_SUITE("constraints") {
  TEST_CASE("numbers keep their int/float identity through text") {
    CHECK(format_number(Value(std::int64_t{42})) == "42");
    CHECK(format_number(Value(1.0)) == "1.0");
    CHECK(format_number(Value(-0.5)) == "-0.5");
    CHECK(format_number(Value(1e300)) == "1e+300");
    CHECK(parse_number("7")->is_int());
    CHECK(parse_number("7.0")->is_float());
    CHECK(parse_number("1e3")->as_double() == 1000.0);
    CHECK_FALSE(parse_number("abc"));
    CHECK_FALSE(parse_number(""));
    for (double d : {0.1, 1.0 / 3.0, -123.456, 5e-324}) {
      auto back = parse_number(format_number(Value(d)));
      REQUIRE(back);
      CHECK(back->as_double() == d);
    }
  }

  TEST_CASE("compare is exact for integers and epsilon-aware otherwise") {
    CHECK(compare(Value(1), Value(2), 5) == Relation::kLess);
    CHECK(compare(Value(1.0), Value(1.05), 0.1) == Relation::kEqual);
    CHECK(compare(Value(1.0), Value(1.05), 0.0) == Relation::kLess);
    CHECK(compare(Value(3), Value(2.95), 0.1) == Relation::kEqual);
  }

  TEST_CASE("constraint text round-trips") {
    for (std::string text : {"value_change(gear)", "cmp(speed, takeOffSpeed)", "cmp(altitude, 0)",
                             "range(altitude, groundAlt, safeAltForGearRetract)",
                             "range(plane.alt[3], 0, 2.5)"}) {
      CHECK(format_constraint(parse_constraint(text)) == text);
    }
    CHECK(format_filter(parse_filter("filter(altitude, 0, 100)")) == "filter(altitude, 0, 100)");
    CHECK(format_filter(parse_filter("filter(x,-1.5,2)")) == "filter(x, -1.5, 2)");
  }

  TEST_CASE("malformed constraints are rejected") {
    for (std::string text : {"cmp(x)", "range(x, 1)", "nope(x)", "value_change(1x)", "cmp x, y",
                             "filter(x, a, 1)"}) {
      CAPTURE(text);
      CHECK_THROWS_AS(text.rfind("filter", 0) == 0 ? (void)parse_filter(text)
                                                   : (void)parse_constraint(text),
                      Error);
    }
  }

  TEST_CASE("evaluate follows the template definitions") {
    MonitorConfig c = testing::gear_config();
    FieldMap snap{{"gear", Value(1)},          {"speed", Value(40.0)},
                  {"takeOffSpeed", Value(60.0)}, {"altitude", Value(50.0)},
                  {"groundAlt", Value(0.0)},   {"safeAltForGearRetract", Value(100.0)}};
    Valuation v = evaluate(snap, c);
    REQUIRE(v.size() == 3);
    CHECK(v[0].raw() == Value(1));
    CHECK(v[1].token() == Token::kLT);
    CHECK(v[2].token() == Token::kWithin);
    snap["altitude"] = Value(100.0);
    CHECK(evaluate(snap, c)[2].token() == Token::kAtHi);
    snap["altitude"] = Value(0.0);
    CHECK(evaluate(snap, c)[2].token() == Token::kAtLo);
    snap["altitude"] = Value(-1.0);
    CHECK(evaluate(snap, c)[2].token() == Token::kBelow);
    snap["altitude"] = Value(101.0);
    CHECK(evaluate(snap, c)[2].token() == Token::kAbove);
    CHECK(describe(c.constraints, evaluate(snap, c)) ==
          "gear==1 && speed<takeOffSpeed && altitude>safeAltForGearRetract");
    snap.erase("gear");
    CHECK_THROWS_AS(evaluate(snap, c), Error);
  }

  TEST_CASE("range components are exhaustive and exclusive on a grid") {
    MonitorConfig c;
    c.constraints = {parse_constraint("range(x, 2, 5)")};
    for (int x = -2; x <= 8; ++x) {
      Valuation v = evaluate({{"x", Value(x)}}, c);
      Token expect = x < 2 ? Token::kBelow : x == 2 ? Token::kAtLo : x < 5 ? Token::kWithin
                                               : x == 5 ? Token::kAtHi : Token::kAbove;
      CHECK(v[0].token() == expect);
    }
  }

  TEST_CASE("filters are inclusive and antitone") {
    std::vector<RangeFilter> none;
    std::vector<RangeFilter> one{parse_filter("filter(speed, 0, 100)")};
    std::vector<RangeFilter> two = one;
    two.push_back(parse_filter("filter(alt, 10, 20)"));
    for (int speed = -10; speed <= 120; speed += 5) {
      for (int alt = 0; alt <= 30; alt += 5) {
        FieldMap s{{"speed", Value(speed)}, {"alt", Value(alt)}};
        CHECK(admits(s, none, 0));
        if (admits(s, two, 0)) CHECK(admits(s, one, 0));
      }
    }
    CHECK(admits({{"speed", Value(100.0)}}, one, 0));
    CHECK_FALSE(admits({{"speed", Value(150.0)}}, one, 0));
    CHECK(admits({{"speed", Value(100.0000001)}}, one, 1e-6));
    CHECK_THROWS_AS(admits({{"x", Value(1)}}, one, 0), Error);
  }

  TEST_CASE("validate_config reports findings as data") {
    auto symbols = demo::demo_symbols();
    CHECK(validate_config(testing::gear_config(), symbols).empty());
    MonitorConfig bad = testing::onground_config();
    bad.fields.push_back("nosuch");
    bad.functions.push_back("ghost");
    bad.constraints.push_back(parse_constraint("cmp(gear, 1)"));
    bad.constraints.push_back(parse_constraint("range(altitude, 5, 1)"));
    bad.eq_epsilon = -1;
    std::set<std::string> codes;
    for (const auto& f : validate_config(bad, symbols)) codes.insert(f.code);
    CHECK(codes.count("UNKNOWN_FIELD"));
    CHECK(codes.count("UNKNOWN_FUNCTION"));
    CHECK(codes.count("FIELD_NOT_SELECTED"));
    CHECK(codes.count("RANGE_EMPTY"));
    CHECK(codes.count("NEGATIVE_EPSILON"));
  }
}
