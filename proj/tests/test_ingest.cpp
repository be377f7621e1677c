#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hetcong/error.hpp"
#include "hetcong/netlist_io.hpp"
#include "hetcong/oracle.hpp"
#include "oracles.hpp"

using namespace hetcong;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMini = R"(DESIGN mini ;
DIEAREA ( 0 0 ) ( 1000 1000 ) ;
MASTERS 1 ;
  - A 100 100 + PIN I INPUT ( 10 20 ) + PIN O OUTPUT ( 90 50 ) ;
END MASTERS
COMPONENTS 2 ;
  - a A + PLACED ( 0 0 ) N ;
  - b A + PLACED ( 500 500 ) N ;
END COMPONENTS
NETS 1 ;
  - n ( a O ) ( b I ) ;
END NETS
END DESIGN
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("golden DEF matches the hand-derived listing") {
  std::vector<std::string> warnings;
  const Design d = parse_def(slurp(HETCONG_FIXTURES "/golden.def"), &warnings);
  CHECK(d.cells.size() == 21);
  CHECK(d.nets.size() == 15);
  CHECK(emit_canonical(d) == slurp(HETCONG_FIXTURES "/golden.expected.jsonl"));
  CHECK(warnings.size() == 3);
}

TEST_CASE("canonical round trip is the identity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SynthSpec s;
    s.n_cells = 120;
    s.n_nets = 140;
    s.seed = seed;
    const Design d = synth_design(s);
    const std::string text = emit_canonical(d);
    const Design back = parse_canonical(text);
    CHECK(back == d);
    CHECK(emit_canonical(back) == text);
  }
  const Design g = parse_def(slurp(HETCONG_FIXTURES "/golden.def"));
  CHECK(parse_design(emit_canonical(g)) == g);
}

TEST_CASE("parse_design detects the input format") {
  const Design a = parse_design(kMini);
  CHECK(a.name == "mini");
  const Design b = parse_design("\n  " + emit_canonical(a));
  CHECK(b == a);
}

TEST_CASE("two-cell design with one net") {
  const Design d = parse_def(kMini);
  REQUIRE(d.cells.size() == 2);
  REQUIRE(d.nets.size() == 1);
  REQUIRE(d.nets[0].pins.size() == 2);
  CHECK(d.nets[0].pins[0].direction == PinDirection::Output);
  CHECK(d.nets[0].pins[0].offset_x == 90);
  CHECK(d.nets[0].pins[1].direction == PinDirection::Input);
  CHECK(pin_x(d, d.nets[0].pins[1]) == doctest::Approx(510));
  CHECK(pin_y(d, d.nets[0].pins[1]) == doctest::Approx(520));
}

TEST_CASE("DEF errors name the offending item") {
  SUBCASE("unknown component in a net") {
    const std::string bad = replace(kMini, "( b I )", "( zz I )");
    try {
      parse_def(bad);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("zz") != std::string::npos);
      CHECK(std::string(e.what()).find("line 11") != std::string::npos);
    }
  }
  SUBCASE("missing DIEAREA") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "DIEAREA ( 0 0 ) ( 1000 1000 ) ;", "")), ParseError);
  }
  SUBCASE("cell outside the die") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "( 500 500 )", "( 1000 500 )")), ValidationError);
  }
  SUBCASE("unplaced component") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "+ PLACED ( 500 500 ) N", "+ UNPLACED")), ParseError);
  }
  SUBCASE("empty net") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "( a O ) ( b I )", "")), ParseError);
  }
  SUBCASE("duplicate pin on a net") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "( a O ) ( b I )", "( a O ) ( a O )")), ValidationError);
  }
  SUBCASE("polygonal die") {
    CHECK_THROWS_AS(parse_def(replace(kMini, "( 1000 1000 ) ;", "( 1000 1000 ) ( 0 1000 ) ;")), ParseError);
  }
}

TEST_CASE("orientation swaps the footprint of rotated cells") {
  const Design d = parse_def(replace(kMini, "+ PLACED ( 500 500 ) N", "+ PLACED ( 500 500 ) E"));
  CHECK(d.cells[1].w == 100);
  // pin I at (10, 20) of a 100x100 master rotated by E lands at (20, 90)
  CHECK(d.nets[0].pins[1].offset_x == 20);
  CHECK(d.nets[0].pins[1].offset_y == 90);
}

TEST_CASE("canonical parser rejects malformed records") {
  CHECK_THROWS_AS(parse_canonical("{\"cell\":0}\n"), ParseError);
  CHECK_THROWS_AS(parse_canonical("{\"design\":\"x\",\"die\":[0,0,10,10]}\nnot json\n"), ParseError);
  const std::string gap =
      "{\"design\":\"x\",\"die\":[0,0,10,10]}\n"
      "{\"cell\":1,\"name\":\"a\",\"x\":0,\"y\":0,\"w\":1,\"h\":1,\"master\":\"m\",\"is_macro\":false}\n";
  CHECK_THROWS_AS(parse_canonical(gap), ParseError);
}

TEST_CASE("validate enforces design invariants") {
  Design d = oracle::random_design(4, 10, 5);
  CHECK_NOTHROW(validate(d));
  Design bad = d;
  bad.cells[3].w = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = d;
  bad.nets[0].pins[0].cell = 99;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = d;
  bad.cells.clear();
  bad.nets.clear();
  CHECK_THROWS_AS(validate(bad), ValidationError);
}
