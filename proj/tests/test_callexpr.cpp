#include "doctest.h"

#include "arena/callexpr.hpp"
#include "support.hpp"

using namespace arena;
using namespace arena::callexpr;

TEST_CASE("keyword and positional arguments") {
  auto c = parse_statement("computer.mouse.move_abs(x=0.22, y=0.75)");
  CHECK(c.dotted() == "computer.mouse.move_abs");
  REQUIRE(c.kwargs.size() == 2);
  CHECK(c.kwargs[0].first == "x");
  CHECK(std::get<double>(c.kwargs[0].second) == doctest::Approx(0.22));

  auto p = parse_statement("  computer.keyboard.write('it\\'s')  # trailing comment");
  REQUIRE(p.args.size() == 1);
  CHECK(std::get<std::string>(p.args[0]) == "it's");

  auto b = parse_statement("f(True, 3, -2.5, k=False,)");
  CHECK(std::get<bool>(b.args[0]));
  CHECK(std::get<std::int64_t>(b.args[1]) == 3);
  CHECK(std::get<double>(b.args[2]) == -2.5);
}

TEST_CASE("grammar violations are rejected") {
  for (const char* bad : {"", "f", "f(", "f(x)", "f(1+2)", "f(1)(2)", "x = f(1)", "f(k=1, 2)", "f(*a)",
                          "f(**k)", "f([1])", "f(g(1))", "f(1); g(2)", "f(1) g", "a..b()", "f(\"open)",
                          "f(None)", "lambda: 0", "import os", "f(k=1, k2)"}) {
    CHECK_THROWS_AS(parse_statement(bad), SyntaxError);
  }
}

TEST_CASE("split_statements respects string literals") {
  auto parts = split_statements("import time; f('a;b'); time.sleep(0.5)");
  REQUIRE(parts.size() == 3);
  CHECK(parts[1] == "f('a;b')");
}

TEST_CASE("rendered literals parse back to the same value") {
  support::Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    Literal v;
    switch (g.below(4)) {
      case 0: {
        std::string s = g.word(12);
        if (g.coin()) s += g.coin() ? "\"" : "'";
        if (g.coin(0.3)) s += "\\n\n\t";
        v = s;
        break;
      }
      case 1: v = static_cast<std::int64_t>(g.below(1u << 30)) - (1 << 29); break;
      case 2: v = g.uni(-1e6, 1e6); break;
      default: v = g.coin();
    }
    auto c = parse_statement("f(" + render_literal(v) + ")");
    REQUIRE(c.args.size() == 1);
    CHECK(c.args[0] == v);
  }
}
