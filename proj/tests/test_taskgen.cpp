#include <algorithm>
#include <optional>
#include <set>

#include "doctest.h"
#include "mtplab/error.hpp"
#include "mtplab/taskgen.hpp"
#include "oracles/countdown_search.hpp"
#include "oracles/dpll.hpp"
#include "oracles/graph_walk.hpp"
#include "support.hpp"

using namespace mtplab;

namespace {

template <typename Fn>
std::optional<Errc> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("2-path 3-node stars have the reference shape") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = gen_star(2, 3, 10, seed);
    REQUIRE(g.edges.size() == 4);
    CHECK(g.path.size() == 3);
    CHECK(g.path_count() == 2);
    CHECK(g.path.front() == g.start);
    CHECK(g.path.back() == g.end);
    std::set<NodeId> labels;
    for (const auto& e : g.edges) labels.insert({e.from, e.to});
    CHECK(labels.size() == 5);
    CHECK(oracle::check_star(g).ok);
  }
  const auto ref = testing::reference_instance();
  CHECK(oracle::check_star(ref).ok);
  CHECK(ref.path == std::vector<NodeId>{3, 6, 10});
}

TEST_CASE("minimal star and a large one") {
  const auto one = gen_star(1, 2, 2, 9);
  CHECK(one.edges.size() == 1);
  CHECK(one.path == std::vector<NodeId>{one.start, one.end});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto big = gen_star(5, 5, 50, seed);
    const auto w = oracle::check_star(big);
    CHECK_MESSAGE(w.ok, w.why);
    CHECK_NOTHROW(validate_graph(big));
  }
}

TEST_CASE("infeasible star sizes are a capacity error") {
  CHECK(code_of([] { gen_star(3, 4, 9, 0); }) == Errc::capacity);
  CHECK(code_of([] { gen_star(0, 3, 10, 0); }) == Errc::capacity);
}

TEST_CASE("generation is a pure function of the seed") {
  CHECK(gen_star(3, 4, 20, 77) == gen_star(3, 4, 20, 77));
  CHECK(serialize(gen_binary_tree(4, 5)) == serialize(gen_binary_tree(4, 5)));
  CHECK(gen_countdown(4, 11) == gen_countdown(4, 11));
  CHECK(gen_sat(13) == gen_sat(13));
}

TEST_CASE("binary trees") {
  const auto root_only = gen_binary_tree(1, 0);
  CHECK(root_only.edges.empty());
  CHECK(root_only.path == std::vector<NodeId>{root_only.start});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = gen_binary_tree(3, seed);
    CHECK(t.path.size() == 3);
    CHECK(t.edges.size() == 6);
    const auto w = oracle::check_tree(t);
    CHECK_MESSAGE(w.ok, w.why);
  }
  CHECK(code_of([] { gen_binary_tree(0, 0); }) == Errc::capacity);
}

TEST_CASE("countdown rules") {
  CHECK(apply_op(ArithOp::div, 12, 5) == std::nullopt);
  CHECK(apply_op(ArithOp::sub, 3, 3) == std::nullopt);
  CHECK(apply_op(ArithOp::mul, 10, 10) == std::nullopt);
  CHECK(apply_op(ArithOp::div, 57, 3) == 19);
}

TEST_CASE("the illustrated countdown tree reaches 19") {
  const auto l = CountdownExpr::combine(CountdownExpr::leaf(97), ArithOp::sub,
                                        CountdownExpr::leaf(40));
  const auto r = CountdownExpr::combine(CountdownExpr::leaf(14), ArithOp::sub,
                                        CountdownExpr::leaf(11));
  CountdownInstance c{{11, 14, 40, 97}, 19, CountdownExpr::combine(l, ArithOp::div, r)};
  CHECK(verify_countdown(c));
  CHECK(c.solution.to_infix() == "((97-40)/(14-11))");
  CHECK(oracle::reachable(c.operands).count(19) == 1);
}

TEST_CASE("5 + 5 = 10") {
  CountdownInstance c{{5, 5}, 10,
                      CountdownExpr::combine(CountdownExpr::leaf(5), ArithOp::add,
                                             CountdownExpr::leaf(5))};
  CHECK(verify_countdown(c));
  c.target = 11;
  CHECK_FALSE(verify_countdown(c));
}

TEST_CASE("malformed countdown text is a parse error with a position") {
  try {
    parse_countdown("5,5 / 10 = (5+)");
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.position() >= 11);
  }
  CHECK(code_of([] { parse_countdown("5,5 - 10 = (5+5)"); }) == Errc::parse);
  CHECK(code_of([] { parse_countdown("5,x / 10 = (5+5)"); }) == Errc::parse);
}

TEST_CASE("sat: the illustrated formula and the trivial case") {
  SatInstance s{3, {{-1}, {1, -2}, {1, 2, 3}}, {false, false, true}};
  CHECK(verify_sat(s, s.witness));
  CHECK_FALSE(verify_sat(s, {false, false, false}));
  SatInstance pos{3, {{1, 2, 3}, {1, 2, 3}}, {true, true, true}};
  CHECK(verify_sat(pos, pos.witness));
}

TEST_CASE("generated sat clauses are 3 distinct variables") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = gen_sat(seed);
    CHECK(s.clauses.size() == kSatClauses);
    for (const auto& c : s.clauses) {
      REQUIRE(c.size() == 3);
      std::set<int> vars{std::abs(c[0]), std::abs(c[1]), std::abs(c[2])};
      CHECK(vars.size() == 3);
      CHECK(*vars.rbegin() <= kSatVariables);
    }
  }
}

TEST_CASE("serialize / parse") {
  const std::string d3 =
      "74,64 | 3,36 | 49,63 | 40,16 | 31,73 | 73,18 | 51,22 | 49,46 | 38,19 | 13,27 | 46,40 | "
      "49,74 | 63,31 | 65,13 | 64,3 | 49,61 | 19,51 | 61,65 | 49,38 | 16,41 / 49,18 = "
      "49,63,31,73,18";
  const auto g = parse_graph(d3, GraphKind::star);
  CHECK(serialize(g) == d3);
  CHECK(g.path_count() == 5);
  CHECK(oracle::check_star(g).ok);

  const std::string tiny = "3,6 / 3,6 = 3,6";
  CHECK(serialize(parse_graph(tiny, GraphKind::star)) == tiny);
  // theory order puts end first
  const auto rev = parse_graph("3,6 / 6,3 = 3,6", GraphKind::star, PromptOrder::end_start);
  CHECK(rev.start == 3);
  CHECK(serialize(rev, PromptOrder::end_start) == "3,6 / 6,3 = 3,6");

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = gen_star(3, 4, 30, seed);
    CHECK(parse_graph(serialize(s), GraphKind::star, PromptOrder::start_end, s.node_count) == s);
    const auto t = gen_binary_tree(3, seed);
    CHECK(parse_graph(serialize(t), GraphKind::tree, PromptOrder::start_end, t.node_count) == t);
    const auto c = gen_countdown(4, seed);
    CHECK(parse_countdown(serialize(c)) == c);
    const auto sat = gen_sat(seed);
    CHECK(parse_sat(serialize(sat)) == sat);
  }
}

TEST_CASE("bad graph lines") {
  for (const char* bad : {"3,6 / 3,6", "3,6 | / 3,6 = 3,6", "3,x / 3,6 = 3,6",
                          "3,6 / 3,7 = 3,6", "3,6 | 6,3 / 3,6 = 3,6"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_graph(bad, GraphKind::star); }) == Errc::parse);
  }
  try {
    parse_graph("3,6 / 3,x = 3,6", GraphKind::star);
    FAIL("expected throw");
  } catch (const ParseError& e) {
    CHECK(e.position() == 8);
  }
}

TEST_CASE("oracles agree with generated tasks on a sample") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = gen_countdown(4, seed);
    CHECK(oracle::reachable(c.operands).count(c.target) == 1);
    const auto s = gen_sat(seed);
    CHECK(oracle::satisfies(s.clauses, s.witness));
    const auto model = oracle::solve_sat(s.clauses, s.var_count);
    REQUIRE(model);
    CHECK(oracle::satisfies(s.clauses, *model));
  }
  // unsatisfiable sanity for the DPLL oracle itself
  CHECK_FALSE(oracle::solve_sat({{1}, {-1}}, 1));
  CHECK_FALSE(oracle::solve_sat({{1, 2}, {1, -2}, {-1, 2}, {-1, -2}}, 2));
}

TEST_CASE("task names") {
  CHECK(task_from_name("countdown") == TaskKind::countdown);
  CHECK_FALSE(task_from_name("chess"));
  CHECK(std::string(task_name(TaskKind::sat)) == "sat");
}
