#include "propsel/graph.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace propsel;

namespace {

std::size_t edges_of(std::vector<std::size_t> sizes, TopologyKind kind) {
  return build_graph(sizes, kind).edges().size();
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("edge counts on hand-enumerated instances") {
    CHECK(edges_of({3, 2}, TopologyKind::full) == 10);
    CHECK(edges_of({3, 2}, TopologyKind::type1) == 9);
    CHECK(edges_of({1}, TopologyKind::full) == 1);
    CHECK(edges_of({1}, TopologyKind::type3) == 0);
    CHECK(edges_of({2, 2, 2}, TopologyKind::type2) == 9);
  }

  TEST_CASE("node layout puts the question first") {
    const std::vector<std::size_t> sizes{2, 3};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    CHECK(g.node_count() == 6);
    CHECK(g.question_node() == 0);
    CHECK(g.node(0).kind == NodeKind::question);
    CHECK(g.sentence_index(0) == -1);
    CHECK(g.sentence_nodes() == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(g.node(4).passage_index == 1);
    CHECK(g.node(4).sentence_in_passage == 1);
  }

  TEST_CASE("edge classes follow the construction rules") {
    const std::vector<std::size_t> sizes{2, 2};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    std::multiset<EdgeClass> classes;
    for (const auto& e : g.edges()) {
      CHECK(e.a < e.b);
      classes.insert(e.cls);
    }
    CHECK(classes.count(EdgeClass::question_link) == 4);
    CHECK(classes.count(EdgeClass::intra_passage) == 2);
    CHECK(classes.count(EdgeClass::first_sentence) == 1);
  }

  TEST_CASE("type3 isolates the question and type1 chains passages") {
    const std::vector<std::size_t> sizes{3, 3};
    CHECK(build_graph(sizes, TopologyKind::type3).neighbors(0).empty());
    const SentenceGraph chain = build_graph(sizes, TopologyKind::type1);
    // Node 2 is the middle sentence of passage 0: question, previous and next sentence.
    const auto nb = chain.neighbors(2);
    CHECK(std::vector<int>(nb.begin(), nb.end()) == std::vector<int>{0, 1, 3});
  }

  TEST_CASE("random passage sizes: formula, symmetry and no self-loops") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> passages(1, 12), sentences(1, 9);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::size_t> sizes(static_cast<std::size_t>(passages(rng)));
      for (auto& s : sizes) s = static_cast<std::size_t>(sentences(rng));
      for (TopologyKind kind : kAllTopologies) {
        const SentenceGraph g = build_graph(sizes, kind);
        REQUIRE(g.edges().size() == edge_count_formula(sizes, kind));
        for (int v = 0; v < g.node_count(); ++v)
          for (int u : g.neighbors(v)) {
            REQUIRE(u != v);
            const auto back = g.neighbors(u);
            REQUIRE(std::find(back.begin(), back.end(), v) != back.end());
          }
      }
    }
  }

  TEST_CASE("invalid graphs are rejected") {
    std::vector<NodeId> nodes{{0, NodeKind::question, {}, {}}, {1, NodeKind::sentence, 0, 0}};
    CHECK_THROWS_AS(SentenceGraph(nodes, {{1, 1, EdgeClass::intra_passage}}), std::invalid_argument);
    CHECK_THROWS_AS(SentenceGraph(nodes, {{0, 1, EdgeClass::question_link}, {0, 1, EdgeClass::question_link}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SentenceGraph(nodes, {{0, 5, EdgeClass::question_link}}), std::invalid_argument);
    std::vector<NodeId> two_questions{{0, NodeKind::question, {}, {}}, {1, NodeKind::question, {}, {}}};
    CHECK_THROWS_AS(SentenceGraph(two_questions, {}), std::invalid_argument);
    CHECK_THROWS(edge_count_formula(std::vector<std::size_t>{}, TopologyKind::full));
  }

  TEST_CASE("topology names round-trip and DOT export colours edges") {
    for (TopologyKind kind : kAllTopologies) CHECK(parse_topology(to_string(kind)) == kind);
    CHECK_THROWS(parse_topology("type4"));
    const std::vector<std::size_t> sizes{2, 1};
    const std::string dot = to_dot(build_graph(sizes, TopologyKind::full));
    CHECK(dot.find("graph") != std::string::npos);
    CHECK(dot.find("red") != std::string::npos);
    CHECK(dot.find("blue") != std::string::npos);
  }
}
