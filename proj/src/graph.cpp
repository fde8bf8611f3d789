#include "propsel/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace propsel {

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::full: return "full";
    case TopologyKind::type1: return "type1";
    case TopologyKind::type2: return "type2";
    case TopologyKind::type3: return "type3";
  }
  return "?";
}

std::string_view to_string(EdgeClass cls) {
  switch (cls) {
    case EdgeClass::intra_passage: return "intra_passage";
    case EdgeClass::first_sentence: return "first_sentence";
    case EdgeClass::question_link: return "question_link";
  }
  return "?";
}

TopologyKind parse_topology(std::string_view name) {
  for (auto kind : kAllTopologies)
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "' (expected full|type1|type2|type3)");
}

SentenceGraph::SentenceGraph(std::vector<NodeId> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), adjacency_(nodes_.size()) {
  const int n = node_count();
  int questions = 0;
  for (int v = 0; v < n; ++v) {
    const auto& id = nodes_[static_cast<std::size_t>(v)];
    if (id.index != v) throw std::invalid_argument("node index does not match its position");
    if (id.kind == NodeKind::question) {
      ++questions;
      question_ = v;
    } else {
      if (!id.passage_index || !id.sentence_in_passage)
        throw std::invalid_argument("sentence node without passage coordinates");
      sentence_nodes_.push_back(v);
    }
  }
  if (questions != 1) throw std::invalid_argument("graph must have exactly one question node");

  std::set<std::pair<int, int>> seen;
  for (auto& e : edges_) {
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.a == e.b) throw std::invalid_argument("self-loop");
    if (e.a < 0 || e.b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (!seen.emplace(e.a, e.b).second) throw std::invalid_argument("duplicate edge");
    adjacency_[static_cast<std::size_t>(e.a)].push_back(e.b);
    adjacency_[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  // Global sentence order: by passage, then by position in passage.
  std::stable_sort(sentence_nodes_.begin(), sentence_nodes_.end(), [&](int x, int y) {
    const auto& a = nodes_[static_cast<std::size_t>(x)];
    const auto& b = nodes_[static_cast<std::size_t>(y)];
    return std::tie(*a.passage_index, *a.sentence_in_passage) < std::tie(*b.passage_index, *b.sentence_in_passage);
  });
  sentence_index_.assign(nodes_.size(), -1);
  for (std::size_t i = 0; i < sentence_nodes_.size(); ++i)
    sentence_index_[static_cast<std::size_t>(sentence_nodes_[i])] = static_cast<int>(i);
}

SentenceGraph build_graph(std::span<const std::size_t> passage_sizes, TopologyKind kind) {
  if (passage_sizes.empty()) throw std::invalid_argument("build_graph: no passages");
  std::vector<NodeId> nodes;
  nodes.push_back({0, NodeKind::question, std::nullopt, std::nullopt});
  std::vector<std::vector<int>> passage_nodes(passage_sizes.size());
  for (std::size_t p = 0; p < passage_sizes.size(); ++p) {
    if (passage_sizes[p] == 0) throw std::invalid_argument("build_graph: empty passage");
    for (std::size_t i = 0; i < passage_sizes[p]; ++i) {
      const int v = static_cast<int>(nodes.size());
      nodes.push_back({v, NodeKind::sentence, static_cast<int>(p), static_cast<int>(i)});
      passage_nodes[p].push_back(v);
    }
  }

  std::vector<Edge> edges;
  for (const auto& members : passage_nodes) {
    if (kind == TopologyKind::type1) {
      for (std::size_t i = 1; i < members.size(); ++i)
        edges.push_back({members[i - 1], members[i], EdgeClass::intra_passage});
    } else {
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
          edges.push_back({members[i], members[j], EdgeClass::intra_passage});
    }
  }
  if (kind != TopologyKind::type2) {
    for (std::size_t p = 0; p < passage_nodes.size(); ++p)
      for (std::size_t q = p + 1; q < passage_nodes.size(); ++q)
        edges.push_back({passage_nodes[p].front(), passage_nodes[q].front(), EdgeClass::first_sentence});
  }
  if (kind != TopologyKind::type3) {
    for (int v = 1; v < static_cast<int>(nodes.size()); ++v) edges.push_back({0, v, EdgeClass::question_link});
  }
  return SentenceGraph(std::move(nodes), std::move(edges));
}

SentenceGraph build_graph(const Example& example, TopologyKind kind) {
  const auto sizes = example.passage_sizes();
  return build_graph(std::span<const std::size_t>(sizes), kind);
}

std::size_t edge_count_formula(std::span<const std::size_t> passage_sizes, TopologyKind kind) {
  if (passage_sizes.empty()) throw std::invalid_argument("edge_count_formula: no passages");
  auto choose2 = [](std::size_t n) { return n * (n - 1) / 2; };
  std::size_t intra = 0, question = 0;
  for (auto s : passage_sizes) {
    if (s == 0) throw std::invalid_argument("edge_count_formula: passage size must be >= 1");
    intra += kind == TopologyKind::type1 ? s - 1 : choose2(s);
    question += s;
  }
  const std::size_t first = kind == TopologyKind::type2 ? 0 : choose2(passage_sizes.size());
  if (kind == TopologyKind::type3) question = 0;
  return intra + first + question;
}

std::string to_dot(const SentenceGraph& graph) {
  std::ostringstream out;
  out << "graph sentences {\n";
  for (const auto& n : graph.nodes()) {
    out << "  n" << n.index << " [label=\"";
    if (n.kind == NodeKind::question)
      out << "Q\", shape=box";
    else
      out << "S p" << *n.passage_index << " s" << *n.sentence_in_passage << "\"";
    out << "];\n";
  }
  for (const auto& e : graph.edges()) {
    const char* colour = e.cls == EdgeClass::intra_passage ? "black"
                         : e.cls == EdgeClass::first_sentence ? "red"
                                                              : "blue";
    out << "  n" << e.a << " -- n" << e.b << " [color=" << colour << ", style=dotted];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace propsel
