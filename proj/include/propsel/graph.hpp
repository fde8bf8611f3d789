#pragma once

#include "propsel/corpus.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace propsel {

enum class NodeKind { question, sentence };

struct NodeId {
  int index = 0;
  NodeKind kind = NodeKind::sentence;
  std::optional<int> passage_index;
  std::optional<int> sentence_in_passage;
};

enum class EdgeClass { intra_passage, first_sentence, question_link };

/// Undirected edge stored once with a < b.
struct Edge {
  int a = 0;
  int b = 0;
  EdgeClass cls = EdgeClass::intra_passage;
};

enum class TopologyKind { full, type1, type2, type3 };

std::string_view to_string(TopologyKind kind);
std::string_view to_string(EdgeClass cls);
TopologyKind parse_topology(std::string_view name);
inline constexpr TopologyKind kAllTopologies[] = {TopologyKind::full, TopologyKind::type1, TopologyKind::type2,
                                                  TopologyKind::type3};

/// Question node plus one node per sentence. Adjacency lists are sorted by
/// node index so every traversal order is deterministic.
class SentenceGraph {
 public:
  SentenceGraph() = default;
  /// Validates the node and edge invariants; throws std::invalid_argument.
  SentenceGraph(std::vector<NodeId> nodes, std::vector<Edge> edges);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int question_node() const { return question_; }
  const NodeId& node(int v) const { return nodes_.at(static_cast<std::size_t>(v)); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> neighbors(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }

  /// Sentence nodes in global sentence order.
  const std::vector<int>& sentence_nodes() const { return sentence_nodes_; }
  /// Global sentence index of node v, or -1 for the question node.
  int sentence_index(int v) const { return sentence_index_.at(static_cast<std::size_t>(v)); }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> sentence_nodes_;
  std::vector<int> sentence_index_;
  int question_ = 0;
};

SentenceGraph build_graph(std::span<const std::size_t> passage_sizes, TopologyKind kind);
SentenceGraph build_graph(const Example& example, TopologyKind kind);

/// Closed-form edge count; throws std::invalid_argument on an empty list.
std::size_t edge_count_formula(std::span<const std::size_t> passage_sizes, TopologyKind kind);

/// Graphviz rendering: node labels carry kind and indices, edge colour the
/// edge class (intra black, first-sentence red, question blue).
std::string to_dot(const SentenceGraph& graph);

}  // namespace propsel
