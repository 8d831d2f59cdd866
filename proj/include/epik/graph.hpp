// Directed acyclic dependency graphs, moralization and d-separation.
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "epik/valuation.hpp"

namespace epik {

using VertexSet = std::set<VarId>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Dag {
 public:
  void add_vertex(VarId v) { nodes_[v]; }
  // Adds missing endpoints. Does not check acyclicity; see is_acyclic().
  void add_edge(VarId from, VarId to);
  void remove_edge(VarId from, VarId to);
  // Removes v together with its incident edges.
  void remove_vertex(VarId v);

  bool has_vertex(VarId v) const { return nodes_.count(v) > 0; }
  bool has_edge(VarId from, VarId to) const;
  VertexSet vertices() const;
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;
  const VertexSet& parents(VarId v) const { return node(v).parents; }
  const VertexSet& children(VarId v) const { return node(v).children; }
  bool is_leaf(VarId v) const { return node(v).children.empty(); }

  bool is_acyclic() const;
  // Parents before children; ties by ascending id. Throws on a cycle.
  std::vector<VarId> topological_order() const;

 private:
  struct Node {
    VertexSet parents;
    VertexSet children;
  };
  const Node& node(VarId v) const;

  std::map<VarId, Node> nodes_;
};

class UndirectedGraph {
 public:
  void add_vertex(VarId v) { adj_[v]; }
  // Self-loops are ignored.
  void add_edge(VarId a, VarId b);
  bool has_edge(VarId a, VarId b) const;
  bool has_vertex(VarId v) const { return adj_.count(v) > 0; }
  const VertexSet& neighbors(VarId v) const;
  VertexSet vertices() const;
  std::size_t edge_count() const;

 private:
  std::map<VarId, VertexSet> adj_;
};

// Marries every pair of parents with a common child, then drops directions.
UndirectedGraph moralize(const Dag& g);
// Reflexive ancestor closure of X.
VertexSet ancestors(const Dag& g, const VertexSet& x);
// G restricted to X: vertices V ∩ X with the induced edges.
Dag restrict(const Dag& g, const VertexSet& x);
// G restricted to An(X).
Dag ancestral_restriction(const Dag& g, const VertexSet& x);

// X d-separated from Y by Z: every path between X and Y in the moralized
// ancestral graph of X ∪ Y ∪ Z meets Z. Arguments must be disjoint.
bool d_separated(const Dag& g, const VertexSet& x, const VertexSet& y, const VertexSet& z);

// Smallest W with keep ∩ O ⊆ W ⊆ O that d-separates keep \ W from O \ W:
// the O-vertices first hit by a search from keep \ O in the moralized
// ancestral graph of O ∪ keep, plus keep ∩ O.
VertexSet minimal_observation_set(const Dag& g, const VertexSet& keep, const VertexSet& observed);

}  // namespace epik
