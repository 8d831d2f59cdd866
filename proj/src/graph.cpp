#include "epik/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace epik {

void Dag::add_edge(VarId from, VarId to) {
  nodes_[from].children.insert(to);
  nodes_[to].parents.insert(from);
}

void Dag::remove_edge(VarId from, VarId to) {
  auto a = nodes_.find(from), b = nodes_.find(to);
  if (a != nodes_.end()) a->second.children.erase(to);
  if (b != nodes_.end()) b->second.parents.erase(from);
}

void Dag::remove_vertex(VarId v) {
  auto it = nodes_.find(v);
  if (it == nodes_.end()) return;
  for (VarId p : it->second.parents) nodes_[p].children.erase(v);
  for (VarId c : it->second.children) nodes_[c].parents.erase(v);
  nodes_.erase(it);
}

bool Dag::has_edge(VarId from, VarId to) const {
  auto it = nodes_.find(from);
  return it != nodes_.end() && it->second.children.count(to) > 0;
}

VertexSet Dag::vertices() const {
  VertexSet out;
  for (const auto& [v, n] : nodes_) out.insert(out.end(), v);
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& [v, node] : nodes_) n += node.children.size();
  return n;
}

const Dag::Node& Dag::node(VarId v) const {
  auto it = nodes_.find(v);
  if (it == nodes_.end()) throw GraphError("unknown vertex " + std::to_string(v));
  return it->second;
}

std::vector<VarId> Dag::topological_order() const {
  std::map<VarId, std::size_t> indegree;
  std::set<VarId> ready;
  for (const auto& [v, n] : nodes_) {
    indegree[v] = n.parents.size();
    if (n.parents.empty()) ready.insert(v);
  }
  std::vector<VarId> order;
  while (!ready.empty()) {
    VarId v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (VarId c : nodes_.at(v).children) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != nodes_.size()) throw GraphError("dependency graph has a cycle");
  return order;
}

bool Dag::is_acyclic() const {
  try {
    topological_order();
    return true;
  } catch (const GraphError&) {
    return false;
  }
}

void UndirectedGraph::add_edge(VarId a, VarId b) {
  adj_[a];
  adj_[b];
  if (a == b) return;
  adj_[a].insert(b);
  adj_[b].insert(a);
}

bool UndirectedGraph::has_edge(VarId a, VarId b) const {
  auto it = adj_.find(a);
  return it != adj_.end() && it->second.count(b) > 0;
}

const VertexSet& UndirectedGraph::neighbors(VarId v) const {
  auto it = adj_.find(v);
  if (it == adj_.end()) throw GraphError("unknown vertex " + std::to_string(v));
  return it->second;
}

VertexSet UndirectedGraph::vertices() const {
  VertexSet out;
  for (const auto& [v, n] : adj_) out.insert(out.end(), v);
  return out;
}

std::size_t UndirectedGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [v, nb] : adj_) n += nb.size();
  return n / 2;
}

UndirectedGraph moralize(const Dag& g) {
  UndirectedGraph m;
  for (VarId v : g.vertices()) {
    m.add_vertex(v);
    const VertexSet& pa = g.parents(v);
    for (VarId p : pa) m.add_edge(p, v);
    for (auto i = pa.begin(); i != pa.end(); ++i) {
      for (auto j = std::next(i); j != pa.end(); ++j) m.add_edge(*i, *j);
    }
  }
  return m;
}

VertexSet ancestors(const Dag& g, const VertexSet& x) {
  VertexSet seen;
  std::vector<VarId> stack;
  for (VarId v : x) {
    if (!g.has_vertex(v)) throw GraphError("unknown vertex " + std::to_string(v));
    if (seen.insert(v).second) stack.push_back(v);
  }
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (VarId p : g.parents(v)) {
      if (seen.insert(p).second) stack.push_back(p);
    }
  }
  return seen;
}

Dag restrict(const Dag& g, const VertexSet& x) {
  Dag out;
  for (VarId v : x) {
    if (!g.has_vertex(v)) continue;
    out.add_vertex(v);
    for (VarId c : g.children(v)) {
      if (x.count(c)) out.add_edge(v, c);
    }
  }
  return out;
}

Dag ancestral_restriction(const Dag& g, const VertexSet& x) {
  return restrict(g, ancestors(g, x));
}

namespace {

void require_disjoint(const Dag& g, const VertexSet& x, const VertexSet& y, const VertexSet& z) {
  for (const VertexSet* s : {&x, &y, &z}) {
    for (VarId v : *s) {
      if (!g.has_vertex(v)) throw GraphError("unknown vertex " + std::to_string(v));
    }
  }
  auto meets = [](const VertexSet& a, const VertexSet& b) {
    return std::any_of(a.begin(), a.end(), [&](VarId v) { return b.count(v) > 0; });
  };
  if (meets(x, y) || meets(x, z) || meets(y, z)) {
    throw GraphError("d-separation arguments must be disjoint");
  }
}

}  // namespace

bool d_separated(const Dag& g, const VertexSet& x, const VertexSet& y, const VertexSet& z) {
  require_disjoint(g, x, y, z);
  if (x.empty() || y.empty()) return true;
  VertexSet all = x;
  all.insert(y.begin(), y.end());
  all.insert(z.begin(), z.end());
  UndirectedGraph h = moralize(ancestral_restriction(g, all));
  VertexSet seen(x.begin(), x.end());
  std::deque<VarId> queue(x.begin(), x.end());
  while (!queue.empty()) {
    VarId v = queue.front();
    queue.pop_front();
    for (VarId n : h.neighbors(v)) {
      if (z.count(n) || seen.count(n)) continue;
      if (y.count(n)) return false;
      seen.insert(n);
      queue.push_back(n);
    }
  }
  return true;
}

VertexSet minimal_observation_set(const Dag& g, const VertexSet& keep, const VertexSet& observed) {
  VertexSet all = keep;
  all.insert(observed.begin(), observed.end());
  UndirectedGraph h = moralize(ancestral_restriction(g, all));

  VertexSet w;
  VertexSet seen;
  std::vector<VarId> stack;
  for (VarId v : keep) {
    if (observed.count(v)) {
      w.insert(v);
    } else if (seen.insert(v).second) {
      stack.push_back(v);
    }
  }
  // Observed vertices absorb the search: they are collected, not expanded.
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (VarId n : h.neighbors(v)) {
      if (!seen.insert(n).second) continue;
      if (observed.count(n)) {
        w.insert(n);
      } else {
        stack.push_back(n);
      }
    }
  }
  return w;
}

}  // namespace epik
