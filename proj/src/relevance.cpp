#include "epik/relevance.hpp"

#include <algorithm>

namespace epik {

namespace {

VertexSet walk(const Formula& f, const StructuredModel& sm, RelevanceResult& out) {
  std::size_t id = out.per_node.size();
  out.per_node.emplace_back();
  VertexSet k;
  switch (f.kind) {
    case Formula::Kind::kAtom:
      if (!sm.dag.has_vertex(f.var)) {
        throw ModelError("atom " + sm.table.name(f.var) + " is not a vertex of the model");
      }
      k = {f.var};
      break;
    case Formula::Kind::kNot: k = walk(f.kids[0], sm, out); break;
    case Formula::Kind::kAnd: {
      k = walk(f.kids[0], sm, out);
      VertexSet r = walk(f.kids[1], sm, out);
      k.insert(r.begin(), r.end());
      break;
    }
    case Formula::Kind::kKnows: {
      if (f.agent < 0 || static_cast<std::size_t>(f.agent) >= sm.observables.size()) {
        throw ModelError("unknown agent index " + std::to_string(f.agent));
      }
      std::size_t site = out.knows.size();
      out.knows.emplace_back();
      VertexSet inner = walk(f.kids[0], sm, out);
      const VertexSet& obs = sm.observables[static_cast<std::size_t>(f.agent)];
      VertexSet u = minimal_observation_set(sm.dag, inner, obs);
      if (!std::includes(obs.begin(), obs.end(), u.begin(), u.end())) {
        throw ModelError("observation separator escapes the observable set");
      }
      k = u;
      k.insert(inner.begin(), inner.end());
      out.knows[site] = {id, f.agent, std::move(inner), std::move(u)};
      break;
    }
  }
  out.per_node[id] = k;
  return k;
}

}  // namespace

RelevanceResult kappa(const Formula& f, const StructuredModel& sm) {
  RelevanceResult out;
  out.final = walk(f, sm, out);
  return out;
}

}  // namespace epik
