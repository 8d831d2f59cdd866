// Structured relational models over timed variables and their transforms.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "epik/frontend.hpp"
#include "epik/graph.hpp"
#include "epik/structure.hpp"
#include "epik/valuation.hpp"

namespace epik {

// A dag with one relation per vertex over the vertex and its parents. The
// relation never constrains the parents on their own.
struct StructuredModel {
  VarTable table;
  Dag dag;
  std::map<VarId, Relation> nodes;
  std::vector<VertexSet> observables;
  // Vertex merged away -> vertex it was merged into.
  std::map<VarId, VarId> alias;

  VarId resolve(VarId v) const;
};

// Symbolic execution of the joint protocol, one tick at a time.
StructuredModel unfold(const SystemSpec& sys, int horizon);

// Empty when every structural condition holds.
std::vector<std::string> validate(const StructuredModel& sm);

// Collapses every vertex whose relation is the identity with its single
// parent into that parent. Vertices in `protect` are never removed.
StructuredModel equality_merge(StructuredModel sm, const VertexSet& protect = {});

// Repeatedly removes leaves outside `keep`.
StructuredModel drop_leaves(StructuredModel sm, const VertexSet& keep);

// Worlds (combination of all node relations)↓X, O'_i = O_i ∩ X.
EpistemicStructure epistemic_marginalize(const StructuredModel& sm, const VertexSet& x,
                                         FusionStats* stats = nullptr);

VertexSet vertices_of(const StructuredModel& sm);

// Atoms of `f` as program timed-variable ids (the time field is kept for
// printing).
Formula bind_atoms(const Formula& f, const VarTable& table);
// Replaces every atom by its surviving alias.
Formula resolve_atoms(const Formula& f, const StructuredModel& sm);

}  // namespace epik
