// Relevant variables of a formula over a structured model.
#pragma once

#include <vector>

#include "epik/frontend.hpp"
#include "epik/model.hpp"

namespace epik {

struct RelevanceResult {
  // κ of each subformula occurrence, indexed in preorder.
  std::vector<VertexSet> per_node;

  struct KnowsSite {
    std::size_t node = 0;  // preorder index of the K operator
    int agent = 0;
    VertexSet inner;  // κ of the operand
    VertexSet u;      // observations kept for this occurrence
  };
  std::vector<KnowsSite> knows;

  VertexSet final;
};

// `f` must have its atoms bound and resolved against `sm` (see bind_atoms,
// resolve_atoms).
RelevanceResult kappa(const Formula& f, const StructuredModel& sm);

}  // namespace epik
