#include "epik/model.hpp"

#include <algorithm>
#include <numeric>

#include "epik/semantics.hpp"

namespace epik {

namespace {

constexpr VarId kPlaceholder = 0xF0000000u;
constexpr std::size_t kMaxParents = 20;
constexpr std::size_t kMaxInitComponent = 24;
constexpr std::size_t kMaxSelectorFrame = std::size_t{1} << 16;

bool is_var(const Expr& e, VarId v) { return e.kind == Expr::Kind::kVar && e.var == v; }

Expr negate(Expr e) {
  if (e.kind == Expr::Kind::kNot) return std::move(e.kids[0]);
  if (e.kind == Expr::Kind::kConst) return Expr::constant(!e.value);
  return Expr::unary(Expr::Kind::kNot, std::move(e));
}

// Flattens an xor chain; negations and constants go into `parity`.
void xor_terms(Expr e, std::vector<Expr>& terms, bool& parity) {
  using K = Expr::Kind;
  if (e.kind == K::kXor) {
    xor_terms(std::move(e.kids[0]), terms, parity);
    xor_terms(std::move(e.kids[1]), terms, parity);
  } else if (e.kind == K::kNot) {
    parity = !parity;
    xor_terms(std::move(e.kids[0]), terms, parity);
  } else if (e.kind == K::kConst) {
    parity = parity != e.value;
  } else {
    auto it = std::find(terms.begin(), terms.end(), e);
    if (it != terms.end()) {
      terms.erase(it);
    } else {
      terms.push_back(std::move(e));
    }
  }
}

// Constant folding, children first. Xor chains also cancel repeated terms.
Expr simplify(Expr e) {
  for (Expr& k : e.kids) k = simplify(std::move(k));
  using K = Expr::Kind;
  if (e.kind == K::kNot) return negate(std::move(e.kids[0]));
  if (e.kind == K::kXor) {
    std::vector<Expr> terms;
    bool parity = false;
    xor_terms(std::move(e), terms, parity);
    if (terms.empty()) return Expr::constant(parity);
    Expr acc = std::move(terms[0]);
    for (std::size_t i = 1; i < terms.size(); ++i) {
      acc = Expr::binary(K::kXor, std::move(acc), std::move(terms[i]));
    }
    return parity ? negate(std::move(acc)) : acc;
  }
  if (e.kids.size() != 2) return e;
  Expr& a = e.kids[0];
  Expr& b = e.kids[1];
  bool ca = a.kind == K::kConst, cb = b.kind == K::kConst;
  if (!ca && !cb) return e;
  switch (e.kind) {
    case K::kAnd:
      if (ca) return a.value ? std::move(b) : Expr::constant(false);
      return b.value ? std::move(a) : Expr::constant(false);
    case K::kOr:
      if (ca) return a.value ? Expr::constant(true) : std::move(b);
      return b.value ? Expr::constant(true) : std::move(a);
    case K::kXor:
      if (ca) return a.value ? negate(std::move(b)) : std::move(b);
      return b.value ? negate(std::move(a)) : std::move(a);
    case K::kIff:
      if (ca) return a.value ? std::move(b) : negate(std::move(b));
      return b.value ? std::move(a) : negate(std::move(a));
    case K::kImplies:
      if (ca) return a.value ? std::move(b) : Expr::constant(true);
      return b.value ? Expr::constant(true) : negate(std::move(a));
    default: return e;
  }
}

Expr substitute(const Expr& e, const std::vector<Expr>& sym) {
  if (e.kind == Expr::Kind::kVar) return sym[e.var];
  Expr out = e;
  for (Expr& k : out.kids) k = substitute(k, sym);
  return out;
}

void rename_placeholders(Expr& e, const std::map<VarId, VarId>& m) {
  if (e.kind == Expr::Kind::kVar) {
    auto it = m.find(e.var);
    if (it != m.end()) e.var = it->second;
  }
  for (Expr& k : e.kids) rename_placeholders(k, m);
}

void collect_ids(const Expr& e, std::set<VarId>& out) {
  if (e.kind == Expr::Kind::kVar) out.insert(e.var);
  for (const Expr& k : e.kids) collect_ids(k, out);
}

void localize(Expr& e, const std::map<VarId, VarId>& local) {
  if (e.kind == Expr::Kind::kVar) e.var = local.at(e.var);
  for (Expr& k : e.kids) localize(k, local);
}

// Graph of the boolean function e over its variables, as the node relation
// of `v`.
Relation function_graph(VarId v, const Expr& e, std::vector<VarId>& parents) {
  std::set<VarId> ids;
  collect_ids(e, ids);
  parents.assign(ids.begin(), ids.end());
  if (parents.size() > kMaxParents) {
    throw ModelError("expression for timed variable " + std::to_string(v) + " depends on " +
                     std::to_string(parents.size()) + " variables");
  }
  std::map<VarId, VarId> local;
  std::vector<VarSpec> specs;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    local[parents[i]] = static_cast<VarId>(i);
    specs.push_back({parents[i], 2});
  }
  specs.push_back({v, 2});
  Expr le = e;
  localize(le, local);
  Relation::Builder b(specs);
  const std::size_t k = parents.size();
  std::vector<std::uint8_t> state(k);
  std::vector<std::uint32_t> row(k + 1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) {
      state[i] = static_cast<std::uint8_t>(mask >> i & 1);
      row[i] = state[i];
    }
    row[k] = evaluate(le, state) ? 1 : 0;
    b.add(row);
  }
  return b.finish();
}

std::size_t expr_size(const Expr& e) {
  std::size_t n = 1;
  for (const Expr& k : e.kids) n += expr_size(k);
  return n;
}

// Replaces subtrees equal to a smaller variable's expression for this tick
// by that variable's timed instance, largest match first.
Expr share(const Expr& e, const std::vector<std::pair<const Expr*, VarId>>& known, std::size_t below) {
  if (e.kind == Expr::Kind::kVar || e.kind == Expr::Kind::kConst) return e;
  for (const auto& [ke, v] : known) {
    if (expr_size(*ke) < below && *ke == e) return Expr::variable(v);
  }
  Expr out = e;
  for (Expr& k : out.kids) k = share(k, known, below);
  return out;
}

void add_node(StructuredModel& sm, VarId v, const std::vector<VarId>& parents, Relation rel) {
  sm.dag.add_vertex(v);
  for (VarId p : parents) sm.dag.add_edge(p, v);
  sm.nodes[v] = std::move(rel);
}

void add_root(StructuredModel& sm, VarId v) {
  VarSpec s = sm.table.spec(v);
  add_node(sm, v, {}, Relation::identity(std::span<const VarSpec>(&s, 1)));
}

void flatten_and(const Expr& e, std::vector<const Expr*>& out) {
  if (e.kind == Expr::Kind::kAnd) {
    flatten_and(e.kids[0], out);
    flatten_and(e.kids[1], out);
  } else {
    out.push_back(&e);
  }
}

// Time 0: each connected component of the top-level conjuncts of I becomes
// either a single constrained root or a selector with deterministic
// children. Variables outside I are free roots.
void unfold_init(const SystemSpec& sys, StructuredModel& sm) {
  const std::size_t u = sys.vars.size();
  std::vector<const Expr*> conj;
  flatten_and(sys.init, conj);

  std::vector<std::size_t> parent(u);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::set<BaseVar>> conj_vars(conj.size());
  std::vector<std::uint8_t> empty_state(u, 0);
  for (std::size_t c = 0; c < conj.size(); ++c) {
    collect_vars(*conj[c], conj_vars[c]);
    if (conj_vars[c].empty()) {
      if (!evaluate(*conj[c], empty_state)) throw ModelError("initial condition is unsatisfiable");
      continue;
    }
    BaseVar first = *conj_vars[c].begin();
    for (BaseVar v : conj_vars[c]) parent[find(v)] = find(first);
  }
  std::map<std::size_t, std::vector<std::size_t>> comp_conj;
  for (std::size_t c = 0; c < conj.size(); ++c) {
    if (!conj_vars[c].empty()) comp_conj[find(*conj_vars[c].begin())].push_back(c);
  }

  std::vector<bool> covered(u, false);
  int component = 0;
  for (const auto& [rep, cs] : comp_conj) {
    std::vector<BaseVar> vars;
    for (BaseVar v = 0; v < u; ++v) {
      if (find(v) == rep) vars.push_back(v);
    }
    if (vars.size() > kMaxInitComponent) {
      throw ModelError("initial condition couples " + std::to_string(vars.size()) + " variables");
    }
    std::vector<std::uint8_t> state(u, 0);
    std::vector<std::size_t> sat;
    for (std::size_t mask = 0; mask < (std::size_t{1} << vars.size()); ++mask) {
      for (std::size_t i = 0; i < vars.size(); ++i) {
        state[vars[i]] = static_cast<std::uint8_t>(mask >> (vars.size() - 1 - i) & 1);
      }
      bool ok = std::all_of(cs.begin(), cs.end(), [&](std::size_t c) { return evaluate(*conj[c], state); });
      if (ok) sat.push_back(mask);
      if (sat.size() > kMaxSelectorFrame) throw ModelError("initial condition has too many solutions");
    }
    if (sat.empty()) throw ModelError("initial condition is unsatisfiable");
    for (BaseVar v : vars) covered[v] = true;

    if (vars.size() == 1) {
      VarId v = sm.table.program(vars[0], 0);
      std::vector<std::vector<std::uint32_t>> rows;
      for (std::size_t m : sat) rows.push_back({static_cast<std::uint32_t>(m)});
      VarSpec s{v, 2};
      add_node(sm, v, {}, Relation::from_rows(std::span<const VarSpec>(&s, 1), rows));
      continue;
    }
    VarId sel = sm.table.add_selector(static_cast<std::uint32_t>(sat.size()), component++);
    add_root(sm, sel);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      VarId v = sm.table.program(vars[i], 0);
      std::vector<VarSpec> specs{{sel, static_cast<std::uint32_t>(sat.size())}, {v, 2}};
      std::vector<std::vector<std::uint32_t>> rows;
      for (std::size_t j = 0; j < sat.size(); ++j) {
        rows.push_back({static_cast<std::uint32_t>(j),
                        static_cast<std::uint32_t>(sat[j] >> (vars.size() - 1 - i) & 1)});
      }
      add_node(sm, v, {sel}, Relation::from_rows(specs, rows));
    }
  }
  for (BaseVar v = 0; v < u; ++v) {
    if (!covered[v]) add_root(sm, sm.table.program(v, 0));
  }
}

bool is_delta(const Relation& r, VarId x, VarId y) {
  if (r.arity() != 2 || !r.has_var(x) || !r.has_var(y)) return false;
  if (r.frame(x) != r.frame(y) || r.size() != r.frame(x)) return false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.value(i, 0) != r.value(i, 1)) return false;
  }
  return true;
}

}  // namespace

VarId StructuredModel::resolve(VarId v) const {
  for (auto it = alias.find(v); it != alias.end(); it = alias.find(v)) v = it->second;
  return v;
}

VertexSet vertices_of(const StructuredModel& sm) { return sm.dag.vertices(); }

StructuredModel unfold(const SystemSpec& sys, int horizon) {
  StructuredModel sm;
  sm.table = VarTable(sys, horizon);
  const std::size_t u = sys.vars.size();
  unfold_init(sys, sm);

  for (int t = 1; t <= horizon; ++t) {
    std::vector<Expr> sym;
    for (BaseVar b = 0; b < u; ++b) sym.push_back(Expr::variable(sm.table.program(b, t - 1)));
    Code joint;
    for (std::size_t i = 0; i < sys.agents.size(); ++i) {
      const Action* a = action_at(sys, i, t);
      if (a && !a->skip) joint.insert(joint.end(), a->code.begin(), a->code.end());
    }
    joint.insert(joint.end(), sys.env.begin(), sys.env.end());

    std::vector<BaseVar> rand_target;
    for (const Stmt& st : joint) {
      if (st.kind == Stmt::Kind::kAssign) {
        sym[st.target] = simplify(substitute(st.expr, sym));
      } else {
        sym[st.target] = Expr::variable(kPlaceholder + static_cast<VarId>(rand_target.size()));
        rand_target.push_back(st.target);
      }
    }

    // A rand that is the last write to its variable becomes that variable's
    // timed instance; an overwritten one that is still read gets a temp.
    std::set<VarId> referenced;
    for (const Expr& e : sym) collect_ids(e, referenced);
    std::map<VarId, VarId> placeholder;
    std::vector<VarId> temps;
    for (std::size_t k = 0; k < rand_target.size(); ++k) {
      VarId ph = kPlaceholder + static_cast<VarId>(k);
      if (is_var(sym[rand_target[k]], ph)) {
        placeholder[ph] = sm.table.program(rand_target[k], t);
      } else if (referenced.count(ph)) {
        placeholder[ph] = sm.table.add_rand_temp(rand_target[k], t, static_cast<int>(k));
        temps.push_back(placeholder[ph]);
      }
    }
    for (Expr& e : sym) rename_placeholders(e, placeholder);
    for (VarId temp : temps) add_root(sm, temp);

    std::vector<std::pair<const Expr*, VarId>> known;
    for (BaseVar b = 0; b < u; ++b) {
      if (sym[b].kind != Expr::Kind::kVar && sym[b].kind != Expr::Kind::kConst) {
        known.emplace_back(&sym[b], sm.table.program(b, t));
      }
    }
    std::sort(known.begin(), known.end(), [](const auto& x, const auto& y) {
      return expr_size(*x.first) > expr_size(*y.first);
    });
    std::vector<Expr> shared;
    for (BaseVar b = 0; b < u; ++b) shared.push_back(share(sym[b], known, expr_size(sym[b])));
    sym = std::move(shared);

    for (BaseVar b = 0; b < u; ++b) {
      VarId v = sm.table.program(b, t);
      if (is_var(sym[b], v)) {
        add_root(sm, v);
        continue;
      }
      std::vector<VarId> parents;
      Relation rel = function_graph(v, sym[b], parents);
      add_node(sm, v, parents, std::move(rel));
    }
  }

  for (const AgentProtocol& a : sys.agents) {
    VertexSet obs;
    for (int t = 0; t <= horizon; ++t) {
      for (BaseVar v : a.observes) obs.insert(sm.table.program(v, t));
    }
    sm.observables.push_back(std::move(obs));
  }
  return sm;
}

std::vector<std::string> validate(const StructuredModel& sm) {
  std::vector<std::string> out;
  if (!sm.dag.is_acyclic()) out.push_back("dependency graph has a cycle");
  for (VarId v : sm.dag.vertices()) {
    const std::string name = sm.table.name(v);
    auto it = sm.nodes.find(v);
    if (it == sm.nodes.end()) {
      out.push_back(name + ": no node relation");
      continue;
    }
    const Relation& rel = it->second;
    const VertexSet& pa = sm.dag.parents(v);
    std::vector<VarId> expect(pa.begin(), pa.end());
    expect.push_back(v);
    std::sort(expect.begin(), expect.end());
    if (rel.vars() != expect) {
      out.push_back(name + ": relation domain differs from the vertex and its parents");
      continue;
    }
    std::vector<VarId> pv(pa.begin(), pa.end());
    std::vector<VarSpec> specs;
    for (VarId p : pv) specs.push_back({p, rel.frame(p)});
    if (!(marginalize(rel, pv) == Relation::identity(specs))) {
      out.push_back(name + ": relation constrains its parents");
    }
  }
  for (const auto& [v, rel] : sm.nodes) {
    if (!sm.dag.has_vertex(v)) out.push_back(sm.table.name(v) + ": relation without a vertex");
  }
  for (const VertexSet& o : sm.observables) {
    for (VarId v : o) {
      if (!sm.dag.has_vertex(v)) out.push_back(sm.table.name(v) + ": observed but not in the graph");
    }
  }
  return out;
}

StructuredModel equality_merge(StructuredModel sm, const VertexSet& protect) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (VarId y : sm.dag.topological_order()) {
      if (protect.count(y)) continue;
      const VertexSet& pa = sm.dag.parents(y);
      if (pa.size() != 1) continue;
      VarId x = *pa.begin();
      if (!is_delta(sm.nodes.at(y), x, y)) continue;
      VertexSet kids = sm.dag.children(y);
      for (VarId c : kids) {
        sm.nodes[c] = rename_var(sm.nodes.at(c), y, x);
        sm.dag.add_edge(x, c);
      }
      sm.dag.remove_vertex(y);
      sm.nodes.erase(y);
      sm.alias[y] = x;
      for (VertexSet& o : sm.observables) {
        if (o.erase(y)) o.insert(x);
      }
      changed = true;
    }
  }
  for (auto& [from, to] : sm.alias) to = sm.resolve(to);
  return sm;
}

StructuredModel drop_leaves(StructuredModel sm, const VertexSet& keep) {
  std::vector<VarId> work;
  for (VarId v : sm.dag.vertices()) {
    if (sm.dag.is_leaf(v) && !keep.count(v)) work.push_back(v);
  }
  while (!work.empty()) {
    VarId v = work.back();
    work.pop_back();
    if (!sm.dag.has_vertex(v) || !sm.dag.is_leaf(v) || keep.count(v)) continue;
    VertexSet pa = sm.dag.parents(v);
    sm.dag.remove_vertex(v);
    sm.nodes.erase(v);
    for (VertexSet& o : sm.observables) o.erase(v);
    for (VarId p : pa) {
      if (sm.dag.is_leaf(p) && !keep.count(p)) work.push_back(p);
    }
  }
  return sm;
}

EpistemicStructure epistemic_marginalize(const StructuredModel& sm, const VertexSet& x,
                                         FusionStats* stats) {
  for (VarId v : x) {
    if (!sm.dag.has_vertex(v)) {
      throw ModelError("cannot marginalize to " + sm.table.name(v) + ": not in the model");
    }
  }
  StructuredModel pruned = drop_leaves(sm, x);
  std::vector<Relation> rels;
  for (auto& [v, r] : pruned.nodes) rels.push_back(r);
  std::vector<VarId> target(x.begin(), x.end());
  std::vector<VarId> order = elimination_order(rels, target);
  EpistemicStructure m;
  m.worlds = fuse_all(std::move(rels), target, order, stats);
  if (m.worlds.is_empty()) throw ModelError("model has no worlds");
  for (const VertexSet& o : sm.observables) {
    std::vector<VarId> kept;
    for (VarId v : o) {
      if (x.count(v)) kept.push_back(v);
    }
    m.observables.push_back(std::move(kept));
  }
  return m;
}

Formula bind_atoms(const Formula& f, const VarTable& table) {
  Formula out = f;
  if (f.kind == Formula::Kind::kAtom) {
    if (f.var >= table.base_count() || f.time < 0 || f.time > table.horizon()) {
      throw ModelError("atom outside the unfolded variables");
    }
    out.var = table.program(f.var, f.time);
  }
  for (Formula& k : out.kids) k = bind_atoms(k, table);
  return out;
}

Formula resolve_atoms(const Formula& f, const StructuredModel& sm) {
  Formula out = f;
  if (f.kind == Formula::Kind::kAtom) {
    out.var = sm.resolve(f.var);
    if (!sm.dag.has_vertex(out.var)) {
      throw ModelError("atom " + sm.table.name(f.var) + " is not a vertex of the model");
    }
  }
  for (Formula& k : out.kids) k = resolve_atoms(k, sm);
  return out;
}

}  // namespace epik
