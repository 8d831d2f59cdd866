#include "epik/valuation.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <sstream>

namespace epik {

namespace {

std::uint32_t bits_for(std::uint32_t frame) {
  if (frame <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(frame - 1));
}

std::vector<VarSpec> sorted_specs(std::span<const VarSpec> vars) {
  std::vector<VarSpec> out(vars.begin(), vars.end());
  std::sort(out.begin(), out.end(),
            [](const VarSpec& a, const VarSpec& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) {
      throw ValuationError("duplicate variable " + std::to_string(out[i].id) +
                           " in relation domain");
    }
  }
  return out;
}

bool rows_less(const std::uint64_t* a, const std::uint64_t* b, std::size_t w) {
  for (std::size_t i = 0; i < w; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

bool rows_equal(const std::uint64_t* a, const std::uint64_t* b, std::size_t w) {
  return std::equal(a, a + w, b);
}

// Packs a subset of a relation's columns into compact keys.
class KeyPacker {
 public:
  KeyPacker(const Relation& rel, std::span<const std::size_t> cols) : rel_(rel) {
    std::uint32_t cursor = 0;
    for (std::size_t c : cols) {
      std::uint32_t bits = bits_for(rel.frame_at(c));
      if (bits > 0 && cursor % 64 + bits > 64) cursor += 64 - cursor % 64;
      parts_.push_back({c, cursor / 64, bits == 0 ? 0 : 64 - cursor % 64 - bits});
      cursor += bits;
    }
    words_ = std::max<std::size_t>(1, (cursor + 63) / 64);
  }

  std::size_t words() const { return words_; }

  void pack(std::size_t row, std::uint64_t* out) const {
    std::fill(out, out + words_, 0);
    for (const Part& p : parts_) {
      out[p.word] |= static_cast<std::uint64_t>(rel_.value(row, p.col)) << p.shift;
    }
  }

 private:
  struct Part {
    std::size_t col;
    std::uint32_t word;
    std::uint32_t shift;
  };
  const Relation& rel_;
  std::vector<Part> parts_;
  std::size_t words_ = 1;
};

}  // namespace

void Relation::layout(std::vector<VarSpec> sorted_vars) {
  vars_.clear();
  frames_.clear();
  fields_.clear();
  std::uint32_t cursor = 0;
  for (const VarSpec& v : sorted_vars) {
    if (v.frame == 0) {
      throw ValuationError("variable " + std::to_string(v.id) + " has empty frame");
    }
    vars_.push_back(v.id);
    frames_.push_back(v.frame);
    std::uint32_t bits = bits_for(v.frame);
    Field f;
    if (bits == 0) {
      f = {0, 0, 0};
    } else {
      if (cursor % 64 + bits > 64) cursor += 64 - cursor % 64;
      f.word = cursor / 64;
      f.shift = 64 - cursor % 64 - bits;
      f.mask = bits == 64 ? ~0ull : ((1ull << bits) - 1);
      cursor += bits;
    }
    fields_.push_back(f);
  }
  words_ = vars_.empty() ? 0 : std::max<std::size_t>(1, (cursor + 63) / 64);
  rows_ = 0;
  data_.clear();
}

void Relation::canonicalize() {
  if (words_ == 0) {
    rows_ = std::min<std::size_t>(rows_, 1);
    return;
  }
  if (rows_ <= 1) return;
  if (words_ == 1) {
    std::sort(data_.begin(), data_.end());
    data_.erase(std::unique(data_.begin(), data_.end()), data_.end());
    rows_ = data_.size();
    return;
  }
  std::vector<std::uint32_t> idx(rows_);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t w = words_;
  const std::uint64_t* base = data_.data();
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return rows_less(base + a * w, base + b * w, w);
  });
  std::vector<std::uint64_t> out;
  out.reserve(data_.size());
  std::size_t kept = 0;
  for (std::uint32_t i : idx) {
    const std::uint64_t* r = base + i * w;
    if (kept > 0 && rows_equal(out.data() + (kept - 1) * w, r, w)) continue;
    out.insert(out.end(), r, r + w);
    ++kept;
  }
  data_ = std::move(out);
  rows_ = kept;
}

Relation Relation::identity(std::span<const VarSpec> vars) {
  Relation r;
  r.layout(sorted_specs(vars));
  std::size_t total = 1;
  for (std::uint32_t f : r.frames_) {
    if (total > (std::size_t{1} << 32) / f) {
      throw ValuationError("identity relation too large");
    }
    total *= f;
  }
  if (r.words_ == 0) {
    r.rows_ = 1;
    return r;
  }
  // Mixed-radix counting with the last column varying fastest yields rows in
  // sorted order directly.
  std::vector<std::uint32_t> digits(r.arity(), 0);
  r.data_.assign(total * r.words_, 0);
  for (std::size_t i = 0; i < total; ++i) {
    std::uint64_t* row = r.data_.data() + i * r.words_;
    for (std::size_t c = 0; c < digits.size(); ++c) r.set_value(row, c, digits[c]);
    for (std::size_t c = digits.size(); c-- > 0;) {
      if (++digits[c] < r.frames_[c]) break;
      digits[c] = 0;
    }
  }
  r.rows_ = total;
  return r;
}

Relation Relation::empty(std::span<const VarSpec> vars) {
  Relation r;
  r.layout(sorted_specs(vars));
  return r;
}

Relation Relation::from_rows(std::span<const VarSpec> vars,
                             const std::vector<std::vector<std::uint32_t>>& rows) {
  Builder b(vars);
  for (const auto& row : rows) b.add(row);
  return b.finish();
}

std::vector<VarSpec> Relation::specs() const {
  std::vector<VarSpec> out;
  out.reserve(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) out.push_back({vars_[i], frames_[i]});
  return out;
}

bool Relation::has_var(VarId v) const { return column(v) >= 0; }

int Relation::column(VarId v) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
  if (it == vars_.end() || *it != v) return -1;
  return static_cast<int>(it - vars_.begin());
}

std::uint32_t Relation::frame(VarId v) const {
  int c = column(v);
  if (c < 0) throw ValuationError("variable " + std::to_string(v) + " not in domain");
  return frames_[c];
}

std::vector<std::uint32_t> Relation::row(std::size_t r) const {
  std::vector<std::uint32_t> out(arity());
  for (std::size_t c = 0; c < arity(); ++c) out[c] = value(r, c);
  return out;
}

long Relation::find(std::span<const std::uint32_t> values) const {
  if (values.size() != arity()) return -1;
  if (words_ == 0) return rows_ > 0 ? 0 : -1;
  std::vector<std::uint64_t> key(words_, 0);
  for (std::size_t c = 0; c < arity(); ++c) {
    if (values[c] >= frames_[c]) return -1;
    set_value(key.data(), c, values[c]);
  }
  std::size_t lo = 0, hi = rows_;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (rows_less(row_ptr(mid), key.data(), words_)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < rows_ && rows_equal(row_ptr(lo), key.data(), words_)) {
    return static_cast<long>(lo);
  }
  return -1;
}

bool Relation::contains(std::span<const std::uint32_t> values) const {
  return find(values) >= 0;
}

std::string Relation::to_csv(const std::function<std::string(VarId)>& name) const {
  std::ostringstream os;
  for (std::size_t c = 0; c < arity(); ++c) {
    if (c) os << ',';
    os << (name ? name(vars_[c]) : std::to_string(vars_[c]));
  }
  os << '\n';
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < arity(); ++c) {
      if (c) os << ',';
      os << value(r, c);
    }
    os << '\n';
  }
  return os.str();
}

Relation::Builder::Builder(std::span<const VarSpec> vars) {
  rel_.layout(sorted_specs(vars));
  order_.reserve(vars.size());
  for (const VarSpec& v : vars) order_.push_back(static_cast<std::size_t>(rel_.column(v.id)));
  scratch_.assign(rel_.words_, 0);
}

void Relation::Builder::add(std::span<const std::uint32_t> values) {
  if (values.size() != order_.size()) {
    throw ValuationError("row arity mismatch");
  }
  if (rel_.words_ == 0) {
    rel_.rows_ = 1;
    return;
  }
  std::fill(scratch_.begin(), scratch_.end(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t c = order_[i];
    if (values[i] >= rel_.frames_[c]) {
      throw ValuationError("value " + std::to_string(values[i]) +
                           " outside frame of variable " +
                           std::to_string(rel_.vars_[c]));
    }
    rel_.set_value(scratch_.data(), c, values[i]);
  }
  rel_.data_.insert(rel_.data_.end(), scratch_.begin(), scratch_.end());
  ++rel_.rows_;
}

std::size_t Relation::Builder::pending() const { return rel_.rows_; }

Relation Relation::Builder::finish() {
  rel_.canonicalize();
  return std::move(rel_);
}

Relation combine(const Relation& s, const Relation& t) {
  // Result layout over the union of the domains.
  std::vector<VarSpec> uni;
  std::vector<std::size_t> shared_s, shared_t;
  {
    std::size_t i = 0, j = 0;
    while (i < s.arity() || j < t.arity()) {
      if (j == t.arity() || (i < s.arity() && s.vars_[i] < t.vars_[j])) {
        uni.push_back({s.vars_[i], s.frames_[i]});
        ++i;
      } else if (i == s.arity() || t.vars_[j] < s.vars_[i]) {
        uni.push_back({t.vars_[j], t.frames_[j]});
        ++j;
      } else {
        if (s.frames_[i] != t.frames_[j]) {
          throw ValuationError("frame mismatch on variable " + std::to_string(s.vars_[i]));
        }
        uni.push_back({s.vars_[i], s.frames_[i]});
        shared_s.push_back(i);
        shared_t.push_back(j);
        ++i;
        ++j;
      }
    }
  }
  Relation out;
  out.layout(uni);
  if (s.rows_ == 0 || t.rows_ == 0) return out;
  if (out.words_ == 0) {
    out.rows_ = 1;
    return out;
  }

  // Source of each result column: (0 = s, 1 = t, column).
  std::vector<std::pair<int, std::size_t>> src(out.arity());
  for (std::size_t c = 0; c < out.arity(); ++c) {
    int cs = s.column(out.vars_[c]);
    src[c] = cs >= 0 ? std::make_pair(0, static_cast<std::size_t>(cs))
                     : std::make_pair(1, static_cast<std::size_t>(t.column(out.vars_[c])));
  }

  // Index t by its shared-column key.
  KeyPacker kt(t, shared_t);
  KeyPacker ks(s, shared_s);
  const std::size_t kw = kt.words();
  std::vector<std::uint64_t> tkeys(t.rows_ * kw);
  for (std::size_t r = 0; r < t.rows_; ++r) kt.pack(r, tkeys.data() + r * kw);
  std::vector<std::uint32_t> tidx(t.rows_);
  std::iota(tidx.begin(), tidx.end(), 0);
  std::stable_sort(tidx.begin(), tidx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return rows_less(tkeys.data() + a * kw, tkeys.data() + b * kw, kw);
  });

  std::vector<std::uint64_t> key(kw);
  std::vector<std::uint64_t> scratch(out.words_);
  for (std::size_t r = 0; r < s.rows_; ++r) {
    ks.pack(r, key.data());
    auto lo = std::lower_bound(tidx.begin(), tidx.end(), key, [&](std::uint32_t a, const auto& k) {
      return rows_less(tkeys.data() + a * kw, k.data(), kw);
    });
    for (auto it = lo; it != tidx.end() && rows_equal(tkeys.data() + *it * kw, key.data(), kw);
         ++it) {
      std::fill(scratch.begin(), scratch.end(), 0);
      for (std::size_t c = 0; c < out.arity(); ++c) {
        std::uint32_t v = src[c].first == 0 ? s.value(r, src[c].second)
                                            : t.value(*it, src[c].second);
        out.set_value(scratch.data(), c, v);
      }
      out.data_.insert(out.data_.end(), scratch.begin(), scratch.end());
      ++out.rows_;
    }
  }
  out.canonicalize();
  return out;
}

Relation marginalize(const Relation& s, std::span<const VarId> x) {
  std::vector<VarSpec> keep;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < s.arity(); ++c) {
    if (std::find(x.begin(), x.end(), s.vars_[c]) != x.end()) {
      keep.push_back({s.vars_[c], s.frames_[c]});
      cols.push_back(c);
    }
  }
  if (keep.size() == s.arity()) return s;
  Relation out;
  out.layout(keep);
  if (out.words_ == 0) {
    out.rows_ = s.rows_ > 0 ? 1 : 0;
    return out;
  }
  out.data_.assign(s.rows_ * out.words_, 0);
  for (std::size_t r = 0; r < s.rows_; ++r) {
    std::uint64_t* row = out.data_.data() + r * out.words_;
    for (std::size_t c = 0; c < cols.size(); ++c) out.set_value(row, c, s.value(r, cols[c]));
  }
  out.rows_ = s.rows_;
  out.canonicalize();
  return out;
}

Relation eliminate(const Relation& s, VarId x) {
  if (!s.has_var(x)) return s;
  std::vector<VarId> rest;
  for (VarId v : s.vars()) {
    if (v != x) rest.push_back(v);
  }
  return marginalize(s, rest);
}

Relation select_equal(const Relation& s, VarId a, VarId b) {
  int ca = s.column(a), cb = s.column(b);
  if (ca < 0 || cb < 0) throw ValuationError("select_equal on variable outside domain");
  Relation out = s;
  out.data_.clear();
  out.rows_ = 0;
  for (std::size_t r = 0; r < s.rows_; ++r) {
    if (s.value(r, ca) == s.value(r, cb)) {
      const std::uint64_t* p = s.row_ptr(r);
      out.data_.insert(out.data_.end(), p, p + s.words_);
      ++out.rows_;
    }
  }
  return out;
}

Relation rename_var(const Relation& s, VarId from, VarId to) {
  if (from == to || !s.has_var(from)) return s;
  if (s.has_var(to)) {
    if (s.frame(from) != s.frame(to)) throw ValuationError("rename across frames");
    return eliminate(select_equal(s, from, to), from);
  }
  std::vector<VarSpec> specs = s.specs();
  for (VarSpec& v : specs) {
    if (v.id == from) v.id = to;
  }
  Relation::Builder b(specs);
  std::vector<std::uint32_t> row(s.arity());
  for (std::size_t r = 0; r < s.rows_; ++r) {
    for (std::size_t c = 0; c < s.arity(); ++c) row[c] = s.value(r, c);
    b.add(row);
  }
  return b.finish();
}

std::vector<std::uint32_t> group_rows(const Relation& s, std::span<const VarId> cols_in,
                                      std::size_t* groups) {
  std::vector<std::size_t> cols;
  for (VarId v : cols_in) {
    int c = s.column(v);
    if (c < 0) throw ValuationError("group_rows on variable outside domain");
    cols.push_back(static_cast<std::size_t>(c));
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  std::vector<std::uint32_t> ids(s.rows_, 0);
  if (cols.empty() || s.rows_ == 0) {
    if (groups) *groups = s.rows_ > 0 ? 1 : 0;
    return ids;
  }
  KeyPacker kp(s, cols);
  const std::size_t kw = kp.words();
  std::vector<std::uint64_t> keys(s.rows_ * kw);
  for (std::size_t r = 0; r < s.rows_; ++r) kp.pack(r, keys.data() + r * kw);
  std::vector<std::uint32_t> idx(s.rows_);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return rows_less(keys.data() + a * kw, keys.data() + b * kw, kw);
  });
  std::uint32_t g = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && !rows_equal(keys.data() + idx[i] * kw, keys.data() + idx[i - 1] * kw, kw)) ++g;
    ids[idx[i]] = g;
  }
  if (groups) *groups = g + 1;
  return ids;
}

std::vector<VarId> domain_of(std::span<const Relation> set) {
  std::vector<VarId> out;
  for (const Relation& r : set) out.insert(out.end(), r.vars().begin(), r.vars().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void note(FusionStats* stats, const Relation& r) {
  if (!stats) return;
  stats->max_intermediate_tuples = std::max(stats->max_intermediate_tuples, r.size());
  stats->max_intermediate_arity = std::max(stats->max_intermediate_arity, r.arity());
}

bool shares_var(const Relation& a, const Relation& b) {
  std::size_t i = 0, j = 0;
  while (i < a.arity() && j < b.arity()) {
    if (a.vars()[i] == b.vars()[j]) return true;
    if (a.vars()[i] < b.vars()[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

// Combines a set greedily: smallest member first, then repeatedly the
// smallest member connected to the accumulator.
Relation combine_greedy(std::vector<Relation> set, FusionStats* stats) {
  if (set.empty()) return Relation::identity({});
  std::stable_sort(set.begin(), set.end(), [](const Relation& a, const Relation& b) {
    return a.size() < b.size();
  });
  Relation acc = std::move(set.front());
  set.erase(set.begin());
  while (!set.empty()) {
    auto pick = std::find_if(set.begin(), set.end(),
                             [&](const Relation& r) { return shares_var(acc, r); });
    if (pick == set.end()) pick = set.begin();
    acc = combine(acc, *pick);
    note(stats, acc);
    set.erase(pick);
    if (acc.is_empty()) {
      // Contradiction absorbs everything; still extend the domain.
      for (const Relation& r : set) acc = combine(acc, r);
      break;
    }
  }
  return acc;
}

}  // namespace

std::vector<Relation> fuse_step(std::vector<Relation> set, VarId x, FusionStats* stats) {
  std::vector<Relation> plus, out;
  for (Relation& r : set) {
    if (r.has_var(x)) {
      plus.push_back(std::move(r));
    } else {
      out.push_back(std::move(r));
    }
  }
  if (stats) ++stats->steps;
  if (plus.empty()) return out;
  // Any factor's projection onto the step's domain is implied by the set, so
  // joining it in keeps the intermediate small without changing the result.
  std::vector<VarId> dom = domain_of(plus);
  for (const Relation& r : out) {
    std::vector<VarId> shared;
    std::set_intersection(dom.begin(), dom.end(), r.vars().begin(), r.vars().end(),
                          std::back_inserter(shared));
    if (shared.empty()) continue;
    Relation p = shared.size() == r.arity() ? r : marginalize(r, shared);
    double full = 1;
    for (VarId v : shared) full *= p.frame(v);
    if (static_cast<double>(p.size()) < full) plus.push_back(std::move(p));
  }
  Relation joined = combine_greedy(std::move(plus), stats);
  note(stats, joined);
  Relation reduced = eliminate(joined, x);
  if (!(reduced.arity() == 0 && reduced.size() == 1)) out.push_back(std::move(reduced));
  return out;
}

Relation fuse_all(std::vector<Relation> set, std::span<const VarId> target,
                  std::span<const VarId> order, FusionStats* stats) {
  std::vector<VarId> expected;
  for (VarId v : domain_of(set)) {
    if (std::find(target.begin(), target.end(), v) == target.end()) expected.push_back(v);
  }
  std::vector<VarId> given(order.begin(), order.end());
  std::sort(given.begin(), given.end());
  if (given != expected) {
    throw ValuationError("elimination order is not a permutation of dom(S) \\ X");
  }
  for (VarId x : order) set = fuse_step(std::move(set), x, stats);
  Relation result = combine_greedy(std::move(set), stats);
  note(stats, result);
  return result;
}

Relation combine_all(std::span<const Relation> set) {
  Relation acc = Relation::identity({});
  for (const Relation& r : set) acc = combine(acc, r);
  return acc;
}

std::vector<VarId> elimination_order(std::span<const Relation> set,
                                     std::span<const VarId> target,
                                     OrderHeuristic heuristic) {
  std::vector<VarId> dom = domain_of(set);
  const std::size_t n = dom.size();
  auto index = [&](VarId v) {
    return static_cast<std::size_t>(std::lower_bound(dom.begin(), dom.end(), v) - dom.begin());
  };
  std::vector<std::vector<std::size_t>> adj(n);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    auto& la = adj[a];
    auto it = std::lower_bound(la.begin(), la.end(), b);
    if (it == la.end() || *it != b) la.insert(it, b);
  };
  auto linked = [&](std::size_t a, std::size_t b) {
    return std::binary_search(adj[a].begin(), adj[a].end(), b);
  };
  for (const Relation& r : set) {
    for (VarId a : r.vars()) {
      for (VarId b : r.vars()) link(index(a), index(b));
    }
  }
  std::vector<char> pending(n, 0);
  std::size_t left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(target.begin(), target.end(), dom[i]) == target.end()) {
      pending[i] = 1;
      ++left;
    }
  }
  std::vector<VarId> order;
  while (left > 0) {
    std::size_t best = n;
    std::size_t best_score = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!pending[v]) continue;
      std::size_t score = 0;
      if (heuristic == OrderHeuristic::kMinDegree) {
        score = adj[v].size();
      } else {
        const auto& nb = adj[v];
        for (std::size_t i = 0; i < nb.size(); ++i) {
          for (std::size_t j = i + 1; j < nb.size(); ++j) {
            if (!linked(nb[i], nb[j])) ++score;
          }
        }
      }
      if (best == n || score < best_score) {
        best = v;
        best_score = score;
      }
    }
    const std::vector<std::size_t> nb = adj[best];
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        link(nb[i], nb[j]);
        link(nb[j], nb[i]);
      }
    }
    for (std::size_t u : nb) {
      auto& lu = adj[u];
      lu.erase(std::lower_bound(lu.begin(), lu.end(), best));
    }
    adj[best].clear();
    pending[best] = 0;
    --left;
    order.push_back(dom[best]);
  }
  return order;
}

bool conditional_independent(const Relation& a, std::span<const VarId> x,
                             std::span<const VarId> y, std::span<const VarId> z) {
  auto check_in = [&](std::span<const VarId> s) {
    for (VarId v : s) {
      if (!a.has_var(v)) throw ValuationError("independency over variable outside domain");
    }
  };
  check_in(x);
  check_in(y);
  check_in(z);
  auto overlap = [](std::span<const VarId> p, std::span<const VarId> q) {
    for (VarId v : p) {
      if (std::find(q.begin(), q.end(), v) != q.end()) return true;
    }
    return false;
  };
  if (overlap(x, y) || overlap(x, z) || overlap(y, z)) {
    throw ValuationError("independency arguments must be disjoint");
  }
  if (x.empty() || y.empty()) return true;
  std::vector<VarId> xz(x.begin(), x.end()), yz(y.begin(), y.end());
  xz.insert(xz.end(), z.begin(), z.end());
  yz.insert(yz.end(), z.begin(), z.end());
  std::vector<VarId> xyz = xz;
  xyz.insert(xyz.end(), y.begin(), y.end());
  return marginalize(a, xyz) == combine(marginalize(a, xz), marginalize(a, yz));
}

}  // namespace epik
