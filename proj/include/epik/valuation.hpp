// Relational valuation algebra: finite relations over finite-frame variables
// with join (combine), projection (marginalize) and the fusion algorithm.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epik {

using VarId = std::uint32_t;

// A variable together with the size of its frame. Values are 0..frame-1.
struct VarSpec {
  VarId id = 0;
  std::uint32_t frame = 2;

  friend bool operator==(const VarSpec&, const VarSpec&) = default;
};

class ValuationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A set of assignments over an ordered variable set. Rows are bit-packed
// into 64-bit words, first variable in the most significant bits, so that
// word-wise comparison is lexicographic order on the value tuples. Rows are
// kept sorted and unique; equality is structural.
//
// The empty domain has two relations: the identity {<>} (one row) and the
// empty relation (zero rows, a contradiction).
class Relation {
 public:
  // Empty relation over the empty domain.
  Relation() = default;

  static Relation identity(std::span<const VarSpec> vars);
  static Relation empty(std::span<const VarSpec> vars);
  // Rows are given as value tuples in the order of `vars` (which need not be
  // sorted). Duplicates are removed.
  static Relation from_rows(std::span<const VarSpec> vars,
                            const std::vector<std::vector<std::uint32_t>>& rows);

  const std::vector<VarId>& vars() const { return vars_; }
  std::vector<VarSpec> specs() const;
  std::size_t arity() const { return vars_.size(); }
  std::size_t size() const { return rows_; }
  bool is_empty() const { return rows_ == 0; }
  bool has_var(VarId v) const;
  // Position of v in vars(), or -1.
  int column(VarId v) const;
  std::uint32_t frame(VarId v) const;
  std::uint32_t frame_at(std::size_t col) const { return frames_[col]; }

  std::uint32_t value(std::size_t row, std::size_t col) const {
    const Field& f = fields_[col];
    return static_cast<std::uint32_t>((data_[row * words_ + f.word] >> f.shift) &
                                      f.mask);
  }
  std::vector<std::uint32_t> row(std::size_t r) const;
  // Binary search for a value tuple given in vars() order.
  bool contains(std::span<const std::uint32_t> values) const;
  // Index of the row equal to `values`, or -1.
  long find(std::span<const std::uint32_t> values) const;

  // Sorted CSV dump: header of variable ids, then one line per row.
  std::string to_csv(const std::function<std::string(VarId)>& name = {}) const;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.vars_ == b.vars_ && a.frames_ == b.frames_ && a.rows_ == b.rows_ &&
           a.data_ == b.data_;
  }

  class Builder;

 private:
  struct Field {
    std::uint32_t word = 0;
    std::uint32_t shift = 0;
    std::uint64_t mask = 0;
  };

  void layout(std::vector<VarSpec> sorted_vars);
  void canonicalize();
  void set_value(std::uint64_t* row, std::size_t col, std::uint32_t v) const {
    const Field& f = fields_[col];
    row[f.word] = (row[f.word] & ~(f.mask << f.shift)) |
                  (static_cast<std::uint64_t>(v) << f.shift);
  }
  const std::uint64_t* row_ptr(std::size_t r) const {
    return data_.data() + r * words_;
  }

  std::vector<VarId> vars_;
  std::vector<std::uint32_t> frames_;
  std::vector<Field> fields_;
  std::size_t words_ = 0;
  std::size_t rows_ = 0;
  std::vector<std::uint64_t> data_;

  friend Relation combine(const Relation&, const Relation&);
  friend Relation marginalize(const Relation&, std::span<const VarId>);
  friend Relation rename_var(const Relation&, VarId, VarId);
  friend Relation select_equal(const Relation&, VarId, VarId);
  friend class Builder;
  friend std::vector<std::uint32_t> group_rows(const Relation&,
                                               std::span<const VarId>,
                                               std::size_t*);
};

// Incremental construction of a relation; rows are canonicalized by
// finish().
class Relation::Builder {
 public:
  explicit Builder(std::span<const VarSpec> vars);
  // Values in the order the builder was constructed with.
  void add(std::span<const std::uint32_t> values);
  std::size_t pending() const;
  Relation finish();

 private:
  Relation rel_;
  std::vector<std::size_t> order_;  // input position -> column
  std::vector<std::uint64_t> scratch_;
};

// Join. Shared variables must have identical frames.
Relation combine(const Relation& s, const Relation& t);
// Projection onto X ∩ dom(s).
Relation marginalize(const Relation& s, std::span<const VarId> x);
// s ↓ (dom(s) \ {x}).
Relation eliminate(const Relation& s, VarId x);
// Rename `from` to `to`. If `to` is already in the domain, keeps only rows
// where the two agree and drops `from`.
Relation rename_var(const Relation& s, VarId from, VarId to);
// Rows where a and b carry the same value.
Relation select_equal(const Relation& s, VarId a, VarId b);
// Dense group ids per row for the projection onto `cols` (ids ordered by the
// projected tuple). `groups` receives the number of distinct groups.
std::vector<std::uint32_t> group_rows(const Relation& s,
                                      std::span<const VarId> cols,
                                      std::size_t* groups);

// Sorted union of the domains.
std::vector<VarId> domain_of(std::span<const Relation> set);

struct FusionStats {
  std::size_t max_intermediate_tuples = 0;
  std::size_t max_intermediate_arity = 0;
  std::size_t steps = 0;
};

// One fusion step: combine the members containing x, eliminate x, keep the
// rest. Identity-over-∅ results are dropped as neutral.
std::vector<Relation> fuse_step(std::vector<Relation> set, VarId x,
                                FusionStats* stats = nullptr);
// (⊗S)↓X computed by successive fusion along `order`, which must be a
// permutation of dom(S) \ X.
Relation fuse_all(std::vector<Relation> set, std::span<const VarId> target,
                  std::span<const VarId> order, FusionStats* stats = nullptr);
// Combine everything, then marginalize. Reference route for fuse_all.
Relation combine_all(std::span<const Relation> set);

enum class OrderHeuristic { kMinFill, kMinDegree };

// Greedy elimination order for dom(S) \ X over the interaction graph of the
// member domains. Ties go to the smallest variable id.
std::vector<VarId> elimination_order(std::span<const Relation> set,
                                     std::span<const VarId> target,
                                     OrderHeuristic heuristic =
                                         OrderHeuristic::kMinFill);

// A ⊨ X ⊥ Y | Z in the relational (embedded multivalued dependency) sense.
// X, Y, Z must be pairwise disjoint subsets of dom(A).
bool conditional_independent(const Relation& a, std::span<const VarId> x,
                             std::span<const VarId> y, std::span<const VarId> z);

}  // namespace epik
