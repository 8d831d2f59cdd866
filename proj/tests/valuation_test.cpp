#include <algorithm>
#include <random>

#include "doctest.h"
#include "epik/valuation.hpp"
#include "naive_relation.hpp"

using namespace epik;
using namespace epik::testing;

namespace {

const VarId kX = 0, kY = 1, kZ = 2, kW = 3;

Relation rel(std::vector<VarSpec> vars, std::vector<std::vector<std::uint32_t>> rows) {
  return Relation::from_rows(vars, rows);
}

std::vector<VarSpec> bools(std::initializer_list<VarId> ids) {
  std::vector<VarSpec> out;
  for (VarId v : ids) out.push_back({v, 2});
  return out;
}

}  // namespace

TEST_CASE("identity relations") {
  CHECK(Relation::identity(bools({kX})).size() == 2);
  Relation none = Relation::identity({});
  CHECK(none.arity() == 0);
  CHECK(none.size() == 1);
  CHECK(Relation::identity(bools({kX, kY})).size() == 4);
  CHECK(Relation::identity(std::vector<VarSpec>{{kX, 3}, {kY, 1}}).size() == 3);
}

TEST_CASE("rows are canonical regardless of input order") {
  auto a = rel(bools({kX, kY}), {{1, 0}, {0, 1}, {1, 0}});
  auto b = rel(bools({kY, kX}), {{1, 0}, {0, 1}});
  CHECK(a == b);
  CHECK(a.size() == 2);
  CHECK(a.row(0) == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("values outside the frame are rejected") {
  Relation::Builder b(std::vector<VarSpec>{{kX, 3}});
  CHECK_THROWS_AS(b.add(std::vector<std::uint32_t>{3}), ValuationError);
}

TEST_CASE("combine") {
  auto s = rel(bools({kX, kY}), {{0, 1}, {1, 1}});
  CHECK(combine(s, Relation::identity(bools({kX, kY}))) == s);
  CHECK(combine(Relation::identity(bools({kX, kY})), s) == s);

  auto sx = rel(bools({kX}), {{0}});
  auto t = rel(bools({kX, kY}), {{0, 0}, {1, 1}});
  CHECK(combine(sx, t) == rel(bools({kX, kY}), {{0, 0}}));

  auto p = rel(bools({kX}), {{0}, {1}});
  auto q = rel(std::vector<VarSpec>{{kZ, 3}}, {{0}, {2}});
  CHECK(combine(p, q).size() == 4);

  CHECK_THROWS_AS(combine(rel(std::vector<VarSpec>{{kX, 3}}, {{2}}), p), ValuationError);
}

TEST_CASE("marginalize and eliminate") {
  auto s = rel(bools({kX, kY}), {{0, 1}, {1, 1}});
  CHECK(marginalize(s, s.vars()) == s);
  CHECK(marginalize(s, std::vector<VarId>{kY}) == rel(bools({kY}), {{1}}));
  // X not contained in the domain: result domain is the intersection.
  CHECK(marginalize(s, std::vector<VarId>{kY, kW}).vars() == std::vector<VarId>{kY});

  Relation to_empty = marginalize(s, std::vector<VarId>{});
  CHECK(to_empty == Relation::identity({}));
  Relation contradiction = Relation::empty(bools({kX}));
  Relation c0 = marginalize(contradiction, std::vector<VarId>{});
  CHECK(c0.arity() == 0);
  CHECK(c0.size() == 0);
  CHECK_FALSE(c0 == Relation::identity({}));

  CHECK(eliminate(s, kW) == s);
  CHECK(eliminate(Relation::identity(bools({kX, kY})), kX) == Relation::identity(bools({kY})));
  CHECK(eliminate(rel(bools({kX, kY}), {{0, 0}}), kX) == rel(bools({kY}), {{0}}));
}

TEST_CASE("rename and equality selection") {
  auto s = rel(bools({kX, kY}), {{0, 0}, {0, 1}, {1, 1}});
  CHECK(rename_var(s, kX, kZ) == rel(bools({kZ, kY}), {{0, 0}, {0, 1}, {1, 1}}));
  CHECK(rename_var(s, kX, kY) == rel(bools({kY}), {{0}, {1}}));
  CHECK(select_equal(s, kX, kY) == rel(bools({kX, kY}), {{0, 0}, {1, 1}}));
}

TEST_CASE("fuse_step") {
  auto a = rel(bools({kX, kY}), {{0, 0}, {1, 1}});
  auto b = rel(bools({kX, kZ}), {{0, 1}, {1, 1}});
  auto c = rel(bools({kW}), {{1}});

  auto untouched = fuse_step({c}, kX);
  REQUIRE(untouched.size() == 1);
  CHECK(untouched[0] == c);

  auto single = fuse_step({a}, kX);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == eliminate(a, kX));

  // Hand-computed: join gives (x,y,z) ∈ {(0,0,1),(1,1,1)}; drop x.
  auto fused = fuse_step({a, b, c}, kX);
  REQUIRE(fused.size() == 2);
  auto yz = std::find_if(fused.begin(), fused.end(), [](const Relation& r) { return r.arity() == 2; });
  REQUIRE(yz != fused.end());
  CHECK(*yz == rel(bools({kY, kZ}), {{0, 1}, {1, 1}}));
  CHECK(*yz == eliminate(from_naive(naive_combine(to_naive(a), to_naive(b))), kX));
}

TEST_CASE("fuse_all") {
  auto a = rel(bools({kX, kY}), {{0, 0}, {1, 1}, {1, 0}});
  auto b = rel(bools({kY, kZ}), {{0, 1}, {1, 1}});
  std::vector<Relation> set{a, b};
  CHECK(fuse_all(set, std::vector<VarId>{kX, kY, kZ}, {}) == combine(a, b));
  CHECK_THROWS_AS(fuse_all(set, std::vector<VarId>{kZ}, std::vector<VarId>{kX}), ValuationError);
  CHECK(fuse_all(set, std::vector<VarId>{kZ}, std::vector<VarId>{kY, kX}) ==
        marginalize(combine(a, b), std::vector<VarId>{kZ}));
}

TEST_CASE("fusion matches combine-then-marginalize on random sets") {
  std::mt19937 rng(7);
  std::vector<VarSpec> pool = bools({0, 1, 2, 3, 4, 5});
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Relation> set;
    int k = 1 + trial % 5;
    for (int i = 0; i < k; ++i) set.push_back(random_relation(rng, pool, 3, 0.7));
    std::vector<VarId> dom = domain_of(set);
    std::vector<VarId> target;
    for (VarId v : dom) {
      if (std::bernoulli_distribution(0.4)(rng)) target.push_back(v);
    }
    Relation expected = marginalize(combine_all(set), target);
    std::vector<VarId> order;
    for (VarId v : dom) {
      if (std::find(target.begin(), target.end(), v) == target.end()) order.push_back(v);
    }
    for (int rep = 0; rep < 3; ++rep) {
      std::shuffle(order.begin(), order.end(), rng);
      CHECK(fuse_all(set, target, order) == expected);
    }
    CHECK(fuse_all(set, target, elimination_order(set, target)) == expected);
  }
}

TEST_CASE("combine and marginalize agree with the naive definitions") {
  std::mt19937 rng(11);
  std::vector<VarSpec> pool{{0, 2}, {1, 3}, {2, 2}, {3, 3}, {4, 2}};
  for (int trial = 0; trial < 100; ++trial) {
    Relation s = random_relation(rng, pool, 4);
    Relation t = random_relation(rng, pool, 4);
    CHECK(combine(s, t) == from_naive(naive_combine(to_naive(s), to_naive(t))));
    std::set<VarId> x;
    for (const VarSpec& v : pool) {
      if (std::bernoulli_distribution(0.5)(rng)) x.insert(v.id);
    }
    std::vector<VarId> xv(x.begin(), x.end());
    Relation m = marginalize(s, xv);
    NaiveRelation nm = naive_project(to_naive(s), x);
    if (nm.frames.empty()) {
      CHECK(m.size() == (s.is_empty() ? 0u : 1u));
    } else {
      CHECK(m == from_naive(nm));
    }
  }
}

TEST_CASE("wide relations span several words") {
  std::vector<VarSpec> vars;
  for (VarId v = 0; v < 70; ++v) vars.push_back({v, v % 7 == 0 ? 5u : 2u});
  std::vector<std::uint32_t> a(70, 0), b(70, 1);
  b[7] = 4;
  Relation r = Relation::from_rows(vars, {b, a, b});
  CHECK(r.size() == 2);
  CHECK(r.row(0) == a);
  CHECK(r.row(1) == b);
  CHECK(r.contains(b));
  Relation proj = marginalize(r, std::vector<VarId>{7, 69});
  CHECK(proj.size() == 2);
  Relation joined = combine(r, proj);
  CHECK(joined == r);
}

TEST_CASE("elimination_order") {
  auto ab = Relation::identity(bools({0, 1}));
  auto bc = Relation::identity(bools({1, 2}));
  auto cd = Relation::identity(bools({2, 3}));
  std::vector<Relation> chain{ab, bc, cd};
  CHECK(elimination_order(chain, std::vector<VarId>{0, 1, 2, 3}).empty());

  std::vector<VarId> target{3};
  auto order = elimination_order(chain, target);
  CHECK(order.size() == 3);
  FusionStats stats;
  std::vector<Relation> set = chain;
  for (VarId x : order) {
    set = fuse_step(std::move(set), x, &stats);
  }
  CHECK(stats.max_intermediate_arity <= 2);
  for (const Relation& r : set) CHECK(r.arity() <= 2);

  // Star: hub 9 joined with every leaf, leaves plus an extra satellite kept.
  std::vector<Relation> star;
  for (VarId leaf = 0; leaf < 4; ++leaf) star.push_back(Relation::identity(bools({9, leaf})));
  star.push_back(Relation::identity(bools({4, 5})));
  auto star_order = elimination_order(star, std::vector<VarId>{0, 1, 2, 3});
  REQUIRE(!star_order.empty());
  CHECK(star_order.back() == 9);
}

TEST_CASE("conditional_independent") {
  auto full = Relation::identity(bools({kX, kY}));
  CHECK(conditional_independent(full, std::vector<VarId>{kX}, std::vector<VarId>{kY}, {}));
  auto diag = rel(bools({kX, kY}), {{0, 0}, {1, 1}});
  CHECK_FALSE(conditional_independent(diag, std::vector<VarId>{kX}, std::vector<VarId>{kY}, {}));
  CHECK(conditional_independent(diag, {}, std::vector<VarId>{kY}, std::vector<VarId>{kX}));
  CHECK_THROWS_AS(conditional_independent(diag, std::vector<VarId>{kX}, std::vector<VarId>{kX}, {}),
                  ValuationError);

  std::mt19937 rng(3);
  std::vector<VarSpec> pool = bools({0, 1, 2, 3});
  for (int trial = 0; trial < 80; ++trial) {
    Relation a = random_relation(rng, pool, 4, 0.6);
    std::set<VarId> x, y, z;
    for (VarId v : a.vars()) {
      switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: x.insert(v); break;
        case 1: y.insert(v); break;
        case 2: z.insert(v); break;
        default: break;
      }
    }
    std::vector<VarId> xv(x.begin(), x.end()), yv(y.begin(), y.end()), zv(z.begin(), z.end());
    CHECK(conditional_independent(a, xv, yv, zv) == naive_independent(to_naive(a), x, y, z));
  }
}
