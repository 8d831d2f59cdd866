// Model files and formulas: ASTs and the parser.
//
// A model file declares variables, agents with their observations and
// straight-line protocols, optional environment code run every tick, the
// initial condition and the specification:
//
//   vars: paid0, paid1, coin0, coin1;
//   init: !(paid0 & paid1);
//   agent C0 {
//     observes: paid0, coin0;
//     protocol: rand(coin0); < coin1 := coin0; paid0 := paid0 >; skip;
//   }
//   env { }
//   horizon: 3;
//   spec: Knows C0 (paid1 | !paid1) @ 3;
//
// Atomic actions are written `< s1; s2; ... >`; a bare statement is an atomic
// action with a single statement.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epik {

using BaseVar = std::uint32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, int col, std::string message);
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  std::string message_;
  int line_;
  int col_;
};

// Boolean program expression.
struct Expr {
  enum class Kind { kVar, kConst, kNot, kAnd, kOr, kXor, kImplies, kIff };
  Kind kind = Kind::kConst;
  BaseVar var = 0;
  bool value = false;
  std::vector<Expr> kids;

  static Expr variable(BaseVar v) { return {Kind::kVar, v, false, {}}; }
  static Expr constant(bool b) { return {Kind::kConst, 0, b, {}}; }
  static Expr unary(Kind k, Expr a) { return {k, 0, false, {std::move(a)}}; }
  static Expr binary(Kind k, Expr a, Expr b) {
    return {k, 0, false, {std::move(a), std::move(b)}};
  }

  friend bool operator==(const Expr&, const Expr&) = default;
};

bool evaluate(const Expr& e, std::span<const std::uint8_t> state);
void collect_vars(const Expr& e, std::set<BaseVar>& out);

struct Stmt {
  enum class Kind { kAssign, kRand };
  Kind kind = Kind::kAssign;
  BaseVar target = 0;
  Expr expr;

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

using Code = std::vector<Stmt>;

// skip, or an atomic block of code.
struct Action {
  bool skip = true;
  Code code;

  friend bool operator==(const Action&, const Action&) = default;
};

struct AgentProtocol {
  std::string name;
  std::set<BaseVar> observes;
  std::vector<Action> actions;
};

// Epistemic formula over timed atoms. Derived connectives are desugared into
// negation and conjunction when parsed.
struct Formula {
  enum class Kind { kAtom, kNot, kAnd, kKnows };
  Kind kind = Kind::kAtom;
  BaseVar var = 0;
  int time = 0;
  int agent = 0;
  std::vector<Formula> kids;

  static Formula atom(BaseVar v, int t) { return {Kind::kAtom, v, t, 0, {}}; }
  static Formula negate(Formula f) { return {Kind::kNot, 0, 0, 0, {std::move(f)}}; }
  static Formula conj(Formula a, Formula b) {
    return {Kind::kAnd, 0, 0, 0, {std::move(a), std::move(b)}};
  }
  static Formula knows(int agent, Formula f) {
    return {Kind::kKnows, 0, 0, agent, {std::move(f)}};
  }
  static Formula disj(Formula a, Formula b) {
    return negate(conj(negate(std::move(a)), negate(std::move(b))));
  }
  static Formula implies(Formula a, Formula b) {
    return negate(conj(std::move(a), negate(std::move(b))));
  }

  friend bool operator==(const Formula&, const Formula&) = default;
};

struct SystemSpec {
  std::vector<std::string> vars;
  std::vector<AgentProtocol> agents;
  Code env;
  Expr init = Expr::constant(true);
  // Every protocol is padded with skip to exactly this many actions.
  int horizon = 0;
  std::optional<Formula> spec;
  int spec_time = 0;
  // The spec formula before stamping; untimed atoms have time -1.
  std::optional<Formula> spec_untimed;

  std::optional<BaseVar> find_var(const std::string& name) const;
  std::optional<int> find_agent(const std::string& name) const;
};

// Parses a model file. `file` only labels error messages.
SystemSpec parse_system(const std::string& text, const std::string& file = "<input>");

// Parses a formula against the declarations of `sys`. Atoms without `@t` are
// stamped with default_time.
Formula parse_formula(const std::string& text, const SystemSpec& sys, int default_time);

// Gives every atom with time -1 the time `time`.
Formula stamp_formula(Formula f, int time);

std::string to_string(const Expr& e, const SystemSpec& sys);
// Fully parenthesized; reparses to the same AST.
std::string to_string(const Formula& f, const SystemSpec& sys);

// Timed atoms (var, time) occurring in f.
std::set<std::pair<BaseVar, int>> atoms_of(const Formula& f);
// Agents whose knowledge operator occurs in f.
std::set<int> agents_of(const Formula& f);
int knowledge_depth(const Formula& f);

}  // namespace epik
