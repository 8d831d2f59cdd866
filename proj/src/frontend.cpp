#include "epik/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace epik {

ParseError::ParseError(std::string file, int line, int col, std::string message)
    : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                         message),
      message_(std::move(message)),
      line_(line),
      col_(col) {}

bool evaluate(const Expr& e, std::span<const std::uint8_t> state) {
  switch (e.kind) {
    case Expr::Kind::kVar: return state[e.var] != 0;
    case Expr::Kind::kConst: return e.value;
    case Expr::Kind::kNot: return !evaluate(e.kids[0], state);
    case Expr::Kind::kAnd: return evaluate(e.kids[0], state) && evaluate(e.kids[1], state);
    case Expr::Kind::kOr: return evaluate(e.kids[0], state) || evaluate(e.kids[1], state);
    case Expr::Kind::kXor: return evaluate(e.kids[0], state) != evaluate(e.kids[1], state);
    case Expr::Kind::kImplies: return !evaluate(e.kids[0], state) || evaluate(e.kids[1], state);
    case Expr::Kind::kIff: return evaluate(e.kids[0], state) == evaluate(e.kids[1], state);
  }
  return false;
}

void collect_vars(const Expr& e, std::set<BaseVar>& out) {
  if (e.kind == Expr::Kind::kVar) out.insert(e.var);
  for (const Expr& k : e.kids) collect_vars(k, out);
}

std::optional<BaseVar> SystemSpec::find_var(const std::string& name) const {
  auto it = std::find(vars.begin(), vars.end(), name);
  if (it == vars.end()) return std::nullopt;
  return static_cast<BaseVar>(it - vars.begin());
}

std::optional<int> SystemSpec::find_agent(const std::string& name) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

namespace {

enum class Tok {
  kIdent, kNumber, kLBrace, kRBrace, kLParen, kRParen, kSemi, kColon, kComma,
  kNot, kAnd, kOr, kXor, kImplies, kIff, kLAngle, kRAngle, kAssign, kAt, kEnd
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

std::vector<Token> lex(const std::string& text, const std::string& file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    auto push = [&](Tok k, std::size_t n) {
      out.push_back({k, text.substr(i, n), l, cl});
      advance(n);
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '.')) {
        ++j;
      }
      push(Tok::kIdent, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i + 1;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      push(Tok::kNumber, j - i);
      continue;
    }
    auto starts = [&](const char* s) { return text.compare(i, std::char_traits<char>::length(s), s) == 0; };
    if (starts("<=>")) { push(Tok::kIff, 3); continue; }
    if (starts("=>")) { push(Tok::kImplies, 2); continue; }
    if (starts("->")) { push(Tok::kImplies, 2); continue; }
    if (starts(":=")) { push(Tok::kAssign, 2); continue; }
    if (starts("&&")) { push(Tok::kAnd, 2); continue; }
    if (starts("||")) { push(Tok::kOr, 2); continue; }
    switch (c) {
      case '{': push(Tok::kLBrace, 1); continue;
      case '}': push(Tok::kRBrace, 1); continue;
      case '(': push(Tok::kLParen, 1); continue;
      case ')': push(Tok::kRParen, 1); continue;
      case ';': push(Tok::kSemi, 1); continue;
      case ':': push(Tok::kColon, 1); continue;
      case ',': push(Tok::kComma, 1); continue;
      case '!': case '~': push(Tok::kNot, 1); continue;
      case '&': push(Tok::kAnd, 1); continue;
      case '|': push(Tok::kOr, 1); continue;
      case '^': push(Tok::kXor, 1); continue;
      case '<': push(Tok::kLAngle, 1); continue;
      case '>': push(Tok::kRAngle, 1); continue;
      case '@': push(Tok::kAt, 1); continue;
      default: break;
    }
    throw ParseError(file, l, cl, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::kEnd, "", line, col});
  return out;
}

const char* describe(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kSemi: return "';'";
    case Tok::kColon: return "':'";
    case Tok::kComma: return "','";
    case Tok::kNot: return "'!'";
    case Tok::kAnd: return "'&'";
    case Tok::kOr: return "'|'";
    case Tok::kXor: return "'^'";
    case Tok::kImplies: return "'=>'";
    case Tok::kIff: return "'<=>'";
    case Tok::kLAngle: return "'<'";
    case Tok::kRAngle: return "'>'";
    case Tok::kAssign: return "':='";
    case Tok::kAt: return "'@'";
    case Tok::kEnd: return "end of input";
  }
  return "token";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)), file_(std::move(file)) {}

  SystemSpec parse_system() {
    declare();
    std::optional<int> declared_horizon;
    std::optional<std::size_t> spec_at;
    bool saw_init = false, saw_env = false;
    while (peek().kind != Tok::kEnd) {
      const Token& t = expect(Tok::kIdent);
      if (t.text == "vars") {
        expect(Tok::kColon);
        do {
          expect(Tok::kIdent);
        } while (accept(Tok::kComma));
        expect(Tok::kSemi);
      } else if (t.text == "horizon") {
        expect(Tok::kColon);
        const Token& n = expect(Tok::kNumber);
        int h = std::stoi(n.text);
        if (h < 0) fail(n, "horizon must be non-negative");
        if (declared_horizon) fail(t, "duplicate horizon");
        declared_horizon = h;
        expect(Tok::kSemi);
      } else if (t.text == "init") {
        if (saw_init) fail(t, "duplicate init");
        saw_init = true;
        expect(Tok::kColon);
        sys_.init = expr();
        expect(Tok::kSemi);
      } else if (t.text == "agent") {
        agent();
      } else if (t.text == "env") {
        if (saw_env) fail(t, "duplicate env block");
        saw_env = true;
        expect(Tok::kLBrace);
        while (peek().kind != Tok::kRBrace) {
          sys_.env.push_back(stmt());
          if (!accept(Tok::kSemi)) break;
        }
        expect(Tok::kRBrace);
      } else if (t.text == "spec") {
        if (spec_at) fail(t, "duplicate spec");
        expect(Tok::kColon);
        spec_at = pos_;
        skip_to_semi();
      } else {
        fail(t, "unknown section '" + t.text + "'");
      }
    }
    if (sys_.agents.empty()) fail(peek(), "no agents");

    std::size_t longest = 0;
    for (const auto& a : sys_.agents) longest = std::max(longest, a.actions.size());
    if (declared_horizon && static_cast<std::size_t>(*declared_horizon) < longest) {
      fail(toks_.front(), "horizon " + std::to_string(*declared_horizon) +
                              " is shorter than the longest protocol (" +
                              std::to_string(longest) + ")");
    }
    sys_.horizon = declared_horizon.value_or(static_cast<int>(longest));
    for (auto& a : sys_.agents) a.actions.resize(static_cast<std::size_t>(sys_.horizon));

    if (spec_at) {
      pos_ = *spec_at;
      Formula f = formula();
      int time = sys_.horizon;
      if (accept(Tok::kAt)) {
        const Token& n = expect(Tok::kNumber);
        time = std::stoi(n.text);
        if (time < 0 || time > sys_.horizon) {
          fail(n, "evaluation time " + n.text + " outside [0, " + std::to_string(sys_.horizon) + "]");
        }
      }
      expect(Tok::kSemi);
      sys_.spec_time = time;
      sys_.spec_untimed = f;
      stamp(f, time);
      sys_.spec = std::move(f);
    }
    return std::move(sys_);
  }

  // Formula parsing against an existing system.
  Formula parse_formula(const SystemSpec& sys, int default_time) {
    sys_ = sys;
    if (default_time < 0 || default_time > sys_.horizon) {
      fail(peek(), "default time " + std::to_string(default_time) + " outside [0, " +
                       std::to_string(sys_.horizon) + "]");
    }
    Formula f = formula();
    if (peek().kind != Tok::kEnd) fail(peek(), std::string("unexpected ") + describe(peek().kind));
    stamp(f, default_time);
    return f;
  }

 private:
  // Untimed atoms carry time -1 until stamped.
  void stamp(Formula& f, int time) {
    if (f.kind == Formula::Kind::kAtom && f.time < 0) f.time = time;
    for (Formula& k : f.kids) stamp(k, time);
  }

  // Collect declarations up front so sections may appear in any order.
  void declare() {
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      bool section_start = i == 0 || toks_[i - 1].kind == Tok::kSemi ||
                           toks_[i - 1].kind == Tok::kRBrace;
      if (!section_start || toks_[i].kind != Tok::kIdent) continue;
      if (toks_[i].text == "vars" && toks_[i + 1].kind == Tok::kColon) {
        for (std::size_t j = i + 2; j < toks_.size() && toks_[j].kind != Tok::kSemi; ++j) {
          if (toks_[j].kind != Tok::kIdent) continue;
          if (sys_.find_var(toks_[j].text)) fail(toks_[j], "duplicate variable '" + toks_[j].text + "'");
          if (is_keyword(toks_[j].text)) fail(toks_[j], "'" + toks_[j].text + "' is reserved");
          sys_.vars.push_back(toks_[j].text);
        }
      }
    }
  }

  static bool is_keyword(const std::string& s) {
    static const std::set<std::string> kw{"vars", "agent", "observes", "protocol", "env",
                                          "init", "spec", "horizon", "skip", "rand",
                                          "Knows", "K", "true", "false"};
    return kw.count(s) > 0;
  }

  void agent() {
    const Token& name = expect(Tok::kIdent);
    if (sys_.find_agent(name.text)) fail(name, "duplicate agent '" + name.text + "'");
    AgentProtocol a;
    a.name = name.text;
    expect(Tok::kLBrace);
    bool saw_obs = false, saw_proto = false;
    while (!accept(Tok::kRBrace)) {
      const Token& f = expect(Tok::kIdent);
      if (f.text == "observes") {
        if (saw_obs) fail(f, "duplicate observes");
        saw_obs = true;
        expect(Tok::kColon);
        if (peek().kind == Tok::kIdent) {
          do {
            a.observes.insert(var_ref(expect(Tok::kIdent)));
          } while (accept(Tok::kComma));
        }
        expect(Tok::kSemi);
      } else if (f.text == "protocol") {
        if (saw_proto) fail(f, "duplicate protocol");
        saw_proto = true;
        expect(Tok::kColon);
        while (peek().kind != Tok::kRBrace && !(peek().kind == Tok::kIdent &&
                                                 (peek().text == "observes" || peek().text == "protocol") &&
                                                 toks_[pos_ + 1].kind == Tok::kColon)) {
          a.actions.push_back(action());
          if (!accept(Tok::kSemi)) break;
        }
      } else {
        fail(f, "unknown agent field '" + f.text + "'");
      }
    }
    sys_.agents.push_back(std::move(a));
  }

  Action action() {
    if (peek().kind == Tok::kIdent && peek().text == "skip") {
      ++pos_;
      return Action{};
    }
    Action act;
    act.skip = false;
    if (accept(Tok::kLAngle)) {
      while (peek().kind != Tok::kRAngle) {
        act.code.push_back(stmt());
        if (!accept(Tok::kSemi)) break;
      }
      expect(Tok::kRAngle);
    } else {
      act.code.push_back(stmt());
    }
    return act;
  }

  Stmt stmt() {
    const Token& t = expect(Tok::kIdent);
    Stmt s;
    if (t.text == "rand") {
      expect(Tok::kLParen);
      s.kind = Stmt::Kind::kRand;
      s.target = var_ref(expect(Tok::kIdent));
      expect(Tok::kRParen);
      return s;
    }
    s.kind = Stmt::Kind::kAssign;
    s.target = var_ref(t);
    expect(Tok::kAssign);
    s.expr = expr();
    return s;
  }

  // Program expressions, loosest first: <=>, =>, |, ^, &, unary.
  Expr expr() { return expr_iff(); }
  Expr expr_iff() {
    Expr lhs = expr_implies();
    while (accept(Tok::kIff)) lhs = Expr::binary(Expr::Kind::kIff, std::move(lhs), expr_implies());
    return lhs;
  }
  Expr expr_implies() {
    Expr lhs = expr_or();
    if (accept(Tok::kImplies)) return Expr::binary(Expr::Kind::kImplies, std::move(lhs), expr_implies());
    return lhs;
  }
  Expr expr_or() {
    Expr lhs = expr_xor();
    while (accept(Tok::kOr)) lhs = Expr::binary(Expr::Kind::kOr, std::move(lhs), expr_xor());
    return lhs;
  }
  Expr expr_xor() {
    Expr lhs = expr_and();
    while (accept(Tok::kXor)) lhs = Expr::binary(Expr::Kind::kXor, std::move(lhs), expr_and());
    return lhs;
  }
  Expr expr_and() {
    Expr lhs = expr_unary();
    while (accept(Tok::kAnd)) lhs = Expr::binary(Expr::Kind::kAnd, std::move(lhs), expr_unary());
    return lhs;
  }
  Expr expr_unary() {
    if (accept(Tok::kNot)) return Expr::unary(Expr::Kind::kNot, expr_unary());
    if (accept(Tok::kLParen)) {
      Expr e = expr();
      expect(Tok::kRParen);
      return e;
    }
    const Token& t = peek();
    if (t.kind == Tok::kNumber && (t.text == "0" || t.text == "1")) {
      ++pos_;
      return Expr::constant(t.text == "1");
    }
    const Token& id = expect(Tok::kIdent);
    if (id.text == "true") return Expr::constant(true);
    if (id.text == "false") return Expr::constant(false);
    return Expr::variable(var_ref(id));
  }

  // Formulas share the operator table; derived connectives are desugared.
  Formula formula() { return f_iff(); }
  Formula f_iff() {
    Formula lhs = f_implies();
    while (accept(Tok::kIff)) {
      Formula rhs = f_implies();
      lhs = Formula::conj(Formula::implies(lhs, rhs), Formula::implies(rhs, lhs));
    }
    return lhs;
  }
  Formula f_implies() {
    Formula lhs = f_or();
    if (accept(Tok::kImplies)) return Formula::implies(std::move(lhs), f_implies());
    return lhs;
  }
  Formula f_or() {
    Formula lhs = f_xor();
    while (accept(Tok::kOr)) lhs = Formula::disj(std::move(lhs), f_xor());
    return lhs;
  }
  Formula f_xor() {
    Formula lhs = f_and();
    while (accept(Tok::kXor)) {
      Formula rhs = f_and();
      lhs = Formula::conj(Formula::disj(lhs, rhs), Formula::negate(Formula::conj(lhs, rhs)));
    }
    return lhs;
  }
  Formula f_and() {
    Formula lhs = f_unary();
    while (accept(Tok::kAnd)) lhs = Formula::conj(std::move(lhs), f_unary());
    return lhs;
  }
  Formula f_unary() {
    if (accept(Tok::kNot)) return Formula::negate(f_unary());
    if (accept(Tok::kLParen)) {
      Formula f = formula();
      expect(Tok::kRParen);
      return f;
    }
    const Token& id = expect(Tok::kIdent);
    if (id.text == "Knows" || id.text == "K") {
      const Token& who = expect(Tok::kIdent);
      auto agent = sys_.find_agent(who.text);
      if (!agent) fail(who, "unknown agent '" + who.text + "'");
      return Formula::knows(*agent, f_unary());
    }
    if (id.text == "true" || id.text == "false") {
      fail(id, "constants are not atoms of the logic; use p | !p");
    }
    Formula a = Formula::atom(var_ref(id), -1);
    if (accept(Tok::kAt)) {
      const Token& n = expect(Tok::kNumber);
      int t = std::stoi(n.text);
      if (t < 0 || t > sys_.horizon) {
        fail(n, "time index " + n.text + " outside [0, " + std::to_string(sys_.horizon) + "]");
      }
      a.time = t;
    }
    return a;
  }

  BaseVar var_ref(const Token& t) {
    if (is_keyword(t.text)) fail(t, "unexpected keyword '" + t.text + "'");
    auto v = sys_.find_var(t.text);
    if (!v) fail(t, "undeclared variable '" + t.text + "'");
    return *v;
  }

  void skip_to_semi() {
    while (peek().kind != Tok::kSemi && peek().kind != Tok::kEnd) ++pos_;
    expect(Tok::kSemi);
  }

  const Token& peek() const { return toks_[pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k) {
    if (peek().kind != k) {
      fail(peek(), std::string("expected ") + describe(k) + ", found " +
                       (peek().kind == Tok::kEnd ? std::string("end of input")
                                                 : "'" + peek().text + "'"));
    }
    return toks_[pos_++];
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(file_, t.line, t.col, msg);
  }

  std::vector<Token> toks_;
  std::string file_;
  std::size_t pos_ = 0;
  SystemSpec sys_;
};

void print(std::ostream& os, const Expr& e, const SystemSpec& sys) {
  auto bin = [&](const char* op) {
    os << '(';
    print(os, e.kids[0], sys);
    os << ' ' << op << ' ';
    print(os, e.kids[1], sys);
    os << ')';
  };
  switch (e.kind) {
    case Expr::Kind::kVar: os << sys.vars[e.var]; break;
    case Expr::Kind::kConst: os << (e.value ? "true" : "false"); break;
    case Expr::Kind::kNot: os << '!'; print(os, e.kids[0], sys); break;
    case Expr::Kind::kAnd: bin("&"); break;
    case Expr::Kind::kOr: bin("|"); break;
    case Expr::Kind::kXor: bin("^"); break;
    case Expr::Kind::kImplies: bin("=>"); break;
    case Expr::Kind::kIff: bin("<=>"); break;
  }
}

void print(std::ostream& os, const Formula& f, const SystemSpec& sys) {
  switch (f.kind) {
    case Formula::Kind::kAtom: os << sys.vars[f.var] << '@' << f.time; break;
    case Formula::Kind::kNot: os << '!'; print(os, f.kids[0], sys); break;
    case Formula::Kind::kAnd:
      os << '(';
      print(os, f.kids[0], sys);
      os << " & ";
      print(os, f.kids[1], sys);
      os << ')';
      break;
    case Formula::Kind::kKnows:
      os << "Knows " << sys.agents[f.agent].name << ' ';
      print(os, f.kids[0], sys);
      break;
  }
}

}  // namespace

SystemSpec parse_system(const std::string& text, const std::string& file) {
  Parser p(lex(text, file), file);
  return p.parse_system();
}

Formula parse_formula(const std::string& text, const SystemSpec& sys, int default_time) {
  Parser p(lex(text, "<formula>"), "<formula>");
  return p.parse_formula(sys, default_time);
}

Formula stamp_formula(Formula f, int time) {
  if (f.kind == Formula::Kind::kAtom && f.time < 0) f.time = time;
  for (Formula& k : f.kids) k = stamp_formula(std::move(k), time);
  return f;
}

std::string to_string(const Expr& e, const SystemSpec& sys) {
  std::ostringstream os;
  print(os, e, sys);
  return os.str();
}

std::string to_string(const Formula& f, const SystemSpec& sys) {
  std::ostringstream os;
  print(os, f, sys);
  return os.str();
}

std::set<std::pair<BaseVar, int>> atoms_of(const Formula& f) {
  std::set<std::pair<BaseVar, int>> out;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* g = stack.back();
    stack.pop_back();
    if (g->kind == Formula::Kind::kAtom) out.insert({g->var, g->time});
    for (const Formula& k : g->kids) stack.push_back(&k);
  }
  return out;
}

std::set<int> agents_of(const Formula& f) {
  std::set<int> out;
  if (f.kind == Formula::Kind::kKnows) out.insert(f.agent);
  for (const Formula& k : f.kids) {
    auto sub = agents_of(k);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

int knowledge_depth(const Formula& f) {
  int d = 0;
  for (const Formula& k : f.kids) d = std::max(d, knowledge_depth(k));
  return d + (f.kind == Formula::Kind::kKnows ? 1 : 0);
}

}  // namespace epik
