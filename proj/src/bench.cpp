#include "epik/bench.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace epik {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string idx(const std::string& base, int i) { return base + std::to_string(i); }

// Text of an agent block.
std::string agent_block(const std::string& name, const std::vector<std::string>& observes,
                        const std::vector<std::string>& actions) {
  std::ostringstream os;
  os << "agent " << name << " {\n  observes: " << join(observes, ", ") << ";\n";
  if (!actions.empty()) os << "  protocol: " << join(actions, "; ") << ";\n";
  os << "}\n";
  return os.str();
}

std::string atomic(const std::vector<std::string>& stmts) {
  if (stmts.empty()) return "skip";
  if (stmts.size() == 1) return stmts[0];
  return "< " + join(stmts, "; ") + " >";
}

std::string zeroes(const std::vector<std::string>& vars) {
  std::vector<std::string> lits;
  for (const auto& v : vars) lits.push_back("!" + v);
  return join(lits, " & ");
}

std::string finish(std::string body, const std::string& main, int time) {
  return body + "spec: " + main + " @ " + std::to_string(time) + ";\n";
}

// Dining cryptographers on a ring of n.
BenchInstance dc(int n) {
  if (n < 2) throw std::invalid_argument("dc needs at least 2 agents");
  std::vector<std::string> vars, says;
  for (const char* b : {"paid", "coin", "left", "say"}) {
    for (int i = 0; i < n; ++i) vars.push_back(idx(b, i));
  }
  for (int i = 0; i < n; ++i) says.push_back(idx("say", i));
  std::vector<std::string> at_most_one;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) at_most_one.push_back("!(paid" + std::to_string(i) + " & paid" + std::to_string(j) + ")");
  }
  std::ostringstream os;
  os << "# dining cryptographers, " << n << " agents\n";
  os << "vars: " << join(vars, ", ") << ";\n";
  os << "init: " << join(at_most_one, " & ") << ";\n";
  for (int i = 0; i < n; ++i) {
    std::string s = std::to_string(i), next = std::to_string((i + 1) % n);
    std::vector<std::string> obs{"paid" + s, "coin" + s, "left" + s};
    obs.insert(obs.end(), says.begin(), says.end());
    os << agent_block("C" + s, obs,
                      {"rand(coin" + s + ")", "left" + next + " := coin" + s,
                       "say" + s + " := paid" + s + " ^ coin" + s + " ^ left" + s});
  }
  os << "horizon: 3;\n";

  std::vector<std::string> none, some, not_each;
  for (int j = 1; j < n; ++j) {
    none.push_back("!paid" + std::to_string(j));
    some.push_back("paid" + std::to_string(j));
    not_each.push_back("!Knows C0 paid" + std::to_string(j));
  }
  auto phi = [&](const std::string& inner) {
    return "!paid0 => Knows C0 (" + join(none, " & ") + ") | (Knows C0 (" + inner + ") & " +
           join(not_each, " & ") + ")";
  };
  BenchInstance inst{"dc", n, "", {}};
  inst.formulas["main"] = phi(join(some, " | "));
  // As printed in the original write-up, with the repeated disjunct.
  inst.formulas["verbatim"] = phi("paid1 | paid1");
  inst.model = finish(os.str(), inst.formulas["main"], 3);
  return inst;
}

// One-time pad over n bits, two steps per bit; Eve taps the wire.
BenchInstance otp(int n) {
  if (n < 1) throw std::invalid_argument("otp needs at least 1 bit");
  std::vector<std::string> ms, ks, bs;
  for (int j = 0; j < n; ++j) {
    ms.push_back(idx("m", j));
    ks.push_back(idx("k", j));
    bs.push_back(idx("b", j));
  }
  std::vector<std::string> vars = ms;
  vars.insert(vars.end(), ks.begin(), ks.end());
  vars.push_back("wire");
  vars.insert(vars.end(), bs.begin(), bs.end());
  std::vector<std::string> zero{"wire"};
  zero.insert(zero.end(), bs.begin(), bs.end());

  std::vector<std::string> alice, bob;
  for (int j = 0; j < n; ++j) {
    alice.push_back("wire := " + ms[j] + " ^ " + ks[j]);
    alice.push_back("skip");
    bob.push_back("skip");
    bob.push_back(bs[j] + " := wire ^ " + ks[j]);
  }
  std::vector<std::string> aobs = ms, bobs = ks;
  aobs.insert(aobs.end(), ks.begin(), ks.end());
  aobs.push_back("wire");
  bobs.push_back("wire");
  bobs.insert(bobs.end(), bs.begin(), bs.end());

  std::ostringstream os;
  os << "# one-time pad, " << n << " bits\n";
  os << "vars: " << join(vars, ", ") << ";\n";
  os << "init: " << zeroes(zero) << ";\n";
  os << agent_block("Alice", aobs, alice) << agent_block("Bob", bobs, bob)
     << agent_block("Eve", {"wire"}, {});
  os << "horizon: " << 2 * n << ";\n";
  BenchInstance inst{"otp", n, "", {}};
  inst.formulas["main"] = "!Knows Eve m0 & !Knows Eve !m0";
  inst.model = finish(os.str(), inst.formulas["main"], 2 * n);
  return inst;
}

// Rivest's oblivious transfer with initializer randomness, n-bit messages.
BenchInstance rivest(int n) {
  if (n < 1) throw std::invalid_argument("rivest_ot needs at least 1 bit");
  std::vector<std::string> vars, zero;
  auto bits = [&](const char* base) {
    std::vector<std::string> v;
    for (int j = 0; j < n; ++j) v.push_back(std::string(base) + "_" + std::to_string(j));
    return v;
  };
  auto m0 = bits("m0"), m1 = bits("m1"), r0 = bits("r0"), r1 = bits("r1"), rd = bits("rd"),
       f0 = bits("f0"), f1 = bits("f1"), out = bits("out");
  for (auto* group : {&m0, &m1, &r0, &r1, &rd, &f0, &f1, &out}) {
    vars.insert(vars.end(), group->begin(), group->end());
    if (group != &m0 && group != &m1) zero.insert(zero.end(), group->begin(), group->end());
  }
  for (const char* v : {"c", "d", "e"}) vars.push_back(v);
  zero.push_back("d");
  zero.push_back("e");

  std::vector<std::string> draw, send, pick, recv;
  for (int j = 0; j < n; ++j) {
    draw.push_back("rand(" + r0[j] + ")");
    draw.push_back("rand(" + r1[j] + ")");
    send.push_back(f0[j] + " := " + m0[j] + " ^ ((e & " + r1[j] + ") | (!e & " + r0[j] + "))");
    send.push_back(f1[j] + " := " + m1[j] + " ^ ((e & " + r0[j] + ") | (!e & " + r1[j] + "))");
    pick.push_back(rd[j] + " := (d & " + r1[j] + ") | (!d & " + r0[j] + ")");
    recv.push_back(out[j] + " := ((c & " + f1[j] + ") | (!c & " + f0[j] + ")) ^ " + rd[j]);
  }
  pick.insert(pick.begin(), "rand(d)");

  std::vector<std::string> aobs;
  for (auto* group : {&m0, &m1, &r0, &r1, &f0, &f1}) aobs.insert(aobs.end(), group->begin(), group->end());
  aobs.push_back("e");
  std::vector<std::string> bobs{"c", "d", "e"};
  for (auto* group : {&rd, &f0, &f1, &out}) bobs.insert(bobs.end(), group->begin(), group->end());

  std::ostringstream os;
  os << "# Rivest oblivious transfer, " << n << "-bit messages\n";
  os << "vars: " << join(vars, ", ") << ";\n";
  os << "init: " << zeroes(zero) << ";\n";
  os << agent_block("Alice", aobs, {atomic(draw), "skip", atomic(send)});
  os << agent_block("Bob", bobs, {atomic(pick), "e := c ^ d", atomic(recv)});
  os << "horizon: 3;\n";

  std::vector<std::string> each;
  for (int j = 0; j < n; ++j) each.push_back("!Knows Bob " + m0[j] + " & !Knows Bob !" + m0[j]);
  BenchInstance inst{"rivest_ot", n, "", {}};
  inst.formulas["main"] = "c => (!Knows Bob m0_0 & !Knows Bob !m0_0)";
  inst.formulas["all_bits"] = "c => (" + join(each, " & ") + ")";
  inst.model = finish(os.str(), inst.formulas["main"], 3);
  return inst;
}

// A single bit delivered with delay at most n.
BenchInstance msg_transmission(int n) {
  if (n < 1) throw std::invalid_argument("msg_transmission needs delay at least 1");
  std::vector<std::string> vars{"m", "rcvd", "rm"}, zero{"rcvd", "rm"};
  std::vector<std::string> alice;
  for (int t = 1; t <= n; ++t) {
    std::string x = idx("x", t);
    vars.push_back(x);
    zero.push_back(x);
    alice.push_back(atomic({"rand(" + x + ")", "rcvd := rcvd | " + x, "rm := rcvd & m"}));
  }
  alice.push_back(atomic({"rcvd := true", "rm := m"}));
  std::ostringstream os;
  os << "# message transmission, delay up to " << n << "\n";
  os << "vars: " << join(vars, ", ") << ";\n";
  os << "init: " << zeroes(zero) << ";\n";
  os << agent_block("Alice", {"m"}, alice) << agent_block("Bob", {"rcvd", "rm"}, {});
  os << "horizon: " << n + 1 << ";\n";
  BenchInstance inst{"msg_transmission", n, "", {}};
  inst.formulas["main"] = "Knows Alice Knows Bob Knows Alice Knows Bob Knows Alice rcvd";
  inst.model = finish(os.str(), inst.formulas["main"], n + 1);
  return inst;
}

// Chaum's two-phase anonymous broadcast: n booking rounds then n slot
// rounds of dining cryptographers. Pairwise keys are drawn once; the
// environment publishes the xor of the announcements each tick.
BenchInstance chaum(int n) {
  if (n < 2) throw std::invalid_argument("chaum2p needs at least 2 agents");
  auto pick = [](int i, int k) { return "pick" + std::to_string(i) + "_" + std::to_string(k); };
  auto key = [&](int i) { return idx("key", (i + n) % n); };
  // What A0 itself put into slot k; the rest of the slot's parity came from others.
  auto own = [&](int k) { return "(" + pick(0, k) + " & ok0 & msg0)"; };
  std::vector<std::string> vars, zero, init;
  for (int i = 0; i < n; ++i) {
    vars.push_back(idx("want", i));
    vars.push_back(idx("msg", i));
    std::vector<std::string> picks;
    for (int k = 0; k < n; ++k) {
      vars.push_back(pick(i, k));
      picks.push_back(pick(i, k));
      for (int l = k + 1; l < n; ++l) init.push_back("!(" + pick(i, k) + " & " + pick(i, l) + ")");
    }
    init.push_back("(want" + std::to_string(i) + " <=> (" + join(picks, " | ") + "))");
    for (const char* b : {"key", "say", "ok"}) {
      vars.push_back(idx(b, i));
      zero.push_back(idx(b, i));
    }
  }
  for (const char* v : {"res", "rcvd1"}) {
    vars.push_back(v);
    zero.push_back(v);
  }
  init.push_back(zeroes(zero));

  std::vector<std::string> says;
  for (int i = 0; i < n; ++i) says.push_back(idx("say", i));
  std::ostringstream os;
  os << "# Chaum two-phase protocol, " << n << " agents\n";
  os << "vars: " << join(vars, ", ") << ";\n";
  os << "init: " << join(init, " & ") << ";\n";
  for (int i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    std::string mask = " ^ " + key(i) + " ^ " + key(i - 1);
    std::vector<std::string> acts{"rand(key" + s + ")"};
    for (int k = 0; k < n; ++k) {
      std::vector<std::string> st;
      if (k > 0) st.push_back("ok" + s + " := ok" + s + " | (" + pick(i, k - 1) + " & res)");
      st.push_back("say" + s + " := " + pick(i, k) + mask);
      acts.push_back(atomic(st));
    }
    for (int k = 0; k < n; ++k) {
      std::vector<std::string> st;
      if (k == 0) st.push_back("ok" + s + " := ok" + s + " | (" + pick(i, n - 1) + " & res)");
      if (i == 0 && k > 0) st.push_back("rcvd1 := rcvd1 | (res ^ " + own(k - 1) + ")");
      st.push_back("say" + s + " := (" + pick(i, k) + " & ok" + s + " & msg" + s + ")" + mask);
      acts.push_back(atomic(st));
    }
    if (i == 0) acts.push_back("rcvd1 := rcvd1 | (res ^ " + own(n - 1) + ")");
    std::vector<std::string> obs{"want" + s, "msg" + s};
    for (int k = 0; k < n; ++k) obs.push_back(pick(i, k));
    obs.push_back(key(i));
    if (key(i - 1) != key(i)) obs.push_back(key(i - 1));
    for (const std::string& v : {"say" + s, "ok" + s, std::string("res")}) obs.push_back(v);
    if (i == 0) obs.push_back("rcvd1");
    os << agent_block(idx("A", i), obs, acts);
  }
  os << "env { res := " << join(says, " ^ ") << " }\n";
  os << "horizon: " << 2 * n + 2 << ";\n";

  std::vector<std::string> senders;
  for (int j = 1; j < n; ++j) senders.push_back("(want" + std::to_string(j) + " & msg" + std::to_string(j) + ")");
  BenchInstance inst{"chaum2p", n, "", {}};
  inst.formulas["main"] = "rcvd1 <=> Knows A0 (" + join(senders, " | ") + ")";
  inst.model = finish(os.str(), inst.formulas["main"], 2 * n + 2);
  return inst;
}

std::string verdict_of(const CheckResult& r) { return r.verdict.valid ? "VALID" : "FAILS"; }

BenchRecord run_inline(const BenchInstance& inst, const std::string& formula, int level,
                       const BenchOptions& opts) {
  BenchRecord rec;
  rec.family = inst.family;
  rec.n = inst.n;
  rec.level = level;
  rec.formula = formula;
  rec.stats.level = level;
  auto start = std::chrono::steady_clock::now();
  try {
    SystemSpec sys = parse_system(inst.model, inst.family + std::to_string(inst.n));
    auto it = inst.formulas.find(formula);
    if (it == inst.formulas.end()) throw std::invalid_argument("unknown formula " + formula);
    Formula f = parse_formula(it->second, sys, sys.spec_time);
    CheckOptions co;
    co.level = level;
    co.enumerate = opts.enumerate;
    CheckResult r = check_system(sys, f, co);
    rec.verdict = verdict_of(r);
    rec.stats = r.stats;
  } catch (const OverflowError& e) {
    rec.verdict = "OVERFLOW";
    rec.error = e.what();
  } catch (const std::bad_alloc&) {
    rec.verdict = "OVERFLOW";
    rec.error = "out of memory";
  } catch (const std::exception& e) {
    rec.verdict = "ERROR";
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

BenchRecord from_json(const std::string& line) {
  auto j = nlohmann::ordered_json::parse(line);
  BenchRecord r;
  r.family = j.at("family");
  r.n = j.at("n");
  r.level = j.at("level");
  r.formula = j.at("formula");
  r.verdict = j.at("verdict");
  r.timeout = j.at("timeout");
  r.wall_ms = j.at("wall_ms");
  r.error = j.value("error", "");
  r.stats.level = r.level;
  r.stats.vars_raw = j.at("vars_raw");
  r.stats.vars_merged = j.at("vars_merged");
  r.stats.vars_kappa = j.at("vars_kappa");
  r.stats.vars_pruned = j.at("vars_pruned");
  r.stats.order_length = j.at("order_length");
  r.stats.max_intermediate_tuples = j.at("max_intermediate_tuples");
  r.stats.worlds_final = j.at("worlds_final");
  for (auto& [k, v] : j.at("stage_ms").items()) r.stats.stage_ms.emplace_back(k, v.get<double>());
  return r;
}

}  // namespace

const std::vector<std::string>& bench_families() {
  static const std::vector<std::string> f{"dc", "otp", "rivest_ot", "msg_transmission", "chaum2p"};
  return f;
}

BenchInstance generate_instance(const std::string& family, int n) {
  if (family == "dc") return dc(n);
  if (family == "otp") return otp(n);
  if (family == "rivest_ot") return rivest(n);
  if (family == "msg_transmission") return msg_transmission(n);
  if (family == "chaum2p") return chaum(n);
  throw std::invalid_argument("unknown family '" + family + "'");
}

std::string bench_json(const BenchRecord& r) {
  nlohmann::ordered_json j;
  j["family"] = r.family;
  j["n"] = r.n;
  j["level"] = r.level;
  j["formula"] = r.formula;
  j["verdict"] = r.verdict;
  j["timeout"] = r.timeout;
  j["wall_ms"] = r.wall_ms;
  auto stats = nlohmann::ordered_json::parse(stats_json(r.stats));
  for (auto& [k, v] : stats.items()) {
    if (k != "level") j[k] = v;
  }
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

BenchRecord run_instance(const BenchInstance& inst, const std::string& formula, int level,
                         const BenchOptions& opts) {
  if (opts.timeout_sec <= 0) return run_inline(inst, formula, level, opts);

  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error("pipe failed");
  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    close(fds[0]);
    std::string line = bench_json(run_inline(inst, formula, level, opts)) + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
      ssize_t w = write(fds[1], line.data() + off, line.size() - off);
      if (w <= 0) break;
      off += static_cast<std::size_t>(w);
    }
    close(fds[1]);
    _exit(0);
  }
  close(fds[1]);
  std::string buf;
  bool timed_out = false;
  for (;;) {
    double left_ms = opts.timeout_sec * 1000 -
                     std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (left_ms <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int ready = poll(&p, 1, static_cast<int>(std::min(left_ms, 1000.0)) + 1);
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    char chunk[4096];
    ssize_t got = read(fds[0], chunk, sizeof chunk);
    if (got <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(got));
  }
  close(fds[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);

  BenchRecord rec;
  if (!timed_out && !buf.empty()) {
    rec = from_json(buf);
  } else {
    rec.family = inst.family;
    rec.n = inst.n;
    rec.level = level;
    rec.formula = formula;
    rec.stats.level = level;
    rec.timeout = timed_out;
    rec.verdict = timed_out ? "TIMEOUT" : "ERROR";
    if (!timed_out) rec.error = "check process died";
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

}  // namespace epik
