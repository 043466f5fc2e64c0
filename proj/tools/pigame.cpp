// Command-line front end: parse and reduce processes, translate them to
// strategies, step and explore the strategy board, compare by testing on
// both sides, cross-check the two semantics, and render plays.
//
// Exit codes (stable): 0 success / agreement / bisimilar; 1 the verdict is
// Distinguished or NotBisimilar (or the two semantics disagree on a test);
// 2 the verdict is Unknown (some budget ran out first); 3 input error (bad
// file, bad flag, parse or type error).

#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pigame/alphabet.hpp"
#include "pigame/moves.hpp"
#include "pigame/process.hpp"
#include "pigame/reduction.hpp"
#include "pigame/strategy.hpp"
#include "pigame/strategy_lts.hpp"

using nlohmann::ordered_json;
using namespace pigame;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

size_t default_budget() {
  if (const char* env = std::getenv("PIGAME_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<size_t>(v);
    throw InputError("PIGAME_BUDGET must be a positive integer");
  }
  return 100000;
}

// Bounds and output selection shared by the subcommands. Every report
// repeats the bounds that produced it: an agreement is always "up to k
// under this budget", never unconditional.
struct Bounds {
  int k = 1;
  size_t budget = 0;  // 0 = take the default (env or 100000)
  int depth = 64;
  std::string format = "text";

  size_t node_budget() const { return budget ? budget : default_budget(); }
};

void add_bounds(CLI::App* cmd, Bounds& b, bool with_k = true) {
  if (with_k)
    cmd->add_option("--k", b.k, "test size bound")->check(CLI::PositiveNumber);
  cmd->add_option("--budget", b.budget,
                  "node budget (default: PIGAME_BUDGET or 100000)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--depth", b.depth, "search depth bound for graph dumps")
      ->check(CLI::PositiveNumber);
}

void add_format(CLI::App* cmd, Bounds& b,
                const std::string& allowed = "text,json") {
  std::vector<std::string> opts;
  std::istringstream in(allowed);
  for (std::string w; std::getline(in, w, ',');) opts.push_back(w);
  cmd->add_option("--format", b.format, "output format")
      ->check(CLI::IsMember(opts));
}

ParseResult load_pi(const std::string& path) {
  std::string body = read_file(path);
  try {
    return parse_pi(body);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const TypeError& e) {
    throw InputError(path + ": " + e.what());
  }
}

// Definitions from two inputs run side by side, so their names must not
// collide; rename them apart in the files if they do.
DefTable merge_defs(const ParseResult& a, const ParseResult& b) {
  DefTable out = a.defs;
  for (const auto& [name, def] : b.defs.defs) {
    if (out.has(name))
      throw InputError("definition '" + name + "' appears in both inputs");
    out.defs.emplace(name, def);
  }
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::InBot:
      return "InBot";
    case Verdict::NotInBot:
      return "NotInBot";
    default:
      return "Unknown";
  }
}

void emit(const Bounds& b, const ordered_json& j, const std::string& text) {
  if (b.format == "json")
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

// ---- parse ------------------------------------------------------------

int cmd_parse(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  std::ostringstream text;
  text << "channels:";
  for (const std::string& n : r.chan_names) text << " " << n;
  text << "\nmain: " << pretty(r.main, r.chan_names) << "\n";
  ordered_json defs_json = ordered_json::object();
  for (const auto& [name, def] : r.defs.defs) {
    std::string body = pretty({def.body, def.ctx});
    text << "def " << name << "[" << def.ctx << "] = " << body << "\n";
    defs_json[name] = {{"ctx", def.ctx}, {"body", body}};
  }
  emit(b,
       {{"channels", r.main.ctx},
        {"names", r.chan_names},
        {"main", pretty(r.main, r.chan_names)},
        {"defs", defs_json}},
       text.str());
  return 0;
}

// ---- reduce -----------------------------------------------------------

int cmd_reduce(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  PiState start = normalize(r.main, r.defs);
  std::vector<PiState> states{start};
  std::map<std::string, int> index{{start.key, 0}};
  struct Edge {
    int src;
    std::string label;
    int dst;
  };
  std::vector<Edge> edges;
  std::deque<std::pair<int, int>> todo{{0, 0}};  // state, depth
  bool truncated = false;
  while (!todo.empty()) {
    auto [id, depth] = todo.front();
    todo.pop_front();
    if (depth >= b.depth) {
      truncated = true;
      continue;
    }
    for (const PiEdge& e : successors(states[id], r.defs)) {
      if (e.label == PiLabel::Id) continue;
      auto it = index.find(e.target.key);
      int tgt;
      if (it != index.end()) {
        tgt = it->second;
      } else if (states.size() >= b.node_budget()) {
        truncated = true;
        continue;
      } else {
        tgt = static_cast<int>(states.size());
        index.emplace(e.target.key, tgt);
        states.push_back(e.target);
        todo.emplace_back(tgt, depth + 1);
      }
      edges.push_back({id, e.label == PiLabel::Heart ? "heart" : "tau", tgt});
    }
  }
  std::ostringstream text;
  ordered_json j;
  j["states"] = states.size();
  j["complete"] = !truncated;
  j["budget"] = b.node_budget();
  j["depth"] = b.depth;
  text << "states: " << states.size()
       << (truncated ? " (truncated)" : " (complete)") << " budget="
       << b.node_budget() << " depth=" << b.depth << "\n";
  ordered_json jstates = ordered_json::array();
  for (size_t i = 0; i < states.size(); ++i) {
    std::string p = pretty(rebuild(states[i].canon));
    text << "s" << i << ": " << p << "\n";
    jstates.push_back(p);
  }
  ordered_json jedges = ordered_json::array();
  std::ostringstream dot;
  dot << "digraph reduction {\n";
  for (const Edge& e : edges) {
    text << "s" << e.src << " -" << e.label << "-> s" << e.dst << "\n";
    jedges.push_back({{"src", e.src}, {"label", e.label}, {"dst", e.dst}});
    dot << "  s" << e.src << " -> s" << e.dst << " [label=\"" << e.label
        << "\"];\n";
  }
  dot << "}\n";
  j["state_terms"] = jstates;
  j["edges"] = jedges;
  if (b.format == "dot") {
    std::cout << dot.str();
    return 0;
  }
  emit(b, j, text.str());
  return 0;
}

// ---- translate / step / explore ----------------------------------------

int cmd_translate(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  DefiniteStrategy d = translate(r.main, r.defs);
  std::ostringstream text;
  text << "arity: " << d.arity << "\n" << print_definite(d) << "\n";
  emit(b, {{"arity", d.arity}, {"strategy", print_definite(d)}}, text.str());
  return 0;
}

const char* sd_label_name(SDLabel l) {
  switch (l) {
    case SDLabel::Heart:
      return "heart";
    case SDLabel::Id:
      return "id";
    default:
      return "silent";
  }
}

ordered_json edge_json(const SDEdge& e) {
  ordered_json j;
  j["move"] = e.move.acting.empty() ? std::string("id")
                                    : e.move.seed.kind.str();
  j["acting"] = e.move.acting;
  j["summand"] = e.summand;
  j["pick"] = e.pick;
  j["label"] = sd_label_name(e.label);
  j["target"] = describe(e.target);
  return j;
}

void edge_text(std::ostream& out, const SDEdge& e) {
  out << (e.move.acting.empty() ? std::string("id") : e.move.seed.kind.str());
  out << " acting=[";
  for (size_t i = 0; i < e.move.acting.size(); ++i)
    out << (i ? "," : "") << e.move.acting[i];
  out << "] summand=[";
  for (size_t i = 0; i < e.summand.size(); ++i)
    out << (i ? "," : "") << e.summand[i];
  out << "] pick=[";
  for (size_t i = 0; i < e.pick.size(); ++i) out << (i ? "," : "") << e.pick[i];
  out << "] label=" << sd_label_name(e.label) << "\n  -> "
      << describe(e.target) << "\n";
}

int cmd_step(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  SDState s = translate_state(r.main, r.defs);
  std::vector<SDEdge> es = succ(s, r.defs);
  std::ostringstream text;
  text << "state: " << describe(s) << "\nedges: " << es.size() << "\n";
  ordered_json jedges = ordered_json::array();
  for (const SDEdge& e : es) {
    edge_text(text, e);
    jedges.push_back(edge_json(e));
  }
  emit(b, {{"state", describe(s)}, {"edges", jedges}}, text.str());
  return 0;
}

int cmd_explore(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  SDState start = condense(translate_state(r.main, r.defs));
  std::vector<SDState> states{start};
  std::map<std::string, int> index{{start.key, 0}};
  struct Edge {
    int src;
    std::string label;
    int dst;
  };
  std::vector<Edge> edges;
  std::deque<std::pair<int, int>> todo{{0, 0}};
  bool truncated = false;
  while (!todo.empty()) {
    auto [id, depth] = todo.front();
    todo.pop_front();
    if (depth >= b.depth) {
      truncated = true;
      continue;
    }
    for (const SDEdge& e : closed_world_succ(states[id], r.defs)) {
      if (e.label == SDLabel::Id) continue;
      SDState tgt_state = condense(e.target);
      auto it = index.find(tgt_state.key);
      int tgt;
      if (it != index.end()) {
        tgt = it->second;
      } else if (states.size() >= b.node_budget()) {
        truncated = true;
        continue;
      } else {
        tgt = static_cast<int>(states.size());
        index.emplace(tgt_state.key, tgt);
        states.push_back(tgt_state);
        todo.emplace_back(tgt, depth + 1);
      }
      edges.push_back({id,
                       e.label == SDLabel::Heart
                           ? "heart"
                           : e.move.seed.kind.str(),
                       tgt});
    }
  }
  BotResult fair = bot_d(start, r.defs, b.node_budget());
  std::ostringstream text;
  text << "states: " << states.size()
       << (truncated ? " (truncated)" : " (complete)") << " budget="
       << b.node_budget() << " depth=" << b.depth << "\n";
  ordered_json jstates = ordered_json::array();
  for (size_t i = 0; i < states.size(); ++i) {
    text << "s" << i << ": " << describe(states[i]) << "\n";
    jstates.push_back(describe(states[i]));
  }
  ordered_json jedges = ordered_json::array();
  std::ostringstream dot;
  dot << "digraph closed_world {\n";
  for (const Edge& e : edges) {
    text << "s" << e.src << " -" << e.label << "-> s" << e.dst << "\n";
    jedges.push_back({{"src", e.src}, {"label", e.label}, {"dst", e.dst}});
    dot << "  s" << e.src << " -> s" << e.dst << " [label=\"" << e.label
        << "\"];\n";
  }
  dot << "}\n";
  text << "fair-success: " << verdict_name(fair.verdict)
       << " explored=" << fair.explored << "\n";
  if (b.format == "dot") {
    std::cout << dot.str();
    return 0;
  }
  emit(b,
       {{"states", states.size()},
        {"complete", !truncated},
        {"budget", b.node_budget()},
        {"depth", b.depth},
        {"state_descriptions", jstates},
        {"edges", jedges},
        {"fair_success", verdict_name(fair.verdict)},
        {"fair_explored", fair.explored}},
       text.str());
  return 0;
}

// ---- testing comparisons ------------------------------------------------

template <typename R>
int report_fair(const R& res, const Bounds& b, const char* side) {
  std::ostringstream text;
  ordered_json j;
  const char* kind = res.kind == R::Kind::Distinguished ? "Distinguished"
                     : res.kind == R::Kind::AgreeUpTo   ? "AgreeUpTo"
                                                        : "Unknown";
  j["side"] = side;
  j["verdict"] = kind;
  j["k"] = res.k;
  j["tests_run"] = res.tests_run;
  j["budget"] = b.node_budget();
  text << "verdict: " << kind << " k=" << res.k
       << " tests=" << res.tests_run << " budget=" << b.node_budget() << "\n";
  if (res.test) {
    j["test"] = res.test->label;
    j["left"] = verdict_name(res.left);
    j["right"] = verdict_name(res.right);
    text << "test: " << res.test->label << "\nleft: " << verdict_name(res.left)
         << "  right: " << verdict_name(res.right) << "\n";
  }
  emit(b, j, text.str());
  switch (res.kind) {
    case R::Kind::AgreeUpTo:
      return 0;
    case R::Kind::Distinguished:
      return 1;
    default:
      return 2;
  }
}

int cmd_check_fair_pi(const std::string& pp, const std::string& qp,
                      const Bounds& b) {
  ParseResult p = load_pi(pp), q = load_pi(qp);
  DefTable defs = merge_defs(p, q);
  FairResult res = fair_equiv_pi(p.main, q.main, b.k, b.node_budget(), defs);
  return report_fair(res, b, "pi");
}

int cmd_check_fair_sd(const std::string& pp, const std::string& qp,
                      const Bounds& b) {
  ParseResult p = load_pi(pp), q = load_pi(qp);
  DefTable defs = merge_defs(p, q);
  SDFairResult res = fair_equiv_d(translate_state(p.main, defs),
                                  translate_state(q.main, defs), b.k,
                                  b.node_budget(), defs);
  return report_fair(res, b, "sd");
}

int cmd_check_theorem1(const std::string& pp, const std::string& qp,
                       const Bounds& b) {
  ParseResult p = load_pi(pp), q = load_pi(qp);
  DefTable defs = merge_defs(p, q);
  if (p.main.ctx != q.main.ctx)
    throw InputError("compared processes must declare the same channels");
  std::vector<PiTest> pi_tests = enumerate_tests(p.main.ctx, b.k);
  std::vector<SemTest> sem_tests = enumerate_sem_tests(p.main.ctx, b.k);
  if (pi_tests.size() != sem_tests.size())
    throw InputError("test enumerations out of step; rebuild the tool");
  SDState sp = translate_state(p.main, defs);
  SDState sq = translate_state(q.main, defs);
  size_t budget = b.node_budget();
  size_t mismatches = 0, unknowns = 0, agreements = 0;
  ordered_json jtests = ordered_json::array();
  std::ostringstream detail;
  for (size_t i = 0; i < pi_tests.size(); ++i) {
    Verdict ppi = passes(p.main, pi_tests[i], defs, budget);
    Verdict qpi = passes(q.main, pi_tests[i], defs, budget);
    Verdict psd = passes_d(sp, sem_tests[i], defs, budget);
    Verdict qsd = passes_d(sq, sem_tests[i], defs, budget);
    bool unknown = ppi == Verdict::Unknown || qpi == Verdict::Unknown ||
                   psd == Verdict::Unknown || qsd == Verdict::Unknown;
    bool mismatch = !unknown && (ppi != psd || qpi != qsd);
    if (unknown)
      ++unknowns;
    else if (mismatch)
      ++mismatches;
    else
      ++agreements;
    jtests.push_back({{"test", pi_tests[i].label},
                      {"p_pi", verdict_name(ppi)},
                      {"p_sd", verdict_name(psd)},
                      {"q_pi", verdict_name(qpi)},
                      {"q_sd", verdict_name(qsd)},
                      {"status", unknown    ? "unknown"
                                 : mismatch ? "MISMATCH"
                                            : "agree"}});
    if (mismatch)
      detail << "MISMATCH " << pi_tests[i].label << ": P pi/sd "
             << verdict_name(ppi) << "/" << verdict_name(psd) << ", Q pi/sd "
             << verdict_name(qpi) << "/" << verdict_name(qsd) << "\n";
  }
  FairResult fpi = fair_equiv_pi(p.main, q.main, b.k, budget, defs);
  SDFairResult fsd = fair_equiv_d(sp, sq, b.k, budget, defs);
  auto kind_name = [](auto k, auto dist, auto agree) {
    return k == dist ? "Distinguished" : k == agree ? "AgreeUpTo" : "Unknown";
  };
  const char* pi_kind = kind_name(fpi.kind, FairResult::Kind::Distinguished,
                                  FairResult::Kind::AgreeUpTo);
  const char* sd_kind = kind_name(fsd.kind, SDFairResult::Kind::Distinguished,
                                  SDFairResult::Kind::AgreeUpTo);
  std::ostringstream text;
  text << "tests: " << pi_tests.size() << " k=" << b.k
       << " budget=" << budget << "\n"
       << "agree: " << agreements << "  unknown: " << unknowns
       << "  mismatch: " << mismatches << "\n"
       << detail.str() << "pi: " << pi_kind << "  sd: " << sd_kind << "\n";
  bool distinguished = fpi.kind == FairResult::Kind::Distinguished ||
                       fsd.kind == SDFairResult::Kind::Distinguished;
  std::string verdict = mismatches > 0 ? "SidesDisagree"
                        : distinguished ? "Distinguished"
                        : (fpi.kind == FairResult::Kind::AgreeUpTo &&
                           fsd.kind == SDFairResult::Kind::AgreeUpTo)
                            ? "AgreeUpTo"
                            : "Unknown";
  text << "verdict: " << verdict << " k=" << b.k << "\n";
  emit(b,
       {{"tests", pi_tests.size()},
        {"k", b.k},
        {"budget", budget},
        {"agree", agreements},
        {"unknown", unknowns},
        {"mismatch", mismatches},
        {"pi", pi_kind},
        {"sd", sd_kind},
        {"verdict", verdict},
        {"per_test", jtests}},
       text.str());
  if (mismatches > 0 || distinguished) return 1;
  return verdict == "AgreeUpTo" ? 0 : 2;
}

// ---- bisim-a -------------------------------------------------------------

int cmd_bisim_a(const std::string& path, const Bounds& b) {
  ParseResult r = load_pi(path);
  AVertex iface;
  iface.delta = r.main.ctx;
  iface.gamma = r.main.ctx;
  for (int i = 1; i <= r.main.ctx; ++i) iface.h.push_back(i);
  PiState start = normalize(r.main, r.defs);
  auto lp = project_pi(start, r.defs, iface);
  auto ls = project_sd(translate_state(rebuild(start.canon), r.defs), r.defs,
                       iface);
  BisimResult res = weak_bisim(*lp, *ls, b.node_budget());
  const char* kind = res.kind == BisimResult::Kind::Bisimilar ? "Bisimilar"
                     : res.kind == BisimResult::Kind::NotBisimilar
                         ? "NotBisimilar"
                         : "Unknown";
  std::ostringstream text;
  text << "verdict: " << kind << " explored=" << res.explored
       << " budget=" << b.node_budget() << "\n";
  ordered_json j{{"verdict", kind},
                 {"explored", res.explored},
                 {"budget", b.node_budget()}};
  if (!res.witness.empty()) {
    text << "witness: " << res.witness << "\n";
    j["witness"] = res.witness;
  }
  emit(b, j, text.str());
  switch (res.kind) {
    case BisimResult::Kind::Bisimilar:
      return 0;
    case BisimResult::Kind::NotBisimilar:
      return 1;
    default:
      return 2;
  }
}

// ---- render ---------------------------------------------------------------

int cmd_render(const std::string& path, const Bounds& b) {
  std::string body = read_file(path);
  Play play;
  try {
    play = parse_play(body);
  } catch (const ShapeError& e) {
    throw InputError(path + ": " + e.what());
  }
  if (b.format == "text") {
    std::cout << trace(play);
    return 0;
  }
  std::cout << to_dot(play);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pi-calculus game-semantics workbench"};
  app.require_subcommand(1);

  Bounds b;
  std::string file, file2;

  CLI::App* c_parse = app.add_subcommand("parse", "echo the numbered form");
  c_parse->add_option("file", file)->required();
  add_format(c_parse, b);

  CLI::App* c_reduce =
      app.add_subcommand("reduce", "dump the reduction graph");
  c_reduce->add_option("file", file)->required();
  add_bounds(c_reduce, b, false);
  add_format(c_reduce, b, "text,json,dot");

  CLI::App* c_translate =
      app.add_subcommand("translate", "print the strategy of a process");
  c_translate->add_option("file", file)->required();
  add_format(c_translate, b);

  CLI::App* c_step =
      app.add_subcommand("step", "one-step successors on the strategy board");
  c_step->add_option("file", file)->required();
  add_format(c_step, b);

  CLI::App* c_explore = app.add_subcommand(
      "explore", "closed-world reachability on the strategy board");
  c_explore->add_option("file", file)->required();
  add_bounds(c_explore, b, false);
  add_format(c_explore, b, "text,json,dot");

  CLI::App* c_cfp = app.add_subcommand(
      "check-fair-pi", "compare two processes by reduction-side testing");
  c_cfp->add_option("p", file)->required();
  c_cfp->add_option("q", file2)->required();
  add_bounds(c_cfp, b);
  add_format(c_cfp, b);

  CLI::App* c_cfs = app.add_subcommand(
      "check-fair-sd", "compare two processes by strategy-side testing");
  c_cfs->add_option("p", file)->required();
  c_cfs->add_option("q", file2)->required();
  add_bounds(c_cfs, b);
  add_format(c_cfs, b);

  CLI::App* c_thm = app.add_subcommand(
      "check-theorem1",
      "cross-compare the two testing semantics on a pair of processes");
  c_thm->add_option("p", file)->required();
  c_thm->add_option("q", file2)->required();
  add_bounds(c_thm, b);
  add_format(c_thm, b);

  CLI::App* c_bisim = app.add_subcommand(
      "bisim-a", "weak bisimilarity of the two A-projections of one process");
  c_bisim->add_option("file", file)->required();
  add_bounds(c_bisim, b, false);
  add_format(c_bisim, b);

  CLI::App* c_render = app.add_subcommand("render", "render a play");
  c_render->add_option("file", file)->required();
  std::string render_format = "dot";
  c_render->add_option("--format", render_format, "output format")
      ->check(CLI::IsMember(std::vector<std::string>{"dot", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;  // --help exits 0; usage errors are input errors
  }

  try {
    if (c_parse->parsed()) return cmd_parse(file, b);
    if (c_reduce->parsed()) return cmd_reduce(file, b);
    if (c_translate->parsed()) return cmd_translate(file, b);
    if (c_step->parsed()) return cmd_step(file, b);
    if (c_explore->parsed()) return cmd_explore(file, b);
    if (c_cfp->parsed()) return cmd_check_fair_pi(file, file2, b);
    if (c_cfs->parsed()) return cmd_check_fair_sd(file, file2, b);
    if (c_thm->parsed()) return cmd_check_theorem1(file, file2, b);
    if (c_bisim->parsed()) return cmd_bisim_a(file, b);
    if (c_render->parsed()) {
      Bounds rb = b;
      rb.format = render_format;
      return cmd_render(file, rb);
    }
  } catch (const std::runtime_error& e) {
    // input, parse, type, shape, and unfold-limit problems all land here
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
