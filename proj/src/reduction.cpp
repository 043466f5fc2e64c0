#include "pigame/reduction.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace pigame {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::InBot: return "InBot";
    case Verdict::NotInBot: return "NotInBot";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

// Flat form of a term: prenex restrictions plus a list of guarded-sum
// components, with every top-level call expanded. Components are typed in
// ctx + nus.
struct Flat {
  int ctx = 0;
  int nus = 0;
  std::vector<ProcessPtr> comps;
};

constexpr int kUnfoldCap = 256;

void flat_walk(const ProcessPtr& p, const Renaming& h, const DefTable& defs,
               Flat& out, std::vector<std::pair<ProcessPtr, Renaming>>& raw,
               int fuel) {
  switch (p->kind) {
    case Process::Kind::Sum:
      if (!p->branches.empty()) raw.push_back({p, h});
      return;
    case Process::Kind::Par:
      flat_walk(p->left, h, defs, out, raw, fuel);
      flat_walk(p->right, h, defs, out, raw, fuel);
      return;
    case Process::Kind::Nu: {
      int lvl = out.ctx + ++out.nus;
      Renaming h2 = h;
      h2.source += 1;
      h2.map.push_back(lvl);
      // target is provisional; bumped to the final count afterwards
      h2.target = std::max(h2.target, lvl);
      flat_walk(p->body, h2, defs, out, raw, fuel);
      return;
    }
    case Process::Kind::Call: {
      if (fuel <= 0)
        throw UnfoldLimit("definition keeps growing under expansion: " +
                          p->callee);
      const Definition& d = defs.at(p->callee);
      flat_walk(rename(d.body, p->call_rn), h, defs, out, raw, fuel - 1);
      return;
    }
  }
}

Flat flatten(const TypedProcess& tp, const DefTable& defs) {
  Flat out;
  out.ctx = tp.ctx;
  std::vector<std::pair<ProcessPtr, Renaming>> raw;
  flat_walk(tp.proc, Renaming::identity(tp.ctx), defs, out, raw, kUnfoldCap);
  int total = out.ctx + out.nus;
  for (auto& [term, h] : raw) {
    Renaming h2 = h;
    h2.target = total;
    out.comps.push_back(rename(term, h2));
  }
  return out;
}

TypedProcess rebuild_flat(const Flat& f) {
  CanonTerm c{f.ctx, f.nus, f.comps};
  return rebuild(c);
}

}  // namespace

PiState normalize(const TypedProcess& p, const DefTable& defs) {
  Flat f = flatten(p, defs);
  CanonTerm c = canon_term(rebuild_flat(f), defs);
  std::string key = std::to_string(c.ctx) + "#" + encode(rebuild(c).proc);
  return PiState{std::move(c), std::move(key)};
}

std::vector<PiEdge> successors(const PiState& s, const DefTable& defs) {
  // The state is already call-expanded, but go through flatten anyway so a
  // hand-built state is handled the same way.
  Flat f = flatten(rebuild(s.canon), defs);
  int total = f.ctx + f.nus;

  std::vector<PiEdge> out;
  std::set<std::pair<int, std::string>> seen;
  auto emit = [&](PiLabel label, std::vector<ProcessPtr> comps) {
    Flat g{f.ctx, f.nus, std::move(comps)};
    PiState t = normalize(rebuild_flat(g), defs);
    if (seen.insert({static_cast<int>(label), t.key}).second)
      out.push_back(PiEdge{label, std::move(t)});
  };

  for (size_t i = 0; i < f.comps.size(); ++i) {
    const auto& bi = f.comps[i]->branches;
    for (size_t ib = 0; ib < bi.size(); ++ib) {
      if (bi[ib].pfx.kind == Prefix::Kind::Tick) {
        auto comps = f.comps;
        comps[i] = bi[ib].cont;
        emit(PiLabel::Heart, std::move(comps));
        continue;
      }
      if (bi[ib].pfx.kind != Prefix::Kind::Output) continue;
      int a = bi[ib].pfx.a, b = bi[ib].pfx.b;
      for (size_t j = 0; j < f.comps.size(); ++j) {
        if (j == i) continue;
        const auto& bj = f.comps[j]->branches;
        for (size_t jb = 0; jb < bj.size(); ++jb) {
          if (bj[jb].pfx.kind != Prefix::Kind::Input || bj[jb].pfx.a != a)
            continue;
          // receiver continuation: the bound level total+1 becomes b
          Renaming sub = Renaming::identity(total);
          sub.source = total + 1;
          sub.map.push_back(b);
          auto comps = f.comps;
          comps[i] = bi[ib].cont;
          comps[j] = rename(bj[jb].cont, sub);
          emit(PiLabel::Tau, std::move(comps));
        }
      }
    }
  }
  out.push_back(PiEdge{PiLabel::Id, s});
  return out;
}

namespace {

// Exploration record for bot_pi.
struct Node {
  PiState state;
  bool heart = false;     // has a tick edge
  bool expanded = false;  // successors were generated
  std::vector<int> tau;   // silent successors (indices)
  int parent = -1;        // BFS tree, for witnesses
};

}  // namespace

BotResult bot_pi(const PiState& s, const DefTable& defs, size_t node_budget) {
  std::vector<Node> nodes;
  std::unordered_map<std::string, int> index;
  auto intern = [&](const PiState& st, int parent) {
    auto it = index.find(st.key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    index.emplace(st.key, id);
    nodes.push_back(Node{st, false, false, {}, parent});
    return id;
  };

  BotResult res;
  intern(s, -1);
  bool truncated = false;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (nodes[cur].expanded) continue;
    if (nodes.size() > node_budget) {
      truncated = true;
      break;
    }
    std::vector<PiEdge> edges;
    try {
      edges = successors(nodes[cur].state, defs);
    } catch (const UnfoldLimit&) {
      res.verdict = Verdict::Unknown;
      res.explored = nodes.size();
      return res;
    }
    nodes[cur].expanded = true;
    for (const auto& e : edges) {
      if (e.label == PiLabel::Heart) {
        nodes[cur].heart = true;
      } else if (e.label == PiLabel::Tau) {
        int nxt = intern(e.target, cur);
        nodes[cur].tau.push_back(nxt);
        if (!nodes[nxt].expanded) queue.push_back(nxt);
      }
    }
  }
  res.explored = nodes.size();

  size_t n = nodes.size();
  // Backward closure over tau edges from the heart-enabled states.
  std::vector<std::vector<int>> rev(n);
  for (size_t i = 0; i < n; ++i)
    for (int j : nodes[i].tau) rev[j].push_back(static_cast<int>(i));
  std::vector<char> can_heart(n, 0);
  std::deque<int> work;
  for (size_t i = 0; i < n; ++i)
    if (nodes[i].heart) {
      can_heart[i] = 1;
      work.push_back(static_cast<int>(i));
    }
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    for (int pre : rev[cur])
      if (!can_heart[pre]) {
        can_heart[pre] = 1;
        work.push_back(pre);
      }
  }

  auto witness_path = [&](int bad) {
    std::vector<std::string> path;
    for (int cur = bad; cur != -1; cur = nodes[cur].parent)
      path.push_back(pretty({rebuild(nodes[cur].state.canon).proc,
                             nodes[cur].state.ctx()}));
    std::reverse(path.begin(), path.end());
    return path;
  };

  if (!truncated) {
    for (size_t i = 0; i < n; ++i)
      if (!can_heart[i]) {
        res.verdict = Verdict::NotInBot;
        res.witness = witness_path(static_cast<int>(i));
        return res;
      }
    res.verdict = Verdict::InBot;
    return res;
  }

  // Truncated: a state from which every silent path stays inside the
  // expanded region still yields an exact local analysis. If such a state
  // cannot reach a tick, the whole state fails for certain.
  std::vector<char> escapes(n, 0);
  std::deque<int> esc;
  for (size_t i = 0; i < n; ++i)
    if (!nodes[i].expanded) {
      escapes[i] = 1;
      esc.push_back(static_cast<int>(i));
    }
  while (!esc.empty()) {
    int cur = esc.front();
    esc.pop_front();
    for (int pre : rev[cur])
      if (!escapes[pre]) {
        escapes[pre] = 1;
        esc.push_back(pre);
      }
  }
  for (size_t i = 0; i < n; ++i)
    if (!escapes[i] && !can_heart[i]) {
      res.verdict = Verdict::NotInBot;
      res.witness = witness_path(static_cast<int>(i));
      return res;
    }
  res.verdict = Verdict::Unknown;
  return res;
}

Verdict passes(const TypedProcess& p, const PiTest& t, const DefTable& defs,
               size_t node_budget) {
  if (t.h.source != p.ctx)
    throw TypeError("test context does not match the process context");
  if (t.r.ctx != t.h.target)
    throw TypeError("test observer context does not match the test map");
  TypedProcess composite{Process::par(rename(p.proc, t.h), t.r.proc),
                         t.h.target};
  try {
    return bot_pi(normalize(composite, defs), defs, node_budget).verdict;
  } catch (const UnfoldLimit&) {
    return Verdict::Unknown;
  }
}

namespace {

// Observers over `ctx` channels with at most `depth` in/out prefixes along
// any path; nil and tick.0 close every level.
void observers_single(int ctx, int depth, std::vector<ProcessPtr>& out) {
  out.push_back(Process::nil());
  out.push_back(Process::sum({{Prefix::tick(), Process::nil()}}));
  if (depth == 0) return;
  std::vector<ProcessPtr> in_conts;
  observers_single(ctx + 1, depth - 1, in_conts);
  std::vector<ProcessPtr> conts;
  observers_single(ctx, depth - 1, conts);
  for (int a = 1; a <= ctx; ++a) {
    for (const auto& c : in_conts)
      out.push_back(Process::sum({{Prefix::input(a), c}}));
    for (int b = 1; b <= ctx; ++b)
      for (const auto& c : conts)
        out.push_back(Process::sum({{Prefix::output(a, b), c}}));
  }
}

std::vector<ProcessPtr> observers(int ctx, int depth) {
  std::vector<ProcessPtr> out;
  observers_single(ctx, depth, out);
  if (depth == 0) return out;
  // top-level two-way choices between shallow branches
  std::vector<Branch> atoms;
  for (int a = 1; a <= ctx; ++a) {
    atoms.push_back({Prefix::input(a), Process::nil()});
    atoms.push_back({Prefix::input(a),
                     Process::sum({{Prefix::tick(), Process::nil()}})});
    for (int b = 1; b <= ctx; ++b) {
      atoms.push_back({Prefix::output(a, b), Process::nil()});
      atoms.push_back({Prefix::output(a, b),
                       Process::sum({{Prefix::tick(), Process::nil()}})});
    }
  }
  for (size_t i = 0; i < atoms.size(); ++i)
    for (size_t j = i; j < atoms.size(); ++j)
      out.push_back(Process::sum({atoms[i], atoms[j]}));
  return out;
}

// Fusion patterns of 1..ctx as restricted-growth strings: entry i maps to a
// class id in 1..m where m grows by at most one at each step. One
// representative per isomorphism class of surjections.
void fusion_maps(int ctx, std::vector<Renaming>& out) {
  std::vector<int> cur(ctx, 0);
  auto rec = [&](auto&& self, int i, int m) -> void {
    if (i == ctx) {
      Renaming h;
      h.source = ctx;
      h.target = m;
      h.map = cur;
      out.push_back(std::move(h));
      return;
    }
    for (int v = 1; v <= m + 1; ++v) {
      cur[i] = v;
      self(self, i + 1, std::max(m, v));
    }
  };
  if (ctx == 0) {
    out.push_back(Renaming::identity(0));
  } else {
    rec(rec, 0, 0);
  }
}

}  // namespace

std::vector<PiTest> enumerate_tests(int ctx, int k) {
  std::vector<PiTest> out;
  DefTable no_defs;
  std::vector<Renaming> hs;
  fusion_maps(ctx, hs);
  int max_extra = k > 0 ? 1 : 0;
  for (const auto& h0 : hs) {
    for (int extra = 0; extra <= max_extra; ++extra) {
      Renaming h = h0;
      h.target += extra;
      int delta = h.target;
      std::set<std::string> seen;
      for (const auto& r : observers(delta, k)) {
        PiState norm = normalize({r, delta}, no_defs);
        if (!seen.insert(norm.key).second) continue;
        std::string label = "h=[";
        for (size_t i = 0; i < h.map.size(); ++i)
          label += (i ? "," : "") + std::to_string(h.map[i]);
        label += "]>" + std::to_string(delta) + " R=";
        std::vector<std::string> names;
        for (int i = 1; i <= delta; ++i)
          names.push_back("c" + std::to_string(i));
        label += pretty({r, delta}, names);
        out.push_back(PiTest{h, {r, delta}, label});
      }
    }
  }
  return out;
}

FairResult fair_equiv_pi(const TypedProcess& p, const TypedProcess& q, int k,
                         size_t node_budget, const DefTable& defs) {
  if (p.ctx != q.ctx)
    throw TypeError("compared processes must share a context");
  FairResult res;
  res.k = k;
  bool some_unknown = false;
  for (const auto& t : enumerate_tests(p.ctx, k)) {
    ++res.tests_run;
    Verdict vp = passes(p, t, defs, node_budget);
    Verdict vq = passes(q, t, defs, node_budget);
    if (vp == Verdict::Unknown || vq == Verdict::Unknown) {
      some_unknown = true;
      continue;
    }
    if (vp != vq) {
      res.kind = FairResult::Kind::Distinguished;
      res.test = t;
      res.left = vp;
      res.right = vq;
      return res;
    }
  }
  res.kind = some_unknown ? FairResult::Kind::Unknown
                          : FairResult::Kind::AgreeUpTo;
  return res;
}

}  // namespace pigame
