#include "pigame/strategy_lts.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <utility>

namespace pigame {

Position player_board(int n) {
  Position x;
  x.channels = n;
  Player p;
  p.arity = n;
  for (int i = 0; i < n; ++i) p.attach.push_back(i);
  x.players.push_back(std::move(p));
  return x;
}

SDState make_sd_state(PositionStrategy ps) {
  if (ps.assign.size() != ps.base.players.size())
    throw ShapeError("one strategy per player required");
  std::vector<std::string> tags;
  tags.reserve(ps.assign.size());
  for (size_t i = 0; i < ps.assign.size(); ++i) {
    if (ps.assign[i].arity != ps.base.players[i].arity)
      throw ShapeError("strategy arity does not match its player");
    tags.push_back(print_strategy(ps.assign[i]));
  }
  SDState st;
  st.key = canonical_position(ps.base, tags).key;
  st.ps = std::move(ps);
  return st;
}

SDState translate_state(const TypedProcess& p, const DefTable& defs) {
  PositionStrategy ps;
  ps.base = player_board(p.ctx);
  DSummand sm;
  sm.table = translate(p, defs);
  ps.assign.push_back(Strategy{p.ctx, {std::move(sm)}});
  return make_sd_state(std::move(ps));
}

namespace {

Strategy singleton(DefiniteStrategy d) {
  int n = d.arity;
  DSummand sm;
  sm.table = std::move(d);
  return Strategy{n, {std::move(sm)}};
}

// The basic seed a continuation player follows: forks split into their two
// branches, a synchronisation is the sender's output and the receiver's
// input, and a basic move is its own seed.
SeedKind avatar_seed(const SeedKind& kind, int avatar_idx, int owner_initial) {
  switch (kind.k) {
    case SeedKind::K::Fork:
      return avatar_idx == 0 ? SeedKind::forkl(kind.n)
                             : SeedKind::forkr(kind.n);
    case SeedKind::K::Tau:
      return owner_initial == 0 ? SeedKind::out(kind.m, kind.c, kind.d)
                                : SeedKind::in(kind.n, kind.a);
    default:
      return kind;
  }
}

// Odometer over 1-based choice tuples; returns false when exhausted.
bool bump(std::vector<int>& v, const std::vector<int>& lim) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] < lim[i]) {
      ++v[i];
      for (size_t j = 0; j < i; ++j) v[j] = 1;
      return true;
    }
  }
  return false;
}

void edges_for_move(const SDState& s, const GlobalMove& m, const DefTable& defs,
                    std::vector<SDEdge>& out) {
  size_t na = m.acting.size();
  size_t nk = m.seed.avatar.size();
  std::vector<int> scount(na);
  for (size_t p = 0; p < na; ++p) {
    scount[p] =
        static_cast<int>(s.ps.assign[m.acting[p]].summands.size());
    if (scount[p] == 0) return;  // an empty sum never moves
  }
  SDLabel label = m.seed.kind.k == SeedKind::K::Tick ? SDLabel::Heart
                                                     : SDLabel::Silent;
  std::vector<int> j(na, 1);
  do {
    std::vector<DefiniteStrategy> tables;
    tables.reserve(na);
    for (size_t p = 0; p < na; ++p)
      tables.push_back(pick(s.ps.assign[m.acting[p]], j[p], defs));
    std::vector<const Strategy*> der(nk);
    std::vector<int> pcount(nk);
    bool live = true;
    for (size_t k = 0; k < nk && live; ++k) {
      int owner = m.seed.avatar[k];
      der[k] = &derive(tables[owner],
                       avatar_seed(m.seed.kind, static_cast<int>(k), owner));
      pcount[k] = static_cast<int>(der[k]->summands.size());
      if (pcount[k] == 0) live = false;  // no branch here: no edge
    }
    if (!live) continue;
    std::vector<int> i(nk, 1);
    do {
      PositionStrategy tgt;
      tgt.base = m.result;
      tgt.assign.resize(m.result.players.size());
      for (size_t b = 0; b < s.ps.assign.size(); ++b)
        if (m.spectator_map[b] >= 0)
          tgt.assign[m.spectator_map[b]] = s.ps.assign[b];
      for (size_t k = 0; k < nk; ++k)
        tgt.assign[m.avatar_map[k]] = singleton(pick(*der[k], i[k], defs));
      SDEdge e;
      e.move = m;
      e.summand = j;
      e.pick = i;
      e.label = label;
      e.target = make_sd_state(std::move(tgt));
      out.push_back(std::move(e));
    } while (bump(i, pcount));
  } while (bump(j, scount));
}

bool closed_world_kind(const SeedKind& k) {
  switch (k.k) {
    case SeedKind::K::Tau:
    case SeedKind::K::Nu:
    case SeedKind::K::Tick:
    case SeedKind::K::Fork:
      return true;
    default:
      return false;
  }
}

SDEdge id_edge(const SDState& s) {
  SDEdge e;
  e.label = SDLabel::Id;
  e.target = s;
  return e;
}

}  // namespace

std::vector<SDEdge> succ(const SDState& s, const DefTable& defs) {
  std::vector<SDEdge> out;
  out.push_back(id_edge(s));
  for (const GlobalMove& m : all_moves(s.ps.base))
    edges_for_move(s, m, defs, out);
  return out;
}

std::vector<SDEdge> closed_world_succ(const SDState& s, const DefTable& defs) {
  std::vector<SDEdge> out;
  out.push_back(id_edge(s));
  for (const GlobalMove& m : all_moves(s.ps.base))
    if (closed_world_kind(m.seed.kind)) edges_for_move(s, m, defs, out);
  return out;
}

namespace {

void support_strategy(const Strategy& s, std::vector<char>& live);

// Marks every port of d's arity that some entry seed or some nested
// reference map mentions. Continuation ports beyond the current arity (the
// channel received or created next) do not exist yet and are ignored.
void support_table(const DefiniteStrategy& d, std::vector<char>& live) {
  auto sub = [&](const Strategy& inner) {
    if (inner.summands.empty()) return;
    std::vector<char> in_live(inner.arity, 0);
    support_strategy(inner, in_live);
    for (int p = 0; p < d.arity; ++p)
      if (in_live[p]) live[p] = 1;
  };
  sub(*d.forkl);
  sub(*d.forkr);
  sub(*d.tick);
  sub(*d.nu);
  for (int a = 1; a <= d.arity; ++a)
    if (!d.in[a - 1]->summands.empty()) {
      live[a - 1] = 1;
      sub(*d.in[a - 1]);
    }
  for (int a = 1; a <= d.arity; ++a)
    for (int b = 1; b <= d.arity; ++b)
      if (!d.out[a - 1][b - 1]->summands.empty()) {
        live[a - 1] = 1;
        live[b - 1] = 1;
        sub(*d.out[a - 1][b - 1]);
      }
}

void support_strategy(const Strategy& s, std::vector<char>& live) {
  for (const DSummand& sm : s.summands) {
    if (sm.table) {
      support_table(*sm.table, live);
    } else {
      for (int v : sm.ref_rn.map) live[v - 1] = 1;
    }
  }
}

// A strategy that is a sum of bare empty tables accepts exactly the empty
// view and never yields a defined pick, so its player is a permanent
// spectator.
bool inert(const Strategy& s) {
  if (s.summands.empty()) return false;  // the empty sum accepts nothing
  for (const DSummand& sm : s.summands) {
    if (!sm.table) return false;
    const DefiniteStrategy& d = *sm.table;
    if (!d.forkl->summands.empty() || !d.forkr->summands.empty() ||
        !d.tick->summands.empty() || !d.nu->summands.empty())
      return false;
    for (const auto& e : d.in)
      if (!e->summands.empty()) return false;
    for (const auto& row : d.out)
      for (const auto& e : row)
        if (!e->summands.empty()) return false;
  }
  return true;
}

Strategy sorted_strategy(const Strategy& s);

DefiniteStrategy sorted_table(const DefiniteStrategy& d) {
  DefiniteStrategy out = d;
  auto norm = [](std::shared_ptr<Strategy>& slot) {
    if (!slot->summands.empty())
      slot = std::make_shared<Strategy>(sorted_strategy(*slot));
  };
  norm(out.forkl);
  norm(out.forkr);
  norm(out.tick);
  norm(out.nu);
  for (auto& e : out.in) norm(e);
  for (auto& row : out.out)
    for (auto& e : row) norm(e);
  return out;
}

// Reorder every sum in the tree by the printed form of its summands.  The
// order of a sum only numbers its branches — the edges a state admits are
// the same for any permutation — so a condensed state can serve as a
// canonical representative.
Strategy sorted_strategy(const Strategy& s) {
  std::vector<std::pair<std::string, DSummand>> keyed;
  for (const DSummand& sm : s.summands) {
    DSummand t = sm;
    if (t.table) t.table = sorted_table(*t.table);
    std::string key = print_strategy(Strategy{s.arity, {t}});
    keyed.emplace_back(std::move(key), std::move(t));
  }
  std::stable_sort(
      keyed.begin(), keyed.end(),
      [](const auto& a, const auto& b) { return a.first < b.first; });
  Strategy out;
  out.arity = s.arity;
  for (auto& [key, sm] : keyed) out.summands.push_back(std::move(sm));
  return out;
}

}  // namespace

SDState condense(const SDState& s) {
  std::vector<Player> players;
  std::vector<Strategy> assign;
  for (size_t i = 0; i < s.ps.base.players.size(); ++i) {
    if (inert(s.ps.assign[i])) continue;
    const Player& pl = s.ps.base.players[i];
    std::vector<char> live(pl.arity, 0);
    support_strategy(s.ps.assign[i], live);
    Renaming rn;
    rn.source = pl.arity;
    std::vector<int> chans;  // distinct live channels, first occurrence first
    for (int p = 0; p < pl.arity; ++p) {
      if (!live[p]) {
        rn.map.push_back(1);  // placeholder image, never read
        continue;
      }
      int at = -1;
      for (size_t q = 0; q < chans.size(); ++q)
        if (chans[q] == pl.attach[p]) at = static_cast<int>(q);
      if (at < 0) {
        chans.push_back(pl.attach[p]);
        at = static_cast<int>(chans.size()) - 1;
      }
      rn.map.push_back(at + 1);
    }
    rn.target = static_cast<int>(chans.size());
    Player np;
    np.arity = rn.target;
    np.attach = chans;
    players.push_back(std::move(np));
    assign.push_back(sorted_strategy(rename_strategy(s.ps.assign[i], rn)));
  }
  std::vector<int> remap(s.ps.base.channels, -1);
  int next = 0;
  for (const Player& pl : players)
    for (int c : pl.attach)
      if (remap[c] < 0) remap[c] = 0;  // mark attached
  for (int c = 0; c < s.ps.base.channels; ++c)
    if (remap[c] == 0) remap[c] = next++;
  PositionStrategy out;
  out.base.channels = next;
  for (Player& pl : players) {
    for (int& c : pl.attach) c = remap[c];
    out.base.players.push_back(std::move(pl));
  }
  out.assign = std::move(assign);
  return make_sd_state(std::move(out));
}

namespace {

// Exploration record mirroring the reduction-side fair-success search.
struct Node {
  SDState state;
  bool heart = false;
  bool expanded = false;
  std::vector<int> silent;
  int parent = -1;
};

}  // namespace

BotResult bot_d(const SDState& s, const DefTable& defs, size_t node_budget) {
  BotResult res;
  for (const Strategy& st : s.ps.assign)
    if (st.summands.empty()) {
      // a player with no summand admits no run at all, so there is nothing
      // the demand could fail on
      res.verdict = Verdict::InBot;
      res.explored = 1;
      return res;
    }

  std::vector<Node> nodes;
  std::unordered_map<std::string, int> index;
  auto intern = [&](const SDState& st, int parent) {
    auto it = index.find(st.key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    index.emplace(st.key, id);
    nodes.push_back(Node{st, false, false, {}, parent});
    return id;
  };

  intern(condense(s), -1);
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
    std::vector<SDEdge> edges;
    try {
      edges = closed_world_succ(nodes[cur].state, defs);
    } catch (const UnfoldLimit&) {
      res.verdict = Verdict::Unknown;
      res.explored = nodes.size();
      return res;
    }
    nodes[cur].expanded = true;
    for (auto& e : edges) {
      if (e.label == SDLabel::Heart) {
        nodes[cur].heart = true;
      } else if (e.label == SDLabel::Silent) {
        int nxt = intern(condense(e.target), cur);
        nodes[cur].silent.push_back(nxt);
        if (!nodes[nxt].expanded) queue.push_back(nxt);
      }
    }
  }
  res.explored = nodes.size();

  size_t n = nodes.size();
  std::vector<std::vector<int>> rev(n);
  for (size_t i = 0; i < n; ++i)
    for (int j : nodes[i].silent) rev[j].push_back(static_cast<int>(i));
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
      path.push_back(describe(nodes[cur].state));
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

  // Truncated: states whose every silent path stays inside the expanded
  // region are still analysed exactly, so a tick-free pocket among them is
  // a definitive failure.
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

SDState compose_test(const SDState& s, const SemTest& t) {
  InterfaceOf io = interface_of(s.ps.base);
  if (!(t.h.source == io.iface))
    throw ShapeError("test map does not start at the state's interface");
  if (!(t.t.base == t.h.target))
    throw ShapeError("test strategies do not live on the test board");
  Pushout po = glue(s.ps.base, io.incl, t.h);
  PositionStrategy merged;
  merged.base = po.result;
  merged.assign.resize(po.result.players.size());
  for (size_t j = 0; j < t.t.assign.size(); ++j)
    merged.assign[po.from_context.player_map[j]] = t.t.assign[j];
  for (size_t j = 0; j < s.ps.assign.size(); ++j)
    merged.assign[po.from_main.player_map[j]] = s.ps.assign[j];
  return make_sd_state(std::move(merged));
}

std::vector<SemTest> enumerate_sem_tests(int channels, int k) {
  std::vector<SemTest> out;
  DefTable no_defs;
  for (const PiTest& pt : enumerate_tests(channels, k)) {
    int delta = pt.h.target;
    SemTest st;
    st.h.source = Interface{channels, {}};
    st.h.target = player_board(delta);
    for (int i = 0; i < channels; ++i)
      st.h.chan_map.push_back(pt.h.map[i] - 1);
    st.t.base = st.h.target;
    st.t.assign.push_back(singleton(translate(pt.r, no_defs)));
    st.label = pt.label;
    out.push_back(std::move(st));
  }
  return out;
}

Verdict passes_d(const SDState& s, const SemTest& t, const DefTable& defs,
                 size_t node_budget) {
  try {
    return bot_d(compose_test(s, t), defs, node_budget).verdict;
  } catch (const UnfoldLimit&) {
    return Verdict::Unknown;
  }
}

SDFairResult fair_equiv_d(const SDState& s1, const SDState& s2, int k,
                          size_t node_budget, const DefTable& defs) {
  if (s1.ps.base.channels != s2.ps.base.channels)
    throw ShapeError("compared states must share an interface");
  SDFairResult res;
  res.k = k;
  bool some_unknown = false;
  for (const auto& t : enumerate_sem_tests(s1.ps.base.channels, k)) {
    ++res.tests_run;
    Verdict v1 = passes_d(s1, t, defs, node_budget);
    Verdict v2 = passes_d(s2, t, defs, node_budget);
    if (v1 == Verdict::Unknown || v2 == Verdict::Unknown) {
      some_unknown = true;
      continue;
    }
    if (v1 != v2) {
      res.kind = SDFairResult::Kind::Distinguished;
      res.test = t;
      res.left = v1;
      res.right = v2;
      return res;
    }
  }
  res.kind = some_unknown ? SDFairResult::Kind::Unknown
                          : SDFairResult::Kind::AgreeUpTo;
  return res;
}

std::string describe(const SDState& s) {
  std::string out = "channels " + std::to_string(s.ps.base.channels);
  for (size_t i = 0; i < s.ps.base.players.size(); ++i) {
    out += " | p" + std::to_string(i) + "/" +
           std::to_string(s.ps.base.players[i].arity) + " " +
           print_strategy(s.ps.assign[i]);
  }
  return out;
}

}  // namespace pigame
