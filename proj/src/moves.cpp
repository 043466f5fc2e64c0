#include "pigame/moves.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace pigame {

std::string SeedKind::str() const {
  auto s = [](int v) { return std::to_string(v); };
  switch (k) {
    case K::Fork: return "fork(" + s(n) + ")";
    case K::ForkL: return "forkl(" + s(n) + ")";
    case K::ForkR: return "forkr(" + s(n) + ")";
    case K::Tick: return "tick(" + s(n) + ")";
    case K::In: return "in(" + s(n) + "," + s(a) + ")";
    case K::Out: return "out(" + s(n) + "," + s(a) + "," + s(b) + ")";
    case K::Nu: return "nu(" + s(n) + ")";
    case K::Tau:
      return "tau(" + s(n) + "," + s(a) + "," + s(m) + "," + s(c) + "," + s(d) + ")";
  }
  return "?";
}

namespace {
Position single_pos(int n) {
  Position p;
  p.channels = n;
  Player pl{n, {}};
  for (int i = 0; i < n; ++i) pl.attach.push_back(i);
  p.players.push_back(std::move(pl));
  return p;
}
}  // namespace

SeedCospan seed(SeedKind kind) {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("seed parameter out of range: ") + what);
  };
  need(kind.n >= 0, "arity");
  SeedCospan s;
  s.kind = kind;
  switch (kind.k) {
    case SeedKind::K::Fork: {
      s.initial = single_pos(kind.n);
      s.final = s.initial;
      s.final.players.push_back(s.final.players[0]);
      s.avatar = {0, 0};
      break;
    }
    case SeedKind::K::ForkL:
    case SeedKind::K::ForkR:
    case SeedKind::K::Tick: {
      s.initial = single_pos(kind.n);
      s.final = s.initial;
      s.avatar = {0};
      break;
    }
    case SeedKind::K::Out: {
      need(1 <= kind.a && kind.a <= kind.n, "carrier");
      need(1 <= kind.b && kind.b <= kind.n, "sent channel");
      s.initial = single_pos(kind.n);
      s.final = s.initial;
      s.avatar = {0};
      break;
    }
    case SeedKind::K::In:
      need(1 <= kind.a && kind.a <= kind.n, "carrier");
      [[fallthrough]];
    case SeedKind::K::Nu: {
      s.initial = single_pos(kind.n);
      s.final.channels = kind.n + 1;
      Player pl{kind.n + 1, {}};
      for (int i = 0; i <= kind.n; ++i) pl.attach.push_back(i);
      s.final.players.push_back(std::move(pl));
      s.avatar = {0};
      s.fresh = {kind.n};
      break;
    }
    case SeedKind::K::Tau: {
      need(1 <= kind.a && kind.a <= kind.n, "receiver carrier");
      need(1 <= kind.c && kind.c <= kind.m, "sender carrier");
      need(1 <= kind.d && kind.d <= kind.m, "sent channel");
      // sender's m channels first; the receiver's other ports follow
      s.initial.channels = kind.m + kind.n - 1;
      Player sender{kind.m, {}};
      for (int i = 0; i < kind.m; ++i) sender.attach.push_back(i);
      Player recv{kind.n, {}};
      int next = kind.m;
      for (int j = 1; j <= kind.n; ++j)
        recv.attach.push_back(j == kind.a ? kind.c - 1 : next++);
      s.initial.players.push_back(sender);
      s.initial.players.push_back(recv);
      s.final = s.initial;
      s.final.players[1].arity = kind.n + 1;
      s.final.players[1].attach.push_back(kind.d - 1);
      s.avatar = {0, 1};
      break;
    }
  }
  return s;
}

GlobalMove instantiate(SeedKind kind, const Position& base,
                       const std::vector<int>& acting) {
  GlobalMove mv;
  mv.seed = seed(kind);
  mv.base = base;
  mv.acting = acting;
  const Position& init = mv.seed.initial;
  if (acting.size() != init.players.size())
    throw ShapeError("move needs " + std::to_string(init.players.size()) +
                     " acting player(s)");
  for (size_t i = 0; i < acting.size(); ++i)
    for (size_t j = i + 1; j < acting.size(); ++j)
      if (acting[i] == acting[j])
        throw ShapeError("acting players must be distinct");

  // Channel embedding induced by the acting players' attachments.
  std::vector<int> e(init.channels, -1);
  for (size_t sp = 0; sp < init.players.size(); ++sp) {
    int bp = acting[sp];
    if (bp < 0 || bp >= static_cast<int>(base.players.size()))
      throw ShapeError("acting player out of range");
    const Player& s = init.players[sp];
    const Player& t = base.players[bp];
    if (s.arity != t.arity) throw ShapeError("acting player arity mismatch");
    for (int i = 0; i < s.arity; ++i) {
      int& slot = e[s.attach[i]];
      if (slot == -1) slot = t.attach[i];
      else if (slot != t.attach[i])
        throw ShapeError("players do not share the carrier channel");
    }
  }
  for ([[maybe_unused]] int c : e) assert(c >= 0);

  // Context: the base without the acting players.
  Position z;
  z.channels = base.channels;
  std::vector<int> z_index(base.players.size(), -1);
  for (size_t p = 0; p < base.players.size(); ++p) {
    if (std::find(acting.begin(), acting.end(), static_cast<int>(p)) !=
        acting.end())
      continue;
    z_index[p] = static_cast<int>(z.players.size());
    z.players.push_back(base.players[p]);
  }

  Interface iface;
  iface.channels = init.channels;
  HorizMap incl{iface, mv.seed.final, {}, {}};
  incl.chan_map.resize(init.channels);
  for (int c = 0; c < init.channels; ++c) incl.chan_map[c] = c;
  HorizMap f{iface, z, e, {}};
  Pushout po = glue(mv.seed.final, incl, f);

  mv.result = po.result;
  mv.spectator_map.assign(base.players.size(), -1);
  for (size_t p = 0; p < base.players.size(); ++p)
    if (z_index[p] >= 0)
      mv.spectator_map[p] = po.from_context.player_map[z_index[p]];
  for (size_t fp = 0; fp < mv.seed.final.players.size(); ++fp)
    mv.avatar_map.push_back(po.from_main.player_map[fp]);
  for (int fc : mv.seed.fresh) mv.fresh.push_back(po.from_main.chan_map[fc]);
  return mv;
}

std::vector<GlobalMove> all_moves(const Position& base) {
  std::vector<GlobalMove> out;
  for (size_t p = 0; p < base.players.size(); ++p) {
    int pi = static_cast<int>(p);
    int n = base.players[p].arity;
    out.push_back(instantiate(SeedKind::fork(n), base, {pi}));
    out.push_back(instantiate(SeedKind::tick(n), base, {pi}));
    out.push_back(instantiate(SeedKind::nu(n), base, {pi}));
    for (int a = 1; a <= n; ++a) {
      out.push_back(instantiate(SeedKind::in(n, a), base, {pi}));
      for (int b = 1; b <= n; ++b)
        out.push_back(instantiate(SeedKind::out(n, a, b), base, {pi}));
    }
  }
  for (size_t ps = 0; ps < base.players.size(); ++ps)
    for (size_t pr = 0; pr < base.players.size(); ++pr) {
      if (ps == pr) continue;
      int m = base.players[ps].arity, n = base.players[pr].arity;
      for (int c = 1; c <= m; ++c)
        for (int a = 1; a <= n; ++a) {
          if (base.players[ps].attach[c - 1] != base.players[pr].attach[a - 1])
            continue;
          for (int d = 1; d <= m; ++d)
            out.push_back(instantiate(SeedKind::tau(n, a, m, c, d), base,
                                      {static_cast<int>(ps), static_cast<int>(pr)}));
        }
    }
  return out;
}

const Position& final_of(const Play& p) {
  return p.steps.empty() ? p.initial : p.steps.back().result;
}

Play compose(const Play& p, const Play& q) {
  if (!(final_of(p) == q.initial))
    throw ShapeError("play boundaries do not agree");
  Play out = p;
  out.steps.insert(out.steps.end(), q.steps.begin(), q.steps.end());
  return out;
}

std::vector<std::string> step_names(const Play& p) {
  std::vector<std::string> names;  // causal name per current player
  for (size_t i = 0; i < p.initial.players.size(); ++i)
    names.push_back("i" + std::to_string(i));
  std::vector<std::string> out;
  for (const GlobalMove& m : p.steps) {
    std::string sn = m.seed.kind.str() + "@[";
    for (size_t i = 0; i < m.acting.size(); ++i)
      sn += (i ? ";" : "") + names[m.acting[i]];
    sn += "]";
    std::vector<std::string> next(m.result.players.size());
    for (size_t b = 0; b < names.size(); ++b)
      if (m.spectator_map[b] >= 0) next[m.spectator_map[b]] = names[b];
    for (size_t f = 0; f < m.avatar_map.size(); ++f)
      next[m.avatar_map[f]] = sn + "#" + std::to_string(f);
    names = std::move(next);
    out.push_back(std::move(sn));
  }
  return out;
}

bool play_equiv(const Play& p, const Play& q) {
  if (!(p.initial == q.initial)) return false;
  auto a = step_names(p), b = step_names(q);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

namespace {

struct Walk {
  Position S;
  std::vector<int> pm;  // S player -> current full player
  std::vector<int> cm;  // S channel -> current full channel
  Play out;

  // Apply one restricted move whose seed-final players land on the given
  // full players and whose fresh channels land on the given full channels.
  // Returns the avatar slots in the new restricted position.
  std::vector<int> apply(SeedKind kk, const std::vector<int>& act_src,
                         const std::vector<int>& full_avatars,
                         const std::vector<int>& full_fresh) {
    GlobalMove m2 = instantiate(kk, S, act_src);
    std::vector<int> pm2(m2.result.players.size(), -1);
    for (size_t s = 0; s < pm.size(); ++s)
      if (m2.spectator_map[s] >= 0) pm2[m2.spectator_map[s]] = pm[s];
    assert(full_avatars.size() == m2.avatar_map.size());
    for (size_t f = 0; f < m2.avatar_map.size(); ++f)
      pm2[m2.avatar_map[f]] = full_avatars[f];
    assert(full_fresh.size() == m2.fresh.size());
    for (int fc : full_fresh) cm.push_back(fc);
    pm = std::move(pm2);
    S = m2.result;
    std::vector<int> slots = m2.avatar_map;
    out.steps.push_back(std::move(m2));
    return slots;
  }

  void advance_spectators(const GlobalMove& M) {
    for (auto& fp : pm) {
      assert(M.spectator_map[fp] >= 0);
      fp = M.spectator_map[fp];
    }
  }

  // Advance every tracked player except the listed slots through the full
  // move's spectator map.
  void advance_except(const GlobalMove& M, const std::vector<int>& slots) {
    for (size_t s = 0; s < pm.size(); ++s) {
      if (std::find(slots.begin(), slots.end(), static_cast<int>(s)) !=
          slots.end())
        continue;
      assert(M.spectator_map[pm[s]] >= 0);
      pm[s] = M.spectator_map[pm[s]];
    }
  }
};

}  // namespace

Restriction restrict_play(const Play& p, const HorizMap& r) {
  check_horiz(r);
  if (!(r.target == p.initial))
    throw ShapeError("restriction must target the play's initial position");

  Walk w;
  w.S = r.source;
  w.pm = r.player_map;
  w.cm = r.chan_map;
  w.out.initial = r.source;

  for (const GlobalMove& M : p.steps) {
    const SeedKind& k = M.seed.kind;
    auto tracked = [&](int full) -> int {
      for (size_t s = 0; s < w.pm.size(); ++s)
        if (w.pm[s] == full) return static_cast<int>(s);
      return -1;
    };

    if (k.k == SeedKind::K::Tau) {
      int ts = tracked(M.acting[0]);
      int tr = tracked(M.acting[1]);
      // the channel the receiver ends up holding in slot n+1
      int full_recv = M.result.players[M.avatar_map[1]].attach[k.n];
      if (ts >= 0 && tr >= 0) {
        bool carrier_shared = w.S.players[ts].attach[k.c - 1] ==
                              w.S.players[tr].attach[k.a - 1];
        if (carrier_shared) {
          auto av = w.apply(k, {ts, tr}, {M.avatar_map[0], M.avatar_map[1]}, {});
          w.advance_except(M, av);
        } else {
          // the tracked copies cannot synchronise: emit the two halves,
          // output first
          auto av1 = w.apply(SeedKind::out(k.m, k.c, k.d), {ts},
                             {M.avatar_map[0]}, {});
          int tr2 = w.out.steps.back().spectator_map[tr];
          auto av2 = w.apply(SeedKind::in(k.n, k.a), {tr2}, {M.avatar_map[1]},
                             {full_recv});
          int sender_slot = w.out.steps.back().spectator_map[av1[0]];
          w.advance_except(M, {sender_slot, av2[0]});
        }
      } else if (ts >= 0) {
        auto av = w.apply(SeedKind::out(k.m, k.c, k.d), {ts},
                          {M.avatar_map[0]}, {});
        w.advance_except(M, av);
      } else if (tr >= 0) {
        auto av = w.apply(SeedKind::in(k.n, k.a), {tr}, {M.avatar_map[1]},
                          {full_recv});
        w.advance_except(M, av);
      } else {
        w.advance_spectators(M);
      }
      continue;
    }

    int ts = tracked(M.acting[0]);
    if (ts < 0) {
      w.advance_spectators(M);
      continue;
    }
    std::vector<int> avs;
    for (int v : M.avatar_map) avs.push_back(v);
    auto av = w.apply(k, {ts}, avs, M.fresh);
    w.advance_except(M, av);
  }

  Restriction res;
  res.play = std::move(w.out);
  res.final_embed.source = final_of(res.play);
  res.final_embed.target = final_of(p);
  res.final_embed.chan_map = std::move(w.cm);
  res.final_embed.player_map = std::move(w.pm);
  return res;
}

namespace {

void views_walk(const Play& p, size_t i, int avatar, View cur,
                std::set<View>& out) {
  out.insert(cur);
  if (i == p.steps.size()) return;
  const GlobalMove& M = p.steps[i];
  const SeedKind& k = M.seed.kind;
  int slot = -1;
  for (size_t s = 0; s < M.acting.size(); ++s)
    if (M.acting[s] == avatar) slot = static_cast<int>(s);
  if (slot == -1) {
    views_walk(p, i + 1, M.spectator_map[avatar], std::move(cur), out);
    return;
  }
  switch (k.k) {
    case SeedKind::K::Fork: {
      View l = cur;
      l.steps.push_back(SeedKind::forkl(k.n));
      views_walk(p, i + 1, M.avatar_map[0], std::move(l), out);
      cur.steps.push_back(SeedKind::forkr(k.n));
      views_walk(p, i + 1, M.avatar_map[1], std::move(cur), out);
      return;
    }
    case SeedKind::K::Tau: {
      if (slot == 0) {
        cur.steps.push_back(SeedKind::out(k.m, k.c, k.d));
        views_walk(p, i + 1, M.avatar_map[0], std::move(cur), out);
      } else {
        cur.steps.push_back(SeedKind::in(k.n, k.a));
        views_walk(p, i + 1, M.avatar_map[1], std::move(cur), out);
      }
      return;
    }
    default:
      cur.steps.push_back(k);
      views_walk(p, i + 1, M.avatar_map[0], std::move(cur), out);
      return;
  }
}

}  // namespace

std::vector<View> views_of(const Play& p, int player) {
  if (player < 0 || player >= static_cast<int>(p.initial.players.size()))
    throw ShapeError("no such player in the initial position");
  std::set<View> out;
  View start{p.initial.players[player].arity, {}};
  views_walk(p, 0, player, std::move(start), out);
  return {out.begin(), out.end()};
}

std::string to_dot(const Play& p) {
  std::ostringstream os;
  os << "digraph play {\n  rankdir=LR;\n  node [fontsize=9];\n";
  auto layer = [&](const Position& pos, size_t t, const std::string& label) {
    os << "  subgraph cluster_" << t << " {\n    label=\"" << label << "\";\n";
    for (int c = 0; c < pos.channels; ++c)
      os << "    t" << t << "c" << c << " [shape=circle, label=\"" << c
         << "\"];\n";
    for (size_t pl = 0; pl < pos.players.size(); ++pl) {
      os << "    t" << t << "p" << pl << " [shape=point, width=0.1, xlabel=\"p"
         << pl << "\"];\n";
      for (int port = 0; port < pos.players[pl].arity; ++port)
        os << "    t" << t << "p" << pl << " -> t" << t << "c"
           << pos.players[pl].attach[port] << " [arrowhead=none, label=\""
           << (port + 1) << "\"];\n";
    }
    os << "  }\n";
  };
  layer(p.initial, 0, "start");
  for (size_t i = 0; i < p.steps.size(); ++i)
    layer(p.steps[i].result, i + 1, p.steps[i].seed.kind.str());
  for (size_t i = 0; i < p.steps.size(); ++i) {
    const GlobalMove& m = p.steps[i];
    for (size_t b = 0; b < m.base.players.size(); ++b)
      if (m.spectator_map[b] >= 0)
        os << "  t" << i << "p" << b << " -> t" << (i + 1) << "p"
           << m.spectator_map[b] << " [style=dashed, color=gray];\n";
    for (size_t f = 0; f < m.avatar_map.size(); ++f)
      os << "  t" << i << "p" << m.acting[m.seed.avatar[f]] << " -> t"
         << (i + 1) << "p" << m.avatar_map[f] << " [penwidth=2];\n";
  }
  os << "}\n";
  return os.str();
}

std::string trace(const Play& p) {
  std::ostringstream os;
  for (const GlobalMove& m : p.steps) {
    os << m.seed.kind.str() << " acting=[";
    for (size_t i = 0; i < m.acting.size(); ++i)
      os << (i ? "," : "") << m.acting[i];
    os << "] avatars=[";
    for (size_t i = 0; i < m.avatar_map.size(); ++i)
      os << (i ? "," : "") << m.avatar_map[i];
    os << "]";
    if (!m.fresh.empty()) {
      os << " fresh=[";
      for (size_t i = 0; i < m.fresh.size(); ++i)
        os << (i ? "," : "") << m.fresh[i];
      os << "]";
    }
    os << "\n";
  }
  return os.str();
}

Play parse_play(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Play play;
  bool have_channels = false;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ShapeError("play line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    auto num = [&]() {
      int v;
      if (!(ls >> v)) fail("expected a number");
      return v;
    };
    const Position& cur = final_of(play);
    auto arity = [&](int pl) {
      if (pl < 0 || pl >= static_cast<int>(cur.players.size()))
        fail("no player " + std::to_string(pl));
      return cur.players[pl].arity;
    };
    if (word == "channels") {
      if (have_channels) fail("channels declared twice");
      play.initial.channels = num();
      have_channels = true;
    } else if (word == "player") {
      if (!play.steps.empty()) fail("players must precede moves");
      Player pl;
      int c;
      while (ls >> c) {
        if (c < 0 || c >= play.initial.channels) fail("channel out of range");
        pl.attach.push_back(c);
      }
      pl.arity = static_cast<int>(pl.attach.size());
      play.initial.players.push_back(std::move(pl));
    } else if (word == "fork" || word == "forkl" || word == "forkr" ||
               word == "tick" || word == "nu") {
      int pl = num();
      int n = arity(pl);
      SeedKind k = word == "fork"    ? SeedKind::fork(n)
                   : word == "forkl" ? SeedKind::forkl(n)
                   : word == "forkr" ? SeedKind::forkr(n)
                   : word == "tick"  ? SeedKind::tick(n)
                                     : SeedKind::nu(n);
      play.steps.push_back(instantiate(k, cur, {pl}));
    } else if (word == "in") {
      int pl = num(), a = num();
      play.steps.push_back(instantiate(SeedKind::in(arity(pl), a), cur, {pl}));
    } else if (word == "out") {
      int pl = num(), a = num(), b = num();
      play.steps.push_back(
          instantiate(SeedKind::out(arity(pl), a, b), cur, {pl}));
    } else if (word == "tau") {
      int s = num(), c = num(), d = num(), r = num(), a = num();
      play.steps.push_back(instantiate(
          SeedKind::tau(arity(r), a, arity(s), c, d), cur, {s, r}));
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  if (!have_channels) throw ShapeError("play file must declare channels");
  return play;
}

}  // namespace pigame
