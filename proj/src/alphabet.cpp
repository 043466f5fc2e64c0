#include "pigame/alphabet.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace pigame {

bool AVertex::in_image(int a) const {
  return std::find(h.begin(), h.end(), a) != h.end();
}

std::string AVertex::str() const {
  std::ostringstream out;
  out << "h:[";
  for (int d = 1; d <= delta; ++d) {
    if (d > 1) out << ",";
    out << d << "↦" << h[d - 1];
  }
  out << "] Δ=" << delta << " Γ=" << gamma;
  return out.str();
}

std::string ALabel::str() const {
  switch (k) {
    case K::Heart:
      return "heart";
    case K::Delay:
      return "delay";
    case K::NuStep:
      return "nu";
    case K::Inp:
      return "i(" + std::to_string(a) + ")";
    case K::Outp:
      return "o(" + std::to_string(a) + "," + std::to_string(b) + ")";
    case K::PartialSync:
      return "o(" + std::to_string(a) + "," + std::to_string(b) + ")>i(" +
             std::to_string(c) + ")";
  }
  return "?";
}

AVertex apply_label(const AVertex& v, const ALabel& l) {
  AVertex t = v;
  switch (l.k) {
    case ALabel::K::Heart:
    case ALabel::K::Delay:
      return t;
    case ALabel::K::NuStep:
      t.gamma += 1;
      return t;
    case ALabel::K::Inp:
      if (!v.in_image(l.a))
        throw TypeError("input carrier is not visible at the interface");
      t.delta += 1;
      t.gamma += 1;
      t.h.push_back(t.gamma);
      return t;
    case ALabel::K::Outp:
      if (!v.in_image(l.a))
        throw TypeError("output carrier is not visible at the interface");
      if (l.b < 1 || l.b > v.gamma)
        throw TypeError("sent channel out of range");
      t.delta += 1;
      t.h.push_back(l.b);
      return t;
    case ALabel::K::PartialSync:
      if (!v.in_image(l.a) || !v.in_image(l.c))
        throw TypeError("partial synchronisation carriers must be visible");
      if (l.a == l.c)
        throw TypeError("partial synchronisation needs distinct carriers");
      if (l.b < 1 || l.b > v.gamma || v.in_image(l.b))
        throw TypeError(
            "partial synchronisation sends a non-visible local channel");
      t.gamma += 1;
      return t;
  }
  throw TypeError("malformed label");
}

std::vector<AEdge> a_successors(const AVertex& v) {
  std::vector<AEdge> out;
  auto push = [&](const ALabel& l) {
    out.push_back(AEdge{l, v, apply_label(v, l)});
  };
  push(ALabel::heart());
  push(ALabel::delay());
  push(ALabel::nu_step());
  std::set<int> image(v.h.begin(), v.h.end());
  for (int a : image) push(ALabel::inp(a));
  for (int a : image)
    for (int b = 1; b <= v.gamma; ++b) push(ALabel::outp(a, b));
  for (int a : image)
    for (int c : image) {
      if (a == c) continue;
      for (int b = 1; b <= v.gamma; ++b)
        if (!image.count(b)) push(ALabel::partial_sync(a, b, c));
    }
  return out;
}

// ---- lazy transition systems ---------------------------------------------

AVertex ALts::vertex(int state) const {
  std::shared_lock lk(mu_);
  return vertices_.at(state);
}

size_t ALts::discovered() const {
  std::shared_lock lk(mu_);
  return vertices_.size();
}

std::vector<AStep> ALts::edges(int state) {
  {
    std::shared_lock lk(mu_);
    const auto& slot = memo_.at(state);
    if (slot.has_value()) return *slot;
  }
  std::unique_lock lk(mu_);
  if (!memo_.at(state).has_value()) {
    AVertex at = vertices_.at(state);
    memo_[state] = expand(state, at);
  }
  return *memo_[state];
}

int ALts::intern(const std::string& key, AVertex v) {
  auto [it, fresh] = index_.emplace(key, static_cast<int>(vertices_.size()));
  if (fresh) {
    vertices_.push_back(std::move(v));
    memo_.emplace_back();
  }
  return it->second;
}

bool ALts::known(const std::string& key) const {
  return index_.count(key) > 0;
}

namespace {

// ---- the reduction side --------------------------------------------------

class PiALts : public ALts {
 public:
  PiALts(const PiState& s, const DefTable& defs, const AVertex& iface)
      : defs_(defs) {
    if (iface.gamma != s.ctx())
      throw TypeError("interface does not match the state's context");
    states_.push_back(s);
    intern(s.key + "|" + iface.str(), iface);
  }

 protected:
  std::vector<AStep> expand(int state, const AVertex& at) override;

 private:
  int intern_state(PiState s, const AVertex& v) {
    std::string key = s.key + "|" + v.str();
    if (!known(key)) states_.push_back(s);
    return intern(key, v);
  }

  const DefTable& defs_;
  std::vector<PiState> states_;
};

// The canonical form keeps its restrictions prenex, so a state is
// (ctx, nus, components) with components typed at ctx + nus. Visible
// actions fire a branch of one component under the remaining restrictions;
// the received channel becomes the next free level, shifting the
// restriction levels up by one.
Renaming shift_over(int ctx, int nus) {
  Renaming rn;
  rn.source = ctx + nus;
  rn.target = ctx + 1 + nus;
  for (int i = 1; i <= ctx; ++i) rn.map.push_back(i);
  for (int i = 1; i <= nus; ++i) rn.map.push_back(ctx + 1 + i);
  return rn;
}

PiState fire_input(const PiState& s, size_t comp, size_t branch,
                   const DefTable& defs) {
  const CanonTerm& c = s.canon;
  Renaming plain = shift_over(c.ctx, c.nus);
  Renaming recv = plain;
  recv.source += 1;
  recv.map.push_back(c.ctx + 1);
  CanonTerm t;
  t.ctx = c.ctx + 1;
  t.nus = c.nus;
  for (size_t i = 0; i < c.components.size(); ++i) {
    const ProcessPtr& p = c.components[i];
    if (i == comp)
      t.components.push_back(rename(p->branches[branch].cont, recv));
    else
      t.components.push_back(rename(p, plain));
  }
  return normalize(rebuild(t), defs);
}

PiState fire_output(const PiState& s, size_t comp, size_t branch,
                    const DefTable& defs) {
  const CanonTerm& c = s.canon;
  CanonTerm t;
  t.ctx = c.ctx;
  t.nus = c.nus;
  for (size_t i = 0; i < c.components.size(); ++i) {
    const ProcessPtr& p = c.components[i];
    t.components.push_back(i == comp ? p->branches[branch].cont : p);
  }
  return normalize(rebuild(t), defs);
}

PiState fire_pair(const PiState& s, size_t out_comp, size_t out_branch,
                  size_t in_comp, size_t in_branch, const DefTable& defs) {
  const CanonTerm& c = s.canon;
  Renaming plain = shift_over(c.ctx, c.nus);
  Renaming recv = plain;
  recv.source += 1;
  recv.map.push_back(c.ctx + 1);
  CanonTerm t;
  t.ctx = c.ctx + 1;
  t.nus = c.nus;
  for (size_t i = 0; i < c.components.size(); ++i) {
    const ProcessPtr& p = c.components[i];
    if (i == out_comp)
      t.components.push_back(rename(p->branches[out_branch].cont, plain));
    else if (i == in_comp)
      t.components.push_back(rename(p->branches[in_branch].cont, recv));
    else
      t.components.push_back(rename(p, plain));
  }
  return normalize(rebuild(t), defs);
}

PiState pop_nu(const PiState& s, int which, const DefTable& defs) {
  const CanonTerm& c = s.canon;
  Renaming rn;
  rn.source = c.ctx + c.nus;
  rn.target = c.ctx + 1 + (c.nus - 1);
  for (int i = 1; i <= c.ctx; ++i) rn.map.push_back(i);
  for (int j = 1; j <= c.nus; ++j) {
    if (j < which)
      rn.map.push_back(c.ctx + 1 + j);
    else if (j == which)
      rn.map.push_back(c.ctx + 1);
    else
      rn.map.push_back(c.ctx + j);
  }
  CanonTerm t;
  t.ctx = c.ctx + 1;
  t.nus = c.nus - 1;
  for (const ProcessPtr& p : c.components)
    t.components.push_back(rename(p, rn));
  return normalize(rebuild(t), defs);
}

std::vector<AStep> PiALts::expand(int state, const AVertex& at) {
  PiState s = states_.at(state);
  const AVertex& v = at;
  std::vector<AStep> out;
  // Pending restrictions are opened before anything else acts: this keeps
  // the interleaving aligned with the agent view, where a restriction is a
  // move of its own and the body only plays afterwards.
  if (s.canon.nus > 0) {
    for (int i = 1; i <= s.canon.nus; ++i) {
      AVertex t = apply_label(v, ALabel::nu_step());
      out.push_back({ALabel::nu_step(), intern_state(pop_nu(s, i, defs_), t)});
    }
    return out;
  }
  for (const PiEdge& e : successors(s, defs_)) {
    if (e.label == PiLabel::Tau)
      out.push_back({ALabel::delay(), intern_state(e.target, v)});
    else if (e.label == PiLabel::Heart)
      out.push_back({ALabel::heart(), intern_state(e.target, v)});
  }
  const auto& comps = s.canon.components;
  int ctx = s.canon.ctx;
  for (size_t i = 0; i < comps.size(); ++i) {
    if (comps[i]->kind != Process::Kind::Sum) continue;
    for (size_t bi = 0; bi < comps[i]->branches.size(); ++bi) {
      const Prefix& pf = comps[i]->branches[bi].pfx;
      if (pf.kind == Prefix::Kind::Input && pf.a <= ctx && v.in_image(pf.a)) {
        ALabel l = ALabel::inp(pf.a);
        out.push_back(
            {l, intern_state(fire_input(s, i, bi, defs_), apply_label(v, l))});
      }
      if (pf.kind == Prefix::Kind::Output && pf.a <= ctx && pf.b <= ctx &&
          v.in_image(pf.a)) {
        ALabel l = ALabel::outp(pf.a, pf.b);
        out.push_back(
            {l, intern_state(fire_output(s, i, bi, defs_), apply_label(v, l))});
        if (!v.in_image(pf.b)) {
          for (size_t j = 0; j < comps.size(); ++j) {
            if (j == i || comps[j]->kind != Process::Kind::Sum) continue;
            for (size_t bj = 0; bj < comps[j]->branches.size(); ++bj) {
              const Prefix& pg = comps[j]->branches[bj].pfx;
              if (pg.kind != Prefix::Kind::Input || pg.a > ctx ||
                  !v.in_image(pg.a) || pg.a == pf.a)
                continue;
              ALabel ps = ALabel::partial_sync(pf.a, pf.b, pg.a);
              out.push_back({ps, intern_state(fire_pair(s, i, bi, j, bj, defs_),
                                              apply_label(v, ps))});
            }
          }
        }
      }
    }
  }
  return out;
}

// ---- the strategy side -----------------------------------------------------

std::string raw_sd_key(const SDState& s) {
  std::ostringstream out;
  out << s.ps.base.channels;
  for (size_t i = 0; i < s.ps.base.players.size(); ++i) {
    const Player& pl = s.ps.base.players[i];
    out << "|" << pl.arity << "@";
    for (int c : pl.attach) out << c << ",";
    out << print_strategy(s.ps.assign[i]);
  }
  return out.str();
}

class SdALts : public ALts {
 public:
  SdALts(const SDState& s, const DefTable& defs, const AVertex& iface)
      : defs_(defs) {
    if (iface.gamma != s.ps.base.channels)
      throw TypeError("interface does not match the board");
    states_.push_back(s);
    intern(raw_sd_key(s) + "|" + iface.str(), iface);
  }

 protected:
  std::vector<AStep> expand(int state, const AVertex& at) override;

 private:
  int intern_state(SDState s, const AVertex& v) {
    std::string key = raw_sd_key(s) + "|" + v.str();
    if (!known(key)) states_.push_back(s);
    return intern(key, v);
  }

  int board_channel(const GlobalMove& m, int port) const {
    return m.base.players[m.acting[0]].attach[port - 1] + 1;  // 1-based
  }

  const DefTable& defs_;
  std::vector<SDState> states_;
};

std::vector<AStep> SdALts::expand(int state, const AVertex& at) {
  SDState s = states_.at(state);
  const AVertex& v = at;
  std::vector<AStep> out;
  std::vector<SDEdge> es = succ(s, defs_);
  for (const SDEdge& e : es) {
    if (e.label == SDLabel::Id) continue;  // self-edges have no image
    switch (e.move.seed.kind.k) {
      case SeedKind::K::Tick:
        out.push_back({ALabel::heart(), intern_state(e.target, v)});
        break;
      case SeedKind::K::Fork:
      case SeedKind::K::Tau:
        out.push_back({ALabel::delay(), intern_state(e.target, v)});
        break;
      case SeedKind::K::Nu: {
        AVertex t = apply_label(v, ALabel::nu_step());
        out.push_back({ALabel::nu_step(), intern_state(e.target, t)});
        break;
      }
      case SeedKind::K::In: {
        int ch = board_channel(e.move, e.move.seed.kind.a);
        if (v.in_image(ch)) {
          ALabel l = ALabel::inp(ch);
          out.push_back({l, intern_state(e.target, apply_label(v, l))});
        }
        break;
      }
      case SeedKind::K::Out: {
        int ch_a = board_channel(e.move, e.move.seed.kind.a);
        int ch_b = board_channel(e.move, e.move.seed.kind.b);
        if (!v.in_image(ch_a)) break;
        ALabel l = ALabel::outp(ch_a, ch_b);
        out.push_back({l, intern_state(e.target, apply_label(v, l))});
        // An output and another player's input on a distinct visible
        // carrier combine into one partial synchronisation when the sent
        // channel is not itself visible.
        if (v.in_image(ch_b)) break;
        int cont = e.move.avatar_map[0];
        for (const SDEdge& f : succ(e.target, defs_)) {
          if (f.move.seed.kind.k != SeedKind::K::In) continue;
          if (f.move.acting[0] == cont) continue;
          int ch_c = board_channel(f.move, f.move.seed.kind.a);
          if (!v.in_image(ch_c) || ch_c == ch_a) continue;
          ALabel ps = ALabel::partial_sync(ch_a, ch_b, ch_c);
          out.push_back({ps, intern_state(f.target, apply_label(v, ps))});
        }
        break;
      }
      default:
        break;  // identity self-edges and half-forks have no image
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<ALts> project_pi(const PiState& s, const DefTable& defs,
                                 const AVertex& iface) {
  return std::make_unique<PiALts>(s, defs, iface);
}

std::unique_ptr<ALts> project_sd(const SDState& s, const DefTable& defs,
                                 const AVertex& iface) {
  return std::make_unique<SdALts>(s, defs, iface);
}

// ---- complementary sequences ----------------------------------------------

std::optional<std::vector<ALabel>> merge_complementary(
    const std::vector<ALabel>& w1, const AVertex& v1,
    const std::vector<ALabel>& w2, const AVertex& v2) {
  if (v1.delta != v2.delta)
    throw TypeError("complementary sequences must share an environment");
  // Vertices along each sequence; apply_label also validates typing.
  std::vector<AVertex> u1{v1}, u2{v2};
  for (const ALabel& l : w1) u1.push_back(apply_label(u1.back(), l));
  for (const ALabel& l : w2) u2.push_back(apply_label(u2.back(), l));
  size_t n1 = w1.size(), n2 = w2.size();
  std::vector<std::vector<char>> dead(n1 + 1, std::vector<char>(n2 + 1, 0));
  std::vector<ALabel> merged;
  auto share_carrier = [](const AVertex& a, int la, const AVertex& b,
                          int lb) {
    for (int d = 0; d < a.delta; ++d)
      if (a.h[d] == la && b.h[d] == lb) return true;
    return false;
  };
  std::function<bool(size_t, size_t)> zip = [&](size_t i, size_t j) -> bool {
    if (i == n1 && j == n2) return true;
    if (dead[i][j]) return false;
    if (i < n1 &&
        (w1[i].k == ALabel::K::Delay || w1[i].k == ALabel::K::Heart)) {
      merged.push_back(w1[i]);
      if (zip(i + 1, j)) return true;
      merged.pop_back();
    }
    if (j < n2 &&
        (w2[j].k == ALabel::K::Delay || w2[j].k == ALabel::K::Heart)) {
      merged.push_back(w2[j]);
      if (zip(i, j + 1)) return true;
      merged.pop_back();
    }
    if (i < n1 && j < n2) {
      bool io = w1[i].k == ALabel::K::Inp && w2[j].k == ALabel::K::Outp &&
                share_carrier(u1[i], w1[i].a, u2[j], w2[j].a);
      bool oi = w1[i].k == ALabel::K::Outp && w2[j].k == ALabel::K::Inp &&
                share_carrier(u1[i], w1[i].a, u2[j], w2[j].a);
      if (io || oi) {
        merged.push_back(ALabel::delay());
        if (zip(i + 1, j + 1)) return true;
        merged.pop_back();
      }
    }
    dead[i][j] = 1;
    return false;
  };
  if (zip(0, 0)) return merged;
  return std::nullopt;
}

bool complementary(const std::vector<ALabel>& w1, const AVertex& v1,
                   const std::vector<ALabel>& w2, const AVertex& v2) {
  return merge_complementary(w1, v1, w2, v2).has_value();
}

// ---- weak bisimilarity ------------------------------------------------------

namespace {

struct Explored {
  std::vector<std::vector<AStep>> edges;
  bool complete = false;
};

Explored explore(ALts& l, size_t budget) {
  Explored g;
  size_t next = 0;
  while (next < l.discovered()) {
    if (l.discovered() > budget) return g;
    g.edges.push_back(l.edges(static_cast<int>(next)));
    ++next;
  }
  if (l.discovered() > budget) return g;
  g.complete = true;
  return g;
}

// Reflexive-transitive closure over Delay edges.
std::vector<std::vector<char>> delay_closure(const Explored& g) {
  size_t n = g.edges.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (size_t s = 0; s < n; ++s) {
    std::deque<size_t> q{s};
    r[s][s] = 1;
    while (!q.empty()) {
      size_t x = q.front();
      q.pop_front();
      for (const AStep& e : g.edges[x])
        if (e.label.k == ALabel::K::Delay && !r[s][e.target]) {
          r[s][e.target] = 1;
          q.push_back(static_cast<size_t>(e.target));
        }
    }
  }
  return r;
}

// Weak observable steps: states reachable by Delay*, one l-edge, Delay*.
std::map<ALabel, std::vector<std::vector<char>>> weak_obs(
    const Explored& g, const std::vector<std::vector<char>>& clo) {
  size_t n = g.edges.size();
  std::map<ALabel, std::vector<std::vector<char>>> w;
  for (size_t s = 0; s < n; ++s)
    for (size_t m = 0; m < n; ++m) {
      if (!clo[s][m]) continue;
      for (const AStep& e : g.edges[m]) {
        if (e.label.k == ALabel::K::Delay) continue;
        auto [it, fresh] = w.try_emplace(
            e.label, std::vector<std::vector<char>>(
                         n, std::vector<char>(n, 0)));
        for (size_t t = 0; t < n; ++t)
          if (clo[e.target][t]) it->second[s][t] = 1;
      }
    }
  return w;
}

}  // namespace

BisimResult weak_bisim(ALts& l1, ALts& l2, size_t state_budget) {
  BisimResult res;
  Explored g1, g2;
  try {
    g1 = explore(l1, state_budget);
    g2 = explore(l2, state_budget);
  } catch (const UnfoldLimit&) {
    res.kind = BisimResult::Kind::Unknown;
    return res;
  }
  res.explored = g1.edges.size() + g2.edges.size();
  if (!g1.complete || !g2.complete) {
    res.kind = BisimResult::Kind::Unknown;
    return res;
  }
  size_t n1 = g1.edges.size(), n2 = g2.edges.size();
  auto clo1 = delay_closure(g1), clo2 = delay_closure(g2);
  auto w1 = weak_obs(g1, clo1), w2 = weak_obs(g2, clo2);
  std::vector<std::vector<char>> rel(n1, std::vector<char>(n2, 0));
  std::vector<std::vector<ALabel>> why(n1, std::vector<ALabel>(n2));
  for (size_t s = 0; s < n1; ++s)
    for (size_t t = 0; t < n2; ++t)
      rel[s][t] = l1.vertex(static_cast<int>(s)) ==
                  l2.vertex(static_cast<int>(t));
  auto matched = [&](size_t s, size_t t, const AStep& e, bool from_left) {
    size_t here = from_left ? t : s;
    if (e.label.k == ALabel::K::Delay) {
      const auto& clo = from_left ? clo2 : clo1;
      size_t n = from_left ? n2 : n1;
      for (size_t u = 0; u < n; ++u)
        if (clo[here][u] && (from_left ? rel[e.target][u] : rel[u][e.target]))
          return true;
      return false;
    }
    const auto& w = from_left ? w2 : w1;
    auto it = w.find(e.label);
    if (it == w.end()) return false;
    size_t n = from_left ? n2 : n1;
    for (size_t u = 0; u < n; ++u)
      if (it->second[here][u] &&
          (from_left ? rel[e.target][u] : rel[u][e.target]))
        return true;
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t s = 0; s < n1; ++s)
      for (size_t t = 0; t < n2; ++t) {
        if (!rel[s][t]) continue;
        for (const AStep& e : g1.edges[s])
          if (!matched(s, t, e, true)) {
            rel[s][t] = 0;
            why[s][t] = e.label;
            changed = true;
            break;
          }
        if (!rel[s][t]) continue;
        for (const AStep& e : g2.edges[t])
          if (!matched(s, t, e, false)) {
            rel[s][t] = 0;
            why[s][t] = e.label;
            changed = true;
            break;
          }
      }
  }
  if (rel[0][0]) {
    res.kind = BisimResult::Kind::Bisimilar;
  } else {
    res.kind = BisimResult::Kind::NotBisimilar;
    res.witness = l1.vertex(0) == l2.vertex(0) ? why[0][0].str()
                                               : "interface mismatch";
  }
  return res;
}

// ---- corpus preprocessing ----------------------------------------------------

TypedProcess encode_nu_in_sum(const TypedProcess& p) {
  if (p.proc->kind != Process::Kind::Nu) return p;
  int n = p.ctx;
  ProcessPtr inner = rename(p.proc, Renaming::inclusion(n, n + 1));
  ProcessPtr sender = Process::sum(
      {Branch{Prefix::output(n + 1, n + 1), inner}});
  ProcessPtr receiver =
      Process::sum({Branch{Prefix::input(n + 1), Process::nil()}});
  return {Process::nu(Process::par(sender, receiver)), n};
}

std::vector<std::string> dump_lts(ALts& l, size_t max_states) {
  std::vector<std::string> lines;
  size_t next = 0;
  while (next < l.discovered() && next < max_states) {
    std::vector<AStep> es = l.edges(static_cast<int>(next));
    for (const AStep& e : es) {
      std::ostringstream line;
      line << "s" << next << "[" << l.vertex(static_cast<int>(next)).str()
           << "] -" << e.label.str() << "-> s" << e.target << "["
           << l.vertex(e.target).str() << "]";
      lines.push_back(line.str());
    }
    ++next;
  }
  return lines;
}

}  // namespace pigame
