#pragma once

// Brute-force restriction oracle. Walks the full play and, at every step,
// explores every legal emission for the tracked sub-position — including
// both orders when a synchronisation splits into its output and input
// halves — returning all complete restricted plays. Bookkeeping is kept in
// the inverse direction from the library (full player -> tracked slot), so
// index errors in either side surface as disagreements.

#include <cassert>
#include <vector>

#include "pigame/moves.hpp"

namespace pigame::testoracle {

using namespace pigame;

struct SubState {
  Position S;
  std::vector<int> fm;  // full player -> tracked slot, -1 when untracked
  std::vector<int> cm;  // tracked channel -> full channel
  std::vector<GlobalMove> steps;
};

// One restricted move to emit: which full (pre-step) players act, and which
// full (post-step) players / channels its avatars and fresh channels embed
// to.
struct Emit {
  SeedKind kk;
  std::vector<int> acting_full;
  std::vector<int> avatar_post;
  std::vector<int> fresh_full;
};

inline SubState apply_option(const SubState& st, const GlobalMove& M,
                             const std::vector<Emit>& emits) {
  SubState w = st;
  std::vector<int> src_of_post(M.result.players.size(), -1);
  for (const Emit& e : emits) {
    std::vector<int> act;
    for (int fb : e.acting_full) {
      assert(w.fm[fb] >= 0);
      act.push_back(w.fm[fb]);
    }
    GlobalMove m2 = instantiate(e.kk, w.S, act);
    for (int& slot : src_of_post)
      if (slot >= 0) slot = m2.spectator_map[slot];
    std::vector<int> nfm(w.fm.size(), -1);
    for (size_t b = 0; b < w.fm.size(); ++b)
      if (w.fm[b] >= 0 && m2.spectator_map[w.fm[b]] >= 0)
        nfm[b] = m2.spectator_map[w.fm[b]];
    assert(e.avatar_post.size() == m2.avatar_map.size());
    for (size_t f = 0; f < m2.avatar_map.size(); ++f)
      src_of_post[e.avatar_post[f]] = m2.avatar_map[f];
    assert(e.fresh_full.size() == m2.fresh.size());
    for (int fc : e.fresh_full) w.cm.push_back(fc);
    w.fm = std::move(nfm);
    w.S = m2.result;
    w.steps.push_back(std::move(m2));
  }
  std::vector<int> nfm(M.result.players.size(), -1);
  for (size_t b = 0; b < w.fm.size(); ++b)
    if (w.fm[b] >= 0) {
      assert(M.spectator_map[b] >= 0);
      nfm[M.spectator_map[b]] = w.fm[b];
    }
  for (size_t p = 0; p < src_of_post.size(); ++p)
    if (src_of_post[p] >= 0) nfm[p] = src_of_post[p];
  w.fm = std::move(nfm);
  return w;
}

inline std::vector<std::vector<Emit>> emissions(const SubState& st,
                                                const GlobalMove& M) {
  const SeedKind& k = M.seed.kind;
  if (k.k == SeedKind::K::Tau) {
    int ts = st.fm[M.acting[0]], tr = st.fm[M.acting[1]];
    int full_recv = M.result.players[M.avatar_map[1]].attach[k.n];
    Emit out_half{SeedKind::out(k.m, k.c, k.d), {M.acting[0]},
                  {M.avatar_map[0]}, {}};
    Emit in_half{SeedKind::in(k.n, k.a), {M.acting[1]},
                 {M.avatar_map[1]}, {full_recv}};
    if (ts < 0 && tr < 0) return {{}};
    if (ts >= 0 && tr < 0) return {{out_half}};
    if (ts < 0 && tr >= 0) return {{in_half}};
    bool carrier_shared =
        st.S.players[ts].attach[k.c - 1] == st.S.players[tr].attach[k.a - 1];
    if (carrier_shared)
      return {{Emit{k, {M.acting[0], M.acting[1]},
                    {M.avatar_map[0], M.avatar_map[1]}, {}}}};
    return {{out_half, in_half}, {in_half, out_half}};
  }
  if (st.fm[M.acting[0]] < 0) return {{}};
  return {{Emit{k, {M.acting[0]}, M.avatar_map, M.fresh}}};
}

struct OracleResult {
  Restriction restr;
  // the walk that produced it, for debugging
};

// All restricted plays the keep/replace rules allow, in every emission
// order.
inline std::vector<Restriction> oracle_restrict(const Play& p,
                                                const HorizMap& r) {
  check_horiz(r);
  SubState init;
  init.S = r.source;
  init.fm.assign(p.initial.players.size(), -1);
  for (size_t s = 0; s < r.player_map.size(); ++s)
    init.fm[r.player_map[s]] = static_cast<int>(s);
  init.cm = r.chan_map;
  std::vector<SubState> states{init};
  for (const GlobalMove& M : p.steps) {
    std::vector<SubState> next;
    for (const SubState& st : states)
      for (const auto& opt : emissions(st, M))
        next.push_back(apply_option(st, M, opt));
    states = std::move(next);
  }
  std::vector<Restriction> out;
  for (SubState& st : states) {
    Restriction res;
    res.play.initial = r.source;
    res.play.steps = std::move(st.steps);
    res.final_embed.source = final_of(res.play);
    res.final_embed.target = final_of(p);
    res.final_embed.chan_map = std::move(st.cm);
    res.final_embed.player_map.assign(res.final_embed.source.players.size(),
                                      -1);
    for (size_t b = 0; b < st.fm.size(); ++b)
      if (st.fm[b] >= 0)
        res.final_embed.player_map[st.fm[b]] = static_cast<int>(b);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace pigame::testoracle
