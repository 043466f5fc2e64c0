#pragma once

// Random positions, plays, and sub-position embeddings for property tests.

#include <map>
#include <random>

#include "pigame/moves.hpp"

namespace pigame::testgen {

struct PosGen {
  std::mt19937 rng;
  explicit PosGen(unsigned seed) : rng(seed) {}

  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  bool coin(double p = 0.5) {
    return std::uniform_real_distribution<>(0, 1)(rng) < p;
  }

  Position position(int max_ch, int max_pl) {
    Position p;
    p.channels = pick(1, max_ch);
    int np = pick(0, max_pl);
    for (int i = 0; i < np; ++i) {
      Player pl;
      pl.arity = pick(0, 3);
      for (int j = 0; j < pl.arity; ++j)
        pl.attach.push_back(pick(0, p.channels - 1));
      p.players.push_back(std::move(pl));
    }
    return p;
  }

  Play play(Position init, int len) {
    Play p;
    p.initial = std::move(init);
    for (int i = 0; i < len; ++i) {
      auto ms = all_moves(final_of(p));
      if (ms.empty()) break;
      p.steps.push_back(ms[pick(0, static_cast<int>(ms.size()) - 1)]);
    }
    return p;
  }

  // Random sub-position embedding into `target`: keeps a subset of the
  // players and splits each channel's port occurrences into one or more
  // source channels (so the map may fuse source channels, like a
  // synchronisation viewed from players that do not share the carrier).
  HorizMap sub_embed(const Position& target) {
    HorizMap r;
    r.target = target;
    Position s;
    std::map<int, std::vector<int>> blocks;  // target chan -> source chans
    auto src_for = [&](int tc) {
      auto& v = blocks[tc];
      if (v.empty() || coin(0.3)) {
        v.push_back(s.channels);
        r.chan_map.push_back(tc);
        return s.channels++;
      }
      return v[pick(0, static_cast<int>(v.size()) - 1)];
    };
    for (size_t bp = 0; bp < target.players.size(); ++bp) {
      if (!coin(0.7)) continue;
      Player pl;
      pl.arity = target.players[bp].arity;
      for (int port = 0; port < pl.arity; ++port)
        pl.attach.push_back(src_for(target.players[bp].attach[port]));
      s.players.push_back(std::move(pl));
      r.player_map.push_back(static_cast<int>(bp));
    }
    if (target.channels > 0 && coin(0.2)) {
      r.chan_map.push_back(pick(0, target.channels - 1));
      s.channels++;
    }
    r.source = std::move(s);
    return r;
  }
};

}  // namespace pigame::testgen
