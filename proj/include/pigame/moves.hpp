#pragma once

// The move catalogue and plays. A seed is the local shape of one move
// (fork, tick, input, output, restriction, synchronisation); instantiating
// a seed glues it into a larger position, leaving spectators untouched.
// Plays are composable sequences of instantiated moves; they can be
// restricted along a map into their initial position, and each player of a
// play has a prefix-closed set of views (the basic-seed sequences it can
// see).

#include <string>
#include <vector>

#include "pigame/position.hpp"

namespace pigame {

// Seed shapes. Basic seeds involve one player; Fork and Tau do not (Fork
// has two result players, Tau two acting ones). Channel parameters are
// 1-based ports of the acting player(s):
//   In(n, a)          n-ary player receives on its port a
//   Out(n, a, b)      n-ary player sends its port b on its port a
//   Tau(n, a, m, c, d) m-ary sender emits its port d on its port c; n-ary
//                      receiver listens on its port a (same channel)
struct SeedKind {
  enum class K { Fork, ForkL, ForkR, Tick, In, Out, Nu, Tau };
  K k = K::Tick;
  int n = 0;  // arity of the (receiving, for Tau) player
  int a = 0, b = 0;
  int m = 0, c = 0, d = 0;  // Tau: sender arity and ports

  static SeedKind fork(int n) { return {K::Fork, n, 0, 0, 0, 0, 0}; }
  static SeedKind forkl(int n) { return {K::ForkL, n, 0, 0, 0, 0, 0}; }
  static SeedKind forkr(int n) { return {K::ForkR, n, 0, 0, 0, 0, 0}; }
  static SeedKind tick(int n) { return {K::Tick, n, 0, 0, 0, 0, 0}; }
  static SeedKind in(int n, int a) { return {K::In, n, a, 0, 0, 0, 0}; }
  static SeedKind out(int n, int a, int b) { return {K::Out, n, a, b, 0, 0, 0}; }
  static SeedKind nu(int n) { return {K::Nu, n, 0, 0, 0, 0, 0}; }
  static SeedKind tau(int n, int a, int m, int c, int d) {
    return {K::Tau, n, a, 0, m, c, d};
  }

  bool is_basic() const { return k != K::Fork && k != K::Tau; }
  std::string str() const;
  auto operator<=>(const SeedKind&) const = default;
};

// A seed as a cospan: initial and final positions over a shared channel
// block (initial channel ids persist into the final position; fresh ones
// are appended), with each final player tracking the initial player it
// continues.
struct SeedCospan {
  SeedKind kind;
  Position initial, final;
  std::vector<int> avatar;  // final player -> initial player
  std::vector<int> fresh;   // final channel ids absent from the initial
};

// Throws ShapeError on out-of-range parameters.
SeedCospan seed(SeedKind kind);

// One move played in a position: the seed glued along its interface, with
// every non-acting player kept identically.
struct GlobalMove {
  SeedCospan seed;
  Position base;
  std::vector<int> acting;  // base player per seed-initial player
  Position result;
  // base -> result correspondences (channels are preserved identically)
  std::vector<int> spectator_map;  // base player -> result player, -1 = acting
  std::vector<int> avatar_map;     // seed-final player -> result player
  std::vector<int> fresh;          // result channel ids new in this move
};

// Throws ShapeError on arity mismatch, or for Tau when the chosen players
// do not share the carrier channel.
GlobalMove instantiate(SeedKind kind, const Position& base,
                       const std::vector<int>& acting);

// Every move playable in the position: per player the basic seeds at its
// arity plus Fork, and Tau for every carrier-sharing ordered pair.
std::vector<GlobalMove> all_moves(const Position& base);

struct Play {
  Position initial;
  std::vector<GlobalMove> steps;
};

const Position& final_of(const Play& p);

// Boundary positions must agree exactly.
Play compose(const Play& p, const Play& q);

// Equality up to swapping causally independent adjacent moves: each step is
// named by its seed and the causal names of its acting players, so two
// plays are equivalent iff they share the initial position and the same set
// of step names.
std::vector<std::string> step_names(const Play& p);
bool play_equiv(const Play& p, const Play& q);

// Restriction along r : source -> p.initial. Walks the play forward,
// keeping a move when its acting players are tracked (Tau degrades to the
// sender's Out, the receiver's In with a fresh received channel, or an
// Out-then-In pair when the tracked copies do not share the carrier), and
// dropping moves by untracked players. Returns the embedding of the
// restricted final position into the full one.
struct Restriction {
  Play play;
  HorizMap final_embed;
};

Restriction restrict_play(const Play& p, const HorizMap& r);

// A view: what one player sees of a play — its initial arity and the basic
// seeds along one avatar chain, choosing a branch at each fork.
struct View {
  int arity = 0;
  std::vector<SeedKind> steps;
  auto operator<=>(const View&) const = default;
};

// All views of the given initial player: every branch choice at forks and
// every prefix. Sorted and duplicate-free.
std::vector<View> views_of(const Play& p, int player);

std::string to_dot(const Play& p);

// One line per move: kind, acting players, result players of the avatars.
std::string trace(const Play& p);

// Textual play format (see README): a position block then one move per
// line, e.g. "tau <sender> <c> <d> <receiver> <a>".
Play parse_play(const std::string& text);

}  // namespace pigame
