#pragma once

// The game-state transition system: a state couples a position with one
// strategy per player, keyed canonically. Successors instantiate every move
// playable on the board, committing each acting player to a summand of its
// sum and each continuation avatar to a branch of the derived entry; edges
// exist exactly for the defined choice tuples. The closed-world fragment
// (synchronisation, restriction, tick, fork) drives a fair-success
// predicate, and states are compared by gluing enumerated tests onto their
// interface and requiring equal verdicts.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pigame/moves.hpp"
#include "pigame/position.hpp"
#include "pigame/process.hpp"
#include "pigame/reduction.hpp"
#include "pigame/strategy.hpp"

namespace pigame {

// A position plus a strategy per player. Keys are equal iff the two states
// are isomorphic as strategy-tagged positions (player/channel renumbering;
// strategies compare by their printed form).
struct SDState {
  PositionStrategy ps;
  std::string key;
  bool operator==(const SDState& o) const { return key == o.key; }
};

// Checks one strategy per player with matching arities, then keys.
SDState make_sd_state(PositionStrategy ps);

// The board with n channels and a single n-ary player attached to all of
// them in order.
Position player_board(int n);

// The process translated onto its board as a one-summand strategy.
SDState translate_state(const TypedProcess& p, const DefTable& defs);

enum class SDLabel { Heart, Id, Silent };

// One transition. `summand` holds the 1-based sum component committed by
// each acting player (aligned with move.acting); `pick` holds the 1-based
// branch of the derived entry taken by each continuation player (aligned
// with move.seed.avatar). The reflexive self-edge carries an empty move and
// no choices.
struct SDEdge {
  GlobalMove move;
  std::vector<int> summand;
  std::vector<int> pick;
  SDLabel label = SDLabel::Silent;
  SDState target;
};

// Every defined transition: per player the basic seeds at its arity plus
// fork, synchronisations for carrier-sharing pairs, one edge per choice
// tuple, and the id self-edge first. Spectators keep their strategies
// untouched; tick edges are the only Heart-labelled ones.
std::vector<SDEdge> succ(const SDState& s, const DefTable& defs);

// The subset of succ whose moves are synchronisation, restriction, tick, or
// fork (plus the id self-edge): the dynamics visible with no environment.
std::vector<SDEdge> closed_world_succ(const SDState& s, const DefTable& defs);

// Behaviour-preserving shrink: drops players that hold a bare empty table
// (they accept only the empty view and can never move), prunes ports no
// entry or stored reference map of their strategy can ever mention
// (collapsing ports that share a channel onto the first occurrence), drops
// channels no player is attached to, and reorders every sum by its printed
// form so that states differing only in branch numbering share a key. The
// closed-world transition graph is unchanged up to isomorphism; recursive
// strategies revisit finitely many condensed states where the raw states
// would keep growing.
SDState condense(const SDState& s);

// Fair success over the closed-world graph: InBot iff from every silently
// reachable state a tick stays reachable. A player offering no summand at
// all admits no run whatsoever, so such states pass vacuously. States are
// condensed during the search so that recursive strategies saturate.
// Verdicts are exact when the closed-world closure saturates within
// node_budget and never flip as the budget grows.
BotResult bot_d(const SDState& s, const DefTable& defs, size_t node_budget);

// A test: a map gluing the state's interface (its channels) into a host
// position, plus a strategy for every host player.
struct SemTest {
  HorizMap h;          // interface of the tested state -> host position
  PositionStrategy t;  // strategies of the host players; t.base == h.target
  std::string label;   // stable printable name for reports
};

// The glued state: host players keep their strategies, the tested state's
// players keep theirs. Throws ShapeError when the test does not fit the
// state's interface.
SDState compose_test(const SDState& s, const SemTest& t);

// Host tests mirroring the reduction-side enumeration one to one (same
// order, same labels): every context-fusing map with at most one extra
// private channel, paired with every observer translated onto a one-player
// board.
std::vector<SemTest> enumerate_sem_tests(int channels, int k);

Verdict passes_d(const SDState& s, const SemTest& t, const DefTable& defs,
                 size_t node_budget);

struct SDFairResult {
  enum class Kind { Distinguished, AgreeUpTo, Unknown };
  Kind kind = Kind::Unknown;
  int k = 0;
  std::optional<SemTest> test;  // the distinguishing test
  Verdict left = Verdict::Unknown, right = Verdict::Unknown;
  size_t tests_run = 0;
};

// Compare by testing, mirroring the reduction-side comparison: exact
// differing verdicts distinguish; all-equal exact verdicts agree up to k;
// otherwise Unknown.
SDFairResult fair_equiv_d(const SDState& s1, const SDState& s2, int k,
                          size_t node_budget, const DefTable& defs);

// One line: channel count plus each player's arity and printed strategy.
std::string describe(const SDState& s);

}  // namespace pigame
