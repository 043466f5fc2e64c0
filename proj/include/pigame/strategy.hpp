#pragma once

// Syntactic strategies over one player and over whole positions. A definite
// strategy is a total table from the basic seeds at its arity to strategies;
// a strategy is an ordered sum of definite summands (empty = the inert
// strategy that accepts nothing beyond the empty view). Processes translate
// into definite strategies; recursive definitions are kept finite by
// storing named references that are translated on demand.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pigame/moves.hpp"
#include "pigame/process.hpp"
#include "pigame/reduction.hpp"

namespace pigame {

// Cap on on-demand unfolding of named references during translation and
// resolution; exceeding it raises UnfoldLimit (unguarded recursion).
inline constexpr int kRefFuel = 256;

struct Strategy;

// Total table over the basic seeds at one arity. Entries hold the strategy
// played after that seed: same arity for forkl/forkr/tick/out, arity+1 for
// nu/in.
struct DefiniteStrategy {
  int arity = 0;
  std::shared_ptr<Strategy> forkl, forkr, tick, nu;
  std::vector<std::shared_ptr<Strategy>> in;                // index a-1
  std::vector<std::vector<std::shared_ptr<Strategy>>> out;  // [a-1][b-1]
};

// The table mapping every basic seed to the empty strategy.
DefiniteStrategy make_definite(int arity);

// One summand of a sum: an inline table, or a named process whose
// translation is produced on demand (keeping recursive definitions finite).
struct DSummand {
  std::optional<DefiniteStrategy> table;
  std::string ref;  // definition name, when !table
  Renaming ref_rn;  // definition context -> this strategy's arity
};

// Ordered sum of definite summands. Order is significant.
struct Strategy {
  int arity = 0;
  std::vector<DSummand> summands;
};

Strategy empty_strategy(int arity);

// Translation of a process into a definite strategy: a guarded sum becomes
// the table sending each basic seed to the source-ordered sum of the
// matching branches' continuations; parallel composition maps forkl/forkr
// to the two sides, restriction maps nu to the body; calls at the head are
// unfolded (UnfoldLimit when that diverges), calls in continuations become
// references.
DefiniteStrategy translate(const TypedProcess& p, const DefTable& defs,
                           int fuel = kRefFuel);

// Force a summand into table form.
DefiniteStrategy resolve_summand(const DSummand& s, const DefTable& defs,
                                 int fuel = kRefFuel);

// Table lookup; throws ShapeError when b is not basic at d's arity.
const Strategy& derive(const DefiniteStrategy& d, const SeedKind& b);

// 1-based summand selection; the operation is partial and throws ShapeError
// when i is out of range (callers read that as "no such transition").
DefiniteStrategy pick(const Strategy& s, int i, const DefTable& defs,
                      int fuel = kRefFuel);

// Number of ways the strategy accepts the view: sums multiply branch
// choices along the view. Nonzero iff accepted.
std::uint64_t accepts_view(const Strategy& s, const View& v,
                           const DefTable& defs, int fuel = kRefFuel);
std::uint64_t accepts_view(const DefiniteStrategy& d, const View& v,
                           const DefTable& defs, int fuel = kRefFuel);

// Renaming action on strategies: ports are mapped through rn (which may
// identify ports attached to the same channel), entries landing on the same
// basic seed are summed in increasing source-port order, and continuations
// under in/nu carry the lifted map. References compose their stored
// renaming. Counts the ways of the mapped views:
// accepts_view(rename_definite(d, rn), v) sums accepts_view(d, w) over the
// rn-preimages w of v.
DefiniteStrategy rename_definite(const DefiniteStrategy& d, const Renaming& rn);
Strategy rename_strategy(const Strategy& s, const Renaming& rn);

// A strategy for every player of a position.
struct PositionStrategy {
  Position base;
  std::vector<Strategy> assign;
};

struct DefinitePositionStrategy {
  Position base;
  std::vector<DefiniteStrategy> assign;
};

// True iff every player accepts every one of its views of the play.
bool accepts_play(const PositionStrategy& ps, const Play& p,
                  const DefTable& defs, int fuel = kRefFuel);

// Stable textual form: tables print as <seed: strategy; ...> listing only
// non-empty entries, sums as (+ summand ...), references as
// (ref NAME c1 c2 ...). parse(print(s)) reproduces s exactly.
std::string print_strategy(const Strategy& s);
std::string print_definite(const DefiniteStrategy& d);
Strategy parse_strategy(const std::string& text, int arity);
DefiniteStrategy parse_definite(const std::string& text, int arity);

}  // namespace pigame
