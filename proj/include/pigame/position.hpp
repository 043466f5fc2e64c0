#pragma once

// Game boards: positions are finite sets of channels plus players, each
// player holding an ordered attachment of channels (its known names).
// Horizontal maps relate positions (injective on players, arbitrary on
// channels); gluing pushes a position into a context along an interface.

#include <stdexcept>
#include <string>
#include <vector>

namespace pigame {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Player {
  int arity = 0;
  std::vector<int> attach;  // size == arity, entries are channel ids
  bool operator==(const Player&) const = default;
};

// Channels are dense ids 0..channels-1.
struct Position {
  int channels = 0;
  std::vector<Player> players;
  bool operator==(const Position&) const = default;
};

// A position with no players; exposes channels for composition.
using Interface = Position;

// Map between positions: total on channels, injective and arity-preserving
// on players, compatible with attachments.
struct HorizMap {
  Position source, target;
  std::vector<int> chan_map;    // size == source.channels
  std::vector<int> player_map;  // size == source.players.size()
  int chan(int c) const { return chan_map.at(c); }
  int player(int p) const { return player_map.at(p); }
  bool operator==(const HorizMap&) const = default;
};

// Throws ShapeError when any invariant fails.
void check_horiz(const HorizMap& h);

HorizMap identity_horiz(const Position& p);

// g after h (h : A -> B, g : B -> C).
HorizMap compose(const HorizMap& g, const HorizMap& h);

struct InterfaceOf {
  Interface iface;
  HorizMap incl;  // iface -> the position
};

InterfaceOf interface_of(const Position& x);

// Pushout of x <-i- iface -f-> context: keeps the context's channels and
// players, then appends x's players and x's non-interface channels (fresh
// ids past the context's). Returns the two injections.
struct Pushout {
  Position result;
  HorizMap from_main;     // x -> result
  HorizMap from_context;  // f.target -> result
};

Pushout glue(const Position& x, const HorizMap& i, const HorizMap& f);

// Canonical key: equal keys iff the positions (with per-player tags) are
// isomorphic by a channel/player renumbering, provided the bounded search
// saturates; otherwise keys are still deterministic and equal keys still
// imply isomorphism. chan_perm/player_perm send old ids to canonical ones.
struct CanonicalPosition {
  std::string key;
  std::vector<int> chan_perm;
  std::vector<int> player_perm;
};

CanonicalPosition canonical_position(const Position& p,
                                     const std::vector<std::string>& player_tags = {});

std::string to_dot(const Position& p);

}  // namespace pigame
