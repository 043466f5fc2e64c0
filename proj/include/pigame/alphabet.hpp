#pragma once

// The common alphabet both transition systems project onto. A vertex is a
// total map h from the channels the environment knows (delta) into the
// channels the agent knows locally (gamma); labels record success, internal
// delay, creation of a private channel, inputs and outputs on channels the
// environment can see, and partial synchronisations (an internal
// output/input pair whose carriers the agent cannot identify locally but
// the environment might). Projections of the reduction graph and of the
// strategy graph to this alphabet are generated lazily; a weak-bisimilarity
// checker with delay as the silent label compares them.

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "pigame/reduction.hpp"
#include "pigame/strategy_lts.hpp"

namespace pigame {

// Total map delta -> gamma of finite sets, 1-based like every channel map.
struct AVertex {
  int delta = 0;
  int gamma = 0;
  std::vector<int> h;  // size delta, entries in 1..gamma

  bool operator==(const AVertex&) const = default;
  bool in_image(int a) const;  // is local channel a visible?
  std::string str() const;     // "h:[1↦2,2↦1] Δ=2 Γ=2"
};

// One of six shapes. Channels are 1-based local channels of the agent:
//   Heart                success tick, vertex unchanged
//   Delay                internal step, vertex unchanged
//   NuStep               a private channel appears: gamma+1, h unchanged
//   Inp(a)               input on visible a: delta+1, gamma+1, the new
//                        environment channel mapped to the new local one
//   Outp(a, b)           output of local b on visible a: delta+1, gamma
//                        unchanged, the new environment channel mapped to b
//   PartialSync(a, b, c) internal output of b on visible a paired with an
//                        input on visible c != a (b itself not visible):
//                        delta and h unchanged, gamma+1 for the received
//                        channel
struct ALabel {
  enum class K { Heart, Delay, NuStep, Inp, Outp, PartialSync };
  K k = K::Delay;
  int a = 0, b = 0, c = 0;

  static ALabel heart() { return {K::Heart, 0, 0, 0}; }
  static ALabel delay() { return {K::Delay, 0, 0, 0}; }
  static ALabel nu_step() { return {K::NuStep, 0, 0, 0}; }
  static ALabel inp(int a) { return {K::Inp, a, 0, 0}; }
  static ALabel outp(int a, int b) { return {K::Outp, a, b, 0}; }
  static ALabel partial_sync(int a, int b, int c) {
    return {K::PartialSync, a, b, c};
  }

  auto operator<=>(const ALabel&) const = default;
  std::string str() const;  // "heart" "delay" "nu" "i(1)" "o(1,2)" "o(1,2)>i(3)"
};

struct AEdge {
  ALabel label;
  AVertex source, target;
};

// The vertex a label leads to; throws TypeError when a side condition
// fails (carrier not visible, sent channel out of range or visible for a
// partial synchronisation, equal carriers).
AVertex apply_label(const AVertex& v, const ALabel& l);

// Every edge out of v: Heart, Delay, and NuStep always; Inp per visible
// channel; Outp per visible carrier and local channel; PartialSync per
// ordered pair of distinct visible carriers and non-visible sent channel.
std::vector<AEdge> a_successors(const AVertex& v);

// ---- lazily generated transition systems over the alphabet -------------

struct AStep {
  ALabel label;
  int target = 0;
};

// States are interned by key on first visit and numbered from 0 (the
// start); edge lists are memoized. Expansion happens under a writer lock,
// so concurrent readers of already-expanded states are safe.
class ALts {
 public:
  virtual ~ALts() = default;
  int start() const { return 0; }
  AVertex vertex(int state) const;
  std::vector<AStep> edges(int state);  // expands and memoizes on first call
  size_t discovered() const;            // states interned so far

 protected:
  // All called with the writer lock held (expand must not call the public
  // accessors of this class; the state's vertex is passed in).
  int intern(const std::string& key, AVertex v);
  virtual std::vector<AStep> expand(int state, const AVertex& at) = 0;
  bool known(const std::string& key) const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<AVertex> vertices_;
  std::vector<std::optional<std::vector<AStep>>> memo_;
  std::map<std::string, int> index_;
};

// Projection of the reduction graph: silent reductions become Delay, ticks
// become Heart, one prenex restriction is promoted per NuStep, and enabled
// prefixes on visible channels become Inp/Outp/PartialSync (an output whose
// subject is still under a restriction must take the NuStep first). Throws
// TypeError unless iface.gamma equals the state's context.
std::unique_ptr<ALts> project_pi(const PiState& s, const DefTable& defs,
                                 const AVertex& iface);

// Projection of the strategy graph: closed-world moves become Delay (Heart
// for ticks, NuStep for restrictions), lone inputs/outputs whose board
// channel is visible become Inp/Outp, and an output move followed by an
// input move of a different player on a distinct visible carrier becomes
// one PartialSync. Half-fork moves and moves on non-visible channels have
// no image. Throws TypeError unless iface.gamma equals the board size.
std::unique_ptr<ALts> project_sd(const SDState& s, const DefTable& defs,
                                 const AVertex& iface);

// ---- complementary label sequences --------------------------------------

// Zip two sequences typed from vertices over the same environment (equal
// delta), inserting Delay opposite Heart/Delay where needed. Aligned pairs
// must be (Delay,Delay), (Heart,Delay), (Delay,Heart), or an Inp matched
// with an Outp whose carriers name the same environment channel. Returns
// the closed-world image of the zip (Heart where one side ticked, Delay
// elsewhere), or nothing when the sequences do not zip. Throws TypeError
// when delta differs or a label breaks its side conditions.
std::optional<std::vector<ALabel>> merge_complementary(
    const std::vector<ALabel>& w1, const AVertex& v1,
    const std::vector<ALabel>& w2, const AVertex& v2);

bool complementary(const std::vector<ALabel>& w1, const AVertex& v1,
                   const std::vector<ALabel>& w2, const AVertex& v2);

// ---- weak bisimilarity ---------------------------------------------------

struct BisimResult {
  enum class Kind { Bisimilar, NotBisimilar, Unknown };
  Kind kind = Kind::Unknown;
  std::string witness;  // for NotBisimilar: the first splitting label
  size_t explored = 0;  // states expanded across both systems
};

// Weak bisimilarity over the alphabet with Delay silent; every other label
// (Heart, NuStep, Inp, Outp, PartialSync) must be matched up to Delay
// steps, and related states must carry equal vertices. Exact when both
// systems saturate within state_budget states each; Unknown otherwise.
BisimResult weak_bisim(ALts& l1, ALts& l2, size_t state_budget);

// ---- corpus preprocessing ------------------------------------------------

// Guard a leading restriction behind a committed internal step: new c. P
// becomes new c0. (c0!c0.(new c. P) | c0?.0). Strategies treat restriction
// as one guard among inputs, outputs, and ticks, while the process grammar
// keeps it outside sums; the encoded form exercises the guarded-restriction
// paths. Identity on processes that do not start with a restriction.
TypedProcess encode_nu_in_sum(const TypedProcess& p);

// One line per edge, breadth-first from the start, at most max_states
// expanded: "s0[h:[] Δ=1 Γ=1] -i(1)-> s1[h:[1↦1,2↦2] Δ=2 Γ=2]".
std::vector<std::string> dump_lts(ALts& l, size_t max_states);

}  // namespace pigame
