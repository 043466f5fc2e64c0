#pragma once

// Reduction semantics as a reflexive transition graph over canonical states,
// the fair-success predicate ("from every silently reachable state a tick
// remains reachable"), test composition, and a bounded test enumerator used
// to compare processes by testing.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pigame/process.hpp"

namespace pigame {

enum class PiLabel { Tau, Heart, Id };

// Canonical state: top-level calls unfolded, then the canonical form.
// Two congruent processes (and their one-step unfoldings at the top) get
// equal keys.
struct PiState {
  CanonTerm canon;
  std::string key;
  int ctx() const { return canon.ctx; }
  bool operator==(const PiState& o) const { return key == o.key; }
};

struct PiEdge {
  PiLabel label;
  PiState target;
};

// Raised when expanding top-level calls keeps growing the term (definitions
// like X = X | P have no finite component list). Callers either propagate or
// downgrade to an Unknown verdict.
struct UnfoldLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PiState normalize(const TypedProcess& p, const DefTable& defs);

// One edge per communicating pair of parallel components (tau), one per tick
// branch (heart), plus the id self-edge; duplicates by (label, target) fused.
std::vector<PiEdge> successors(const PiState& s, const DefTable& defs);

enum class Verdict { InBot, NotInBot, Unknown };

std::string to_string(Verdict v);

struct BotResult {
  Verdict verdict = Verdict::Unknown;
  size_t explored = 0;
  // For NotInBot: a silent path from the start to a state that cannot reach
  // a tick, pretty-printed.
  std::vector<std::string> witness;
};

// Exact iff the silent closure saturates within node_budget states; a
// NotInBot certificate can also be issued from a fully-explored sub-closure,
// so verdicts never flip as the budget grows.
BotResult bot_pi(const PiState& s, const DefTable& defs, size_t node_budget);

// A test: relabel the context through h, then run alongside the observer r
// (well-typed in h.target).
struct PiTest {
  Renaming h;
  TypedProcess r;
  std::string label;  // stable printable name for reports
};

Verdict passes(const TypedProcess& p, const PiTest& t, const DefTable& defs,
               size_t node_budget);

// Deterministic, duplicate-free (modulo normalize) enumeration of tests for
// a context of the given size: context-fusing maps h (one representative per
// fusion pattern, plus at most min(k,1) extra private channels) paired with
// observers built from in/out/tick prefixes to depth k. Two-way choices
// appear at the top level only.
std::vector<PiTest> enumerate_tests(int ctx, int k);

struct FairResult {
  enum class Kind { Distinguished, AgreeUpTo, Unknown };
  Kind kind = Kind::Unknown;
  int k = 0;
  std::optional<PiTest> test;  // the distinguishing test
  Verdict left = Verdict::Unknown, right = Verdict::Unknown;
  size_t tests_run = 0;
};

// Compare by testing: Distinguished when some enumerated test gets exact,
// differing verdicts; AgreeUpTo(k) when every test got exact, equal
// verdicts; Unknown when budgets ran out somewhere and no distinction was
// found.
FairResult fair_equiv_pi(const TypedProcess& p, const TypedProcess& q, int k,
                         size_t node_budget, const DefTable& defs);

}  // namespace pigame
