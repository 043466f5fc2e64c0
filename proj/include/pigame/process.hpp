#pragma once

// Process syntax and the operations every other layer leans on: parsing,
// printing, renaming, typing, one-step unfolding of named definitions, and a
// canonical form under structural congruence.
//
// Channels are de Bruijn *levels*, 1-based: a process well-formed in context
// n may mention channels 1..n, and a binder (nu, or the implicit binder of an
// input prefix) introduces level n+1 in its body. Free channels therefore
// keep their index under binders, which keeps renaming and scope extrusion
// cheap.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pigame {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Total map of channels h : source -> target, 1-based entries.
struct Renaming {
  int source = 0, target = 0;
  std::vector<int> map;  // size == source, entries in 1..target

  static Renaming identity(int n);
  // Canonical inclusion n -> m (m >= n), i |-> i.
  static Renaming inclusion(int n, int m);
  bool is_inclusion() const;  // map[i] == i+1 for all i
  int operator()(int a) const { return map.at(a - 1); }
  // Extend under one binder: source+1 -> target+1, new level |-> new level.
  Renaming lift() const;
  // this : b -> c composed with g : a -> b, giving a -> c.
  Renaming after(const Renaming& g) const;
  bool operator==(const Renaming&) const = default;
};

struct Prefix {
  enum class Kind { Output, Input, Tick };
  Kind kind;
  int a = 0;  // carrier channel (Output, Input)
  int b = 0;  // sent channel (Output only)

  static Prefix output(int a, int b) { return {Kind::Output, a, b}; }
  static Prefix input(int a) { return {Kind::Input, a, 0}; }
  static Prefix tick() { return {Kind::Tick, 0, 0}; }
  bool operator==(const Prefix&) const = default;
};

struct Process;
using ProcessPtr = std::shared_ptr<const Process>;

struct Branch {
  Prefix pfx;
  ProcessPtr cont;  // context +1 if pfx is an Input, unchanged otherwise
};

// One of: guarded sum (ordered branches; empty = nil), parallel composition,
// restriction, or a call to a named definition under a renaming. Calls with
// the canonical inclusion renaming print as a bare name.
struct Process {
  enum class Kind { Sum, Par, Nu, Call };
  Kind kind;
  std::vector<Branch> branches;  // Sum
  ProcessPtr left, right;        // Par
  ProcessPtr body;               // Nu (context +1)
  std::string callee;            // Call
  Renaming call_rn;              // Call: ctx(definition) -> ctx(use site)

  static ProcessPtr sum(std::vector<Branch> bs);
  static ProcessPtr nil() { return sum({}); }
  static ProcessPtr par(ProcessPtr l, ProcessPtr r);
  static ProcessPtr nu(ProcessPtr b);
  static ProcessPtr call(std::string name, Renaming rn);
};

bool deep_eq(const ProcessPtr& p, const ProcessPtr& q);

struct Definition {
  std::string name;
  int ctx = 0;
  ProcessPtr body;
};

struct DefTable {
  std::map<std::string, Definition> defs;
  const Definition& at(const std::string& name) const;
  bool has(const std::string& name) const { return defs.count(name) > 0; }
};

struct TypedProcess {
  ProcessPtr proc;
  int ctx = 0;
};

// ---- parsing ----------------------------------------------------------

// Accepted shapes (see README for the full grammar):
//   channels a b c        -- optional explicit context (first line)
//   X = P                 -- named definitions, newline/';'-separated
//   main = P              -- distinguished entry, or a bare process text
//   P where X = P1; Y = P2
// Free channel names not declared are bound in order of first occurrence.
struct ParseResult {
  TypedProcess main;
  std::vector<std::string> chan_names;  // names of channels 1..ctx
  DefTable defs;
};

ParseResult parse_pi(const std::string& text);
ParseResult parse_pi(const std::string& text,
                     const std::vector<std::string>& ctx_names,
                     const DefTable* ambient_defs = nullptr);

// ---- printing ---------------------------------------------------------

// Free channels take the supplied names (c1..cn when omitted); binders get
// generated names that avoid collisions. parse(pretty(p)) round-trips to a
// deep-equal term when handed the same channel names and definitions.
std::string pretty(const TypedProcess& p,
                   const std::vector<std::string>& chan_names = {});
std::string pretty(const Prefix& pfx, const std::vector<std::string>& names);

// ---- operations -------------------------------------------------------

ProcessPtr rename(const ProcessPtr& p, const Renaming& h);

// Throws TypeError (channel out of range, unknown definition, arity mismatch
// on a call, ill-typed definition body) on failure.
void typecheck(const TypedProcess& p, const DefTable& defs);

// Expand top-level calls until the head is Sum/Par/Nu. Guardedness of the
// definition table (no cycle of bare-call bodies) bounds the chain.
ProcessPtr unfold_top(const ProcessPtr& p, const DefTable& defs);

// Guardedness check for a whole table; throws TypeError on a bare-call cycle.
void check_guarded(const DefTable& defs);

// ---- canonical form ---------------------------------------------------

// A process in canonical form:
//   nus          prenex restriction count (unused ones dropped)
//   components   guarded sums (never empty) or calls, channel-canonically
//                renumbered, sorted by encoding; branch order preserved
// Canonicalization recurses into branch continuations, so two terms related
// by the congruence (Par AC/unit, extrusion of unused-scope nus, alpha) in
// any context canonicalize identically. Calls are not unfolded here.
struct CanonTerm {
  int ctx = 0;      // context of the whole term
  int nus = 0;      // prenex binders; components live in ctx + nus
  std::vector<ProcessPtr> components;
};

CanonTerm canon_term(const TypedProcess& p, const DefTable& defs);
// Rebuild a process from a canonical form (right-nested pars under nus).
TypedProcess rebuild(const CanonTerm& c);

// Stable structural encoding; equal iff deep_eq (used for sorting/hashing).
std::string encode(const ProcessPtr& p);

// Channels of 1..ctx actually occurring (prefix positions and call images).
std::vector<bool> used_channels(const ProcessPtr& p, int ctx);

}  // namespace pigame
