#include "pigame/process.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>

namespace pigame {

// ---- Renaming ----------------------------------------------------------

Renaming Renaming::identity(int n) { return inclusion(n, n); }

Renaming Renaming::inclusion(int n, int m) {
  Renaming r;
  r.source = n;
  r.target = m;
  r.map.resize(n);
  for (int i = 0; i < n; ++i) r.map[i] = i + 1;
  return r;
}

bool Renaming::is_inclusion() const {
  for (int i = 0; i < source; ++i)
    if (map[i] != i + 1) return false;
  return true;
}

Renaming Renaming::lift() const {
  Renaming r = *this;
  r.source += 1;
  r.target += 1;
  r.map.push_back(r.target);
  return r;
}

Renaming Renaming::after(const Renaming& g) const {
  assert(g.target == source);
  Renaming r;
  r.source = g.source;
  r.target = target;
  r.map.resize(g.source);
  for (int i = 0; i < g.source; ++i) r.map[i] = map[g.map[i] - 1];
  return r;
}

// ---- Process constructors ----------------------------------------------

ProcessPtr Process::sum(std::vector<Branch> bs) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Sum;
  p->branches = std::move(bs);
  return p;
}

ProcessPtr Process::par(ProcessPtr l, ProcessPtr r) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Par;
  p->left = std::move(l);
  p->right = std::move(r);
  return p;
}

ProcessPtr Process::nu(ProcessPtr b) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Nu;
  p->body = std::move(b);
  return p;
}

ProcessPtr Process::call(std::string name, Renaming rn) {
  auto p = std::make_shared<Process>();
  p->kind = Kind::Call;
  p->callee = std::move(name);
  p->call_rn = std::move(rn);
  return p;
}

const Definition& DefTable::at(const std::string& name) const {
  auto it = defs.find(name);
  if (it == defs.end()) throw TypeError("unknown definition: " + name);
  return it->second;
}

// ---- encoding / equality ------------------------------------------------

namespace {

void encode_rec(const ProcessPtr& p, const std::function<std::string(int)>& ch,
                std::string& out) {
  switch (p->kind) {
    case Process::Kind::Sum:
      out += "S(";
      for (const auto& b : p->branches) {
        switch (b.pfx.kind) {
          case Prefix::Kind::Output:
            out += "o" + ch(b.pfx.a) + "," + ch(b.pfx.b);
            break;
          case Prefix::Kind::Input:
            out += "i" + ch(b.pfx.a);
            break;
          case Prefix::Kind::Tick:
            out += "t";
            break;
        }
        out += ">";
        encode_rec(b.cont, ch, out);
        out += ";";
      }
      out += ")";
      break;
    case Process::Kind::Par:
      out += "P(";
      encode_rec(p->left, ch, out);
      out += ",";
      encode_rec(p->right, ch, out);
      out += ")";
      break;
    case Process::Kind::Nu:
      out += "N(";
      encode_rec(p->body, ch, out);
      out += ")";
      break;
    case Process::Kind::Call:
      out += "C(" + p->callee;
      for (int v : p->call_rn.map) out += "," + ch(v);
      out += ")";
      break;
  }
}

std::string encode_with(const ProcessPtr& p,
                        const std::function<std::string(int)>& ch) {
  std::string out;
  encode_rec(p, ch, out);
  return out;
}

}  // namespace

std::string encode(const ProcessPtr& p) {
  return encode_with(p, [](int c) { return std::to_string(c); });
}

bool deep_eq(const ProcessPtr& p, const ProcessPtr& q) {
  if (p == q) return true;
  return encode(p) == encode(q);
}

// ---- rename -------------------------------------------------------------

ProcessPtr rename(const ProcessPtr& p, const Renaming& h) {
  switch (p->kind) {
    case Process::Kind::Sum: {
      std::vector<Branch> bs;
      bs.reserve(p->branches.size());
      for (const auto& b : p->branches) {
        Prefix pf = b.pfx;
        switch (pf.kind) {
          case Prefix::Kind::Output:
            pf.a = h(pf.a);
            pf.b = h(pf.b);
            bs.push_back({pf, rename(b.cont, h)});
            break;
          case Prefix::Kind::Input:
            pf.a = h(pf.a);
            bs.push_back({pf, rename(b.cont, h.lift())});
            break;
          case Prefix::Kind::Tick:
            bs.push_back({pf, rename(b.cont, h)});
            break;
        }
      }
      return Process::sum(std::move(bs));
    }
    case Process::Kind::Par:
      return Process::par(rename(p->left, h), rename(p->right, h));
    case Process::Kind::Nu:
      return Process::nu(rename(p->body, h.lift()));
    case Process::Kind::Call:
      return Process::call(p->callee, h.after(p->call_rn));
  }
  throw std::logic_error("rename: bad node");
}

// ---- typecheck / guardedness / unfold ------------------------------------

namespace {

void check_rec(const ProcessPtr& p, int ctx, const DefTable& defs) {
  auto in_range = [&](int c) {
    if (c < 1 || c > ctx)
      throw TypeError("channel " + std::to_string(c) +
                      " out of range in context of size " + std::to_string(ctx));
  };
  switch (p->kind) {
    case Process::Kind::Sum:
      for (const auto& b : p->branches) {
        switch (b.pfx.kind) {
          case Prefix::Kind::Output:
            in_range(b.pfx.a);
            in_range(b.pfx.b);
            check_rec(b.cont, ctx, defs);
            break;
          case Prefix::Kind::Input:
            in_range(b.pfx.a);
            check_rec(b.cont, ctx + 1, defs);
            break;
          case Prefix::Kind::Tick:
            check_rec(b.cont, ctx, defs);
            break;
        }
      }
      break;
    case Process::Kind::Par:
      check_rec(p->left, ctx, defs);
      check_rec(p->right, ctx, defs);
      break;
    case Process::Kind::Nu:
      check_rec(p->body, ctx + 1, defs);
      break;
    case Process::Kind::Call: {
      const Definition& d = defs.at(p->callee);
      if (p->call_rn.source != d.ctx)
        throw TypeError("arity mismatch on call to " + p->callee + ": definition has context " +
                        std::to_string(d.ctx) + ", call provides " +
                        std::to_string(p->call_rn.source));
      if (p->call_rn.target != ctx)
        throw TypeError("call to " + p->callee + " typed in context " +
                        std::to_string(p->call_rn.target) + ", used in " + std::to_string(ctx));
      for (int v : p->call_rn.map) in_range(v);
      break;
    }
  }
}

}  // namespace

void check_guarded(const DefTable& defs) {
  // Only a body that is itself a bare call continues the resolution chain;
  // Sum/Par/Nu all guard.
  std::map<std::string, int> state;  // 0 fresh, 1 on stack, 2 done
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    int& s = state[n];
    if (s == 2) return;
    if (s == 1) throw TypeError("unguarded definition cycle through " + n);
    s = 1;
    const Definition& d = defs.at(n);
    if (d.body->kind == Process::Kind::Call) {
      if (!defs.has(d.body->callee))
        throw TypeError("unknown definition: " + d.body->callee);
      visit(d.body->callee);
    }
    s = 2;
  };
  for (const auto& [n, d] : defs.defs) visit(n);
}

void typecheck(const TypedProcess& p, const DefTable& defs) {
  check_guarded(defs);
  for (const auto& [n, d] : defs.defs) check_rec(d.body, d.ctx, defs);
  check_rec(p.proc, p.ctx, defs);
}

ProcessPtr unfold_top(const ProcessPtr& p, const DefTable& defs) {
  ProcessPtr q = p;
  size_t steps = 0;
  while (q->kind == Process::Kind::Call) {
    if (++steps > defs.defs.size() + 1)
      throw TypeError("unguarded definition cycle through " + q->callee);
    const Definition& d = defs.at(q->callee);
    q = rename(d.body, q->call_rn);
  }
  return q;
}

// ---- used channels -------------------------------------------------------

namespace {

void mark_used(const ProcessPtr& p, int bound, std::vector<bool>& used) {
  auto touch = [&](int c) {
    if (c >= 1 && c <= bound) used[c - 1] = true;
  };
  switch (p->kind) {
    case Process::Kind::Sum:
      for (const auto& b : p->branches) {
        if (b.pfx.kind != Prefix::Kind::Tick) touch(b.pfx.a);
        if (b.pfx.kind == Prefix::Kind::Output) touch(b.pfx.b);
        mark_used(b.cont, bound, used);
      }
      break;
    case Process::Kind::Par:
      mark_used(p->left, bound, used);
      mark_used(p->right, bound, used);
      break;
    case Process::Kind::Nu:
      mark_used(p->body, bound, used);
      break;
    case Process::Kind::Call:
      for (int v : p->call_rn.map) touch(v);
      break;
  }
}

}  // namespace

std::vector<bool> used_channels(const ProcessPtr& p, int ctx) {
  std::vector<bool> used(ctx, false);
  mark_used(p, ctx, used);
  return used;
}

// ---- canonical form ------------------------------------------------------

namespace {

struct Collector {
  int base_ctx;
  int nus = 0;
  // Components are kept as (site term, channel map) pairs; the map's target
  // is only meaningful once the walk is done and the final channel count is
  // known (binders inside continuations must sit above *all* prenex nus).
  std::vector<std::pair<ProcessPtr, Renaming>> raw;

  void walk(const ProcessPtr& p, const Renaming& h) {
    switch (p->kind) {
      case Process::Kind::Sum:
        if (!p->branches.empty()) raw.push_back({p, h});  // empty sum = Par unit
        break;
      case Process::Kind::Par:
        walk(p->left, h);
        walk(p->right, h);
        break;
      case Process::Kind::Nu: {
        int level = base_ctx + (++nus);
        Renaming h2 = h;
        h2.source += 1;
        h2.target = level;
        h2.map.push_back(level);
        walk(p->body, h2);
        break;
      }
      case Process::Kind::Call:
        raw.push_back({p, h});
        break;
    }
  }
};

ProcessPtr canon_proc(const ProcessPtr& p, int ctx, const DefTable& defs);

// Deterministic permutations-within-classes search, capped to keep
// canonicalization from blowing up on adversarial inputs. Past the cap we
// keep the refinement order, which may distinguish some congruent states
// (costs dedup quality, never soundness).
constexpr long kPermCap = 5040;

std::string render_state(const std::vector<ProcessPtr>& comps) {
  std::vector<std::string> enc;
  enc.reserve(comps.size());
  for (const auto& c : comps) enc.push_back(encode(c));
  std::sort(enc.begin(), enc.end());
  std::string out;
  for (auto& e : enc) {
    out += e;
    out += "|";
  }
  return out;
}

}  // namespace

CanonTerm canon_term(const TypedProcess& p, const DefTable& defs) {
  Collector col;
  col.base_ctx = p.ctx;
  col.walk(p.proc, Renaming::identity(p.ctx));

  int total = p.ctx + col.nus;

  // Second phase: rename every component into the final channel space and
  // canonicalize branch continuations recursively.
  std::vector<ProcessPtr> collected;
  collected.reserve(col.raw.size());
  for (auto& [term, h0] : col.raw) {
    Renaming h = h0;
    h.target = total;
    if (term->kind == Process::Kind::Call) {
      collected.push_back(Process::call(term->callee, h.after(term->call_rn)));
      continue;
    }
    std::vector<Branch> bs;
    bs.reserve(term->branches.size());
    for (const auto& b : term->branches) {
      Prefix pf = b.pfx;
      if (pf.kind == Prefix::Kind::Input) {
        pf.a = h(pf.a);
        bs.push_back({pf, canon_proc(rename(b.cont, h.lift()), total + 1, defs)});
      } else {
        if (pf.kind == Prefix::Kind::Output) {
          pf.a = h(pf.a);
          pf.b = h(pf.b);
        }
        bs.push_back({pf, canon_proc(rename(b.cont, h), total, defs)});
      }
    }
    collected.push_back(Process::sum(std::move(bs)));
  }
  col.raw.clear();

  // Drop nu channels no component touches.
  std::vector<bool> used(total, false);
  for (const auto& c : collected) mark_used(c, total, used);
  Renaming compact;
  compact.source = total;
  std::vector<int> kept;  // old levels of surviving nus
  for (int i = 1; i <= p.ctx; ++i) compact.map.push_back(i);
  int next = p.ctx;
  for (int i = p.ctx + 1; i <= total; ++i) {
    if (used[i - 1]) {
      kept.push_back(i);
      compact.map.push_back(++next);
    } else {
      compact.map.push_back(0);  // never dereferenced: channel is unused
    }
  }
  compact.target = next;
  int nus = static_cast<int>(kept.size());
  std::vector<ProcessPtr> comps;
  comps.reserve(collected.size());
  for (const auto& c : collected) comps.push_back(rename(c, compact));
  total = p.ctx + nus;

  // Canonical numbering of the nu channels: refine into classes by an
  // orbit-invariant signature, then take the minimal rendering over
  // permutations within classes.
  if (nus > 1) {
    auto sig = [&](int level) {
      std::vector<std::string> parts;
      for (const auto& c : comps)
        parts.push_back(encode_with(c, [&](int ch) -> std::string {
          if (ch <= p.ctx) return "f" + std::to_string(ch);
          if (ch == level) return "@";
          return "*";
        }));
      std::sort(parts.begin(), parts.end());
      std::string s;
      for (auto& x : parts) {
        s += x;
        s += "|";
      }
      return s;
    };
    std::vector<std::pair<std::string, int>> tagged;
    for (int i = p.ctx + 1; i <= total; ++i) tagged.push_back({sig(i), i});
    std::stable_sort(tagged.begin(), tagged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::vector<int>> classes;
    for (size_t i = 0; i < tagged.size(); ++i) {
      if (i == 0 || tagged[i].first != tagged[i - 1].first) classes.push_back({});
      classes.back().push_back(tagged[i].second);
    }

    long combos = 1;
    for (auto& cl : classes) {
      for (size_t f = 2; f <= cl.size() && combos <= kPermCap; ++f) combos *= static_cast<long>(f);
      if (combos > kPermCap) break;
    }

    auto apply_order = [&](const std::vector<int>& order) {
      // order lists old nu levels in their new sequence
      Renaming r = Renaming::identity(total);
      for (size_t i = 0; i < order.size(); ++i) r.map[order[i] - 1] = p.ctx + 1 + static_cast<int>(i);
      std::vector<ProcessPtr> out;
      out.reserve(comps.size());
      for (const auto& c : comps) out.push_back(rename(c, r));
      return out;
    };

    std::vector<int> base_order;
    for (auto& cl : classes) base_order.insert(base_order.end(), cl.begin(), cl.end());

    if (combos > kPermCap) {
      comps = apply_order(base_order);
    } else {
      std::string best_key;
      std::vector<ProcessPtr> best;
      std::vector<size_t> class_off;
      size_t off = 0;
      for (auto& cl : classes) {
        class_off.push_back(off);
        off += cl.size();
      }
      std::function<void(size_t, std::vector<int>&)> rec = [&](size_t ci, std::vector<int>& order) {
        if (ci == classes.size()) {
          auto cand = apply_order(order);
          std::string key = render_state(cand);
          if (best_key.empty() || key < best_key) {
            best_key = key;
            best = std::move(cand);
          }
          return;
        }
        auto cl = classes[ci];
        std::sort(cl.begin(), cl.end());
        do {
          std::copy(cl.begin(), cl.end(), order.begin() + class_off[ci]);
          rec(ci + 1, order);
        } while (std::next_permutation(cl.begin(), cl.end()));
      };
      std::vector<int> order = base_order;
      rec(0, order);
      comps = std::move(best);
    }
  }

  std::stable_sort(comps.begin(), comps.end(), [](const ProcessPtr& a, const ProcessPtr& b) {
    return encode(a) < encode(b);
  });

  CanonTerm out;
  out.ctx = p.ctx;
  out.nus = nus;
  out.components = std::move(comps);
  return out;
}

TypedProcess rebuild(const CanonTerm& c) {
  ProcessPtr body;
  if (c.components.empty()) {
    body = Process::nil();
  } else {
    body = c.components.back();
    for (auto it = c.components.rbegin() + 1; it != c.components.rend(); ++it)
      body = Process::par(*it, body);
  }
  for (int i = 0; i < c.nus; ++i) body = Process::nu(body);
  return {body, c.ctx};
}

namespace {

ProcessPtr canon_proc(const ProcessPtr& p, int ctx, const DefTable& defs) {
  return rebuild(canon_term({p, ctx}, defs)).proc;
}

}  // namespace

// ---- parser ---------------------------------------------------------------

namespace {

struct Tok {
  enum Kind {
    Ident, Zero, Bang, Quest, Dot, Plus, Bar, LParen, RParen, Eq, Sep,
    LBrace, RBrace, Comma, KwNew, KwWhere, KwTick, KwChannels, End
  } kind;
  std::string text;
  int line, col;
};

std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  int line = 1, col = 1, depth = 0;
  size_t i = 0;
  auto push = [&](Tok::Kind k, std::string t) { out.push_back({k, std::move(t), line, col}); };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      if (depth == 0 && !out.empty() && out.back().kind != Tok::Sep) push(Tok::Sep, "\n");
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '\''))
        ++j;
      std::string w = text.substr(i, j - i);
      if (w == "new") push(Tok::KwNew, w);
      else if (w == "where") push(Tok::KwWhere, w);
      else if (w == "tick") push(Tok::KwTick, w);
      else if (w == "channels") push(Tok::KwChannels, w);
      else push(Tok::Ident, w);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    switch (c) {
      case '0': push(Tok::Zero, "0"); break;
      case '!': push(Tok::Bang, "!"); break;
      case '?': push(Tok::Quest, "?"); break;
      case '.': push(Tok::Dot, "."); break;
      case '+': push(Tok::Plus, "+"); break;
      case '|': push(Tok::Bar, "|"); break;
      case '(': push(Tok::LParen, "("); ++depth; break;
      case ')': push(Tok::RParen, ")"); depth = std::max(0, depth - 1); break;
      case '=': push(Tok::Eq, "="); break;
      case ';': if (!out.empty() && out.back().kind != Tok::Sep) push(Tok::Sep, ";"); break;
      case '{': push(Tok::LBrace, "{"); ++depth; break;
      case '}': push(Tok::RBrace, "}"); depth = std::max(0, depth - 1); break;
      case ',': push(Tok::Comma, ","); break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// Name-level AST; channel names resolve to levels once the full context is
// known (free names may be discovered anywhere in the file).
struct NAst;
using NPtr = std::shared_ptr<NAst>;

struct NBranch {
  Prefix::Kind kind;
  std::string a, b;       // channel names
  std::string binder;     // input binder name, may be empty
  NPtr cont;
};

struct NAst {
  enum K { Sum, Par, Nu, Call } k;
  std::vector<NBranch> branches;
  NPtr left, right;
  std::string name;             // Nu binder or Call target
  std::vector<std::string> brace;  // Call's explicit channel arguments
  NPtr body;
};

struct Parser {
  std::vector<Tok> toks;
  size_t pos = 0;

  const Tok& peek(size_t k = 0) const { return toks[std::min(pos + k, toks.size() - 1)]; }
  Tok take() { return toks[pos == toks.size() - 1 ? pos : pos++]; }
  bool at(Tok::Kind k) const { return peek().kind == k; }
  Tok expect(Tok::Kind k, const char* what) {
    if (!at(k)) throw ParseError(std::string("expected ") + what + ", got '" + peek().text + "'",
                                 peek().line, peek().col);
    return take();
  }
  void skip_seps() {
    while (at(Tok::Sep)) take();
  }

  bool starts_prefix() const {
    if (at(Tok::KwTick)) return true;
    if (at(Tok::Ident)) {
      Tok::Kind n = peek(1).kind;
      return n == Tok::Bang || n == Tok::Quest;
    }
    return false;
  }

  NPtr parse_process() {
    NPtr first = parse_summand();
    if (!at(Tok::Bar)) return first;
    NPtr acc = first;
    while (at(Tok::Bar)) {
      take();
      acc = [&] {
        auto n = std::make_shared<NAst>();
        n->k = NAst::Par;
        n->left = acc;
        n->right = parse_summand();
        return n;
      }();
    }
    return acc;
  }

  NPtr parse_summand() {
    if (starts_prefix()) {
      auto n = std::make_shared<NAst>();
      n->k = NAst::Sum;
      n->branches.push_back(parse_branch());
      while (at(Tok::Plus)) {
        take();
        if (!starts_prefix())
          throw ParseError("sum branch must start with a prefix", peek().line, peek().col);
        n->branches.push_back(parse_branch());
      }
      return n;
    }
    return parse_unit();
  }

  NBranch parse_branch() {
    NBranch br;
    if (at(Tok::KwTick)) {
      take();
      br.kind = Prefix::Kind::Tick;
    } else {
      Tok a = expect(Tok::Ident, "channel name");
      if (at(Tok::Bang)) {
        take();
        Tok b = expect(Tok::Ident, "channel name");
        br.kind = Prefix::Kind::Output;
        br.a = a.text;
        br.b = b.text;
      } else {
        expect(Tok::Quest, "'!' or '?'");
        br.kind = Prefix::Kind::Input;
        br.a = a.text;
        if (at(Tok::LParen) && peek(1).kind == Tok::Ident && peek(2).kind == Tok::RParen) {
          take();
          br.binder = take().text;
          take();
        }
      }
    }
    expect(Tok::Dot, "'.' after prefix");
    br.cont = parse_cont();
    return br;
  }

  // Continuation of a prefix: another branch chain or a unit. `new` extends
  // maximally to the right; parenthesize to cut it short.
  NPtr parse_cont() {
    if (starts_prefix()) {
      auto n = std::make_shared<NAst>();
      n->k = NAst::Sum;
      n->branches.push_back(parse_branch());
      return n;
    }
    return parse_unit();
  }

  NPtr parse_unit() {
    if (at(Tok::Zero)) {
      take();
      auto n = std::make_shared<NAst>();
      n->k = NAst::Sum;
      return n;
    }
    if (at(Tok::LParen)) {
      take();
      NPtr p = parse_process();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at(Tok::KwNew)) {
      take();
      Tok name = expect(Tok::Ident, "binder name");
      expect(Tok::Dot, "'.' after binder");
      auto n = std::make_shared<NAst>();
      n->k = NAst::Nu;
      n->name = name.text;
      n->body = parse_process();
      return n;
    }
    if (at(Tok::Ident)) {
      Tok name = take();
      auto n = std::make_shared<NAst>();
      n->k = NAst::Call;
      n->name = name.text;
      if (at(Tok::LBrace)) {
        take();
        while (!at(Tok::RBrace)) {
          n->brace.push_back(expect(Tok::Ident, "channel name").text);
          if (at(Tok::Comma)) take();
        }
        take();
      }
      return n;
    }
    throw ParseError("expected process", peek().line, peek().col);
  }
};

struct Scope {
  std::map<std::string, std::vector<int>> stack;
  void push(const std::string& n, int level) {
    if (!n.empty()) stack[n].push_back(level);
  }
  void pop(const std::string& n) {
    if (!n.empty()) stack[n].pop_back();
  }
  std::optional<int> find(const std::string& n) const {
    auto it = stack.find(n);
    if (it == stack.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
  }
};

// Collect names used in channel position that are not lexically bound, in
// order of first occurrence.
void discover_free(const NPtr& p, Scope& sc, std::vector<std::string>& order,
                   std::set<std::string>& seen) {
  auto see = [&](const std::string& n) {
    if (!sc.find(n) && !seen.count(n)) {
      seen.insert(n);
      order.push_back(n);
    }
  };
  switch (p->k) {
    case NAst::Sum:
      for (const auto& b : p->branches) {
        if (b.kind != Prefix::Kind::Tick) see(b.a);
        if (b.kind == Prefix::Kind::Output) see(b.b);
        if (b.kind == Prefix::Kind::Input) {
          sc.push(b.binder, 0);
          discover_free(b.cont, sc, order, seen);
          sc.pop(b.binder);
        } else {
          discover_free(b.cont, sc, order, seen);
        }
      }
      break;
    case NAst::Par:
      discover_free(p->left, sc, order, seen);
      discover_free(p->right, sc, order, seen);
      break;
    case NAst::Nu:
      sc.push(p->name, 0);
      discover_free(p->body, sc, order, seen);
      sc.pop(p->name);
      break;
    case NAst::Call:
      for (const auto& n : p->brace) see(n);
      break;
  }
}

ProcessPtr resolve(const NPtr& p, Scope& sc, int depth, const DefTable& defs,
                   const Tok& where) {
  auto chan = [&](const std::string& n) {
    auto lv = sc.find(n);
    if (!lv) throw ParseError("unbound channel name '" + n + "'", where.line, where.col);
    return *lv;
  };
  switch (p->k) {
    case NAst::Sum: {
      std::vector<Branch> bs;
      for (const auto& b : p->branches) {
        switch (b.kind) {
          case Prefix::Kind::Output:
            bs.push_back({Prefix::output(chan(b.a), chan(b.b)),
                          resolve(b.cont, sc, depth, defs, where)});
            break;
          case Prefix::Kind::Input: {
            sc.push(b.binder, depth + 1);
            ProcessPtr c = resolve(b.cont, sc, depth + 1, defs, where);
            sc.pop(b.binder);
            bs.push_back({Prefix::input(chan(b.a)), c});
            break;
          }
          case Prefix::Kind::Tick:
            bs.push_back({Prefix::tick(), resolve(b.cont, sc, depth, defs, where)});
            break;
        }
      }
      return Process::sum(std::move(bs));
    }
    case NAst::Par:
      return Process::par(resolve(p->left, sc, depth, defs, where),
                          resolve(p->right, sc, depth, defs, where));
    case NAst::Nu: {
      sc.push(p->name, depth + 1);
      ProcessPtr b = resolve(p->body, sc, depth + 1, defs, where);
      sc.pop(p->name);
      return Process::nu(b);
    }
    case NAst::Call: {
      if (!defs.has(p->name))
        throw ParseError("undefined process name '" + p->name + "'", where.line, where.col);
      int dctx = defs.defs.at(p->name).ctx;
      Renaming rn;
      if (p->brace.empty()) {
        if (dctx > depth)
          throw ParseError("call to '" + p->name + "' in too small a context", where.line,
                           where.col);
        rn = Renaming::inclusion(dctx, depth);
      } else {
        if (static_cast<int>(p->brace.size()) != dctx)
          throw ParseError("call to '" + p->name + "' expects " + std::to_string(dctx) +
                               " channels",
                           where.line, where.col);
        rn.source = dctx;
        rn.target = depth;
        for (const auto& n : p->brace) rn.map.push_back(chan(n));
      }
      return Process::call(p->name, rn);
    }
  }
  throw std::logic_error("resolve: bad node");
}

ParseResult parse_impl(const std::string& text,
                       const std::vector<std::string>* ctx_names,
                       const DefTable* ambient) {
  Parser ps{lex(text)};

  std::vector<std::string> declared;
  ps.skip_seps();
  if (ps.at(Tok::KwChannels)) {
    if (ctx_names)
      throw ParseError("channels declaration conflicts with an explicit context",
                       ps.peek().line, ps.peek().col);
    ps.take();
    while (ps.at(Tok::Ident)) declared.push_back(ps.take().text);
  } else if (ctx_names) {
    declared = *ctx_names;
  }
  bool explicit_ctx = ctx_names != nullptr || !declared.empty();

  struct Item {
    std::string name;  // empty => main expression
    NPtr ast;
    Tok at;
  };
  std::vector<Item> items;
  while (true) {
    ps.skip_seps();
    if (ps.at(Tok::End)) break;
    Tok here = ps.peek();
    if (ps.at(Tok::Ident) && ps.peek(1).kind == Tok::Eq) {
      std::string name = ps.take().text;
      ps.take();
      items.push_back({name == "main" ? "" : name, ps.parse_process(), here});
    } else {
      NPtr main = ps.parse_process();
      items.push_back({"", main, here});
      ps.skip_seps();
      if (ps.at(Tok::KwWhere)) {
        ps.take();
        while (true) {
          ps.skip_seps();
          if (ps.at(Tok::End)) break;
          Tok h2 = ps.peek();
          std::string name = ps.expect(Tok::Ident, "definition name").text;
          ps.expect(Tok::Eq, "'='");
          items.push_back({name, ps.parse_process(), h2});
        }
      }
    }
  }

  const NPtr* main_ast = nullptr;
  const Tok* main_tok = nullptr;
  for (const auto& it : items) {
    if (it.name.empty()) {
      if (main_ast)
        throw ParseError("more than one main process", it.at.line, it.at.col);
      main_ast = &it.ast;
      main_tok = &it.at;
    }
  }
  if (!main_ast) throw ParseError("no main process (bare expression or 'main = P')", 1, 1);

  // Full channel list: declared names plus (in implicit mode) free names in
  // order of first occurrence across the whole file.
  std::vector<std::string> chan_names = declared;
  {
    std::set<std::string> seen(declared.begin(), declared.end());
    std::vector<std::string> found;
    for (const auto& it : items) {
      Scope sc;
      for (const auto& n : chan_names) sc.push(n, 0);
      for (const auto& n : found) sc.push(n, 0);
      discover_free(it.ast, sc, found, seen);
    }
    if (!found.empty() && explicit_ctx)
      throw ParseError("unbound channel name '" + found.front() + "'", main_tok->line,
                       main_tok->col);
    chan_names.insert(chan_names.end(), found.begin(), found.end());
  }
  int gctx = static_cast<int>(chan_names.size());

  DefTable defs;
  if (ambient) defs = *ambient;
  for (const auto& it : items) {
    if (it.name.empty()) continue;
    if (defs.has(it.name))
      throw ParseError("duplicate definition of '" + it.name + "'", it.at.line, it.at.col);
    defs.defs[it.name] = {it.name, gctx, nullptr};  // body filled below
  }

  auto resolve_item = [&](const NPtr& ast, const Tok& at) {
    Scope sc;
    for (int i = 0; i < gctx; ++i) sc.push(chan_names[i], i + 1);
    return resolve(ast, sc, gctx, defs, at);
  };

  for (const auto& it : items)
    if (!it.name.empty()) defs.defs[it.name].body = resolve_item(it.ast, it.at);

  ParseResult out;
  out.main = {resolve_item(*main_ast, *main_tok), gctx};
  out.chan_names = chan_names;
  out.defs = defs;
  typecheck(out.main, out.defs);
  return out;
}

}  // namespace

ParseResult parse_pi(const std::string& text) { return parse_impl(text, nullptr, nullptr); }

ParseResult parse_pi(const std::string& text, const std::vector<std::string>& ctx_names,
                     const DefTable* ambient_defs) {
  return parse_impl(text, &ctx_names, ambient_defs);
}

// ---- pretty ---------------------------------------------------------------

namespace {

struct Printer {
  std::vector<std::string> names;  // names[level-1]
  std::set<std::string> taken;

  std::string fresh(int level) {
    std::string base = "x" + std::to_string(level);
    while (taken.count(base)) base += "_";
    taken.insert(base);
    return base;
  }

  // Does the cont need parens in branch position?
  static bool cont_needs_parens(const ProcessPtr& p) {
    return p->kind == Process::Kind::Par || p->kind == Process::Kind::Nu ||
           (p->kind == Process::Kind::Sum && p->branches.size() > 1);
  }

  std::string print(const ProcessPtr& p, int depth) {
    switch (p->kind) {
      case Process::Kind::Sum: {
        if (p->branches.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& b : p->branches) {
          if (!first) out += " + ";
          first = false;
          out += print_branch(b, depth);
        }
        return out;
      }
      case Process::Kind::Par: {
        // '|' parses left-associatively, so a left Par child can stay flat but
        // a right one needs parens to keep its shape across a round-trip.
        std::string l = p->left->kind == Process::Kind::Nu
                            ? "(" + print(p->left, depth) + ")"
                            : print(p->left, depth);
        std::string r = p->right->kind == Process::Kind::Nu ||
                                p->right->kind == Process::Kind::Par
                            ? "(" + print(p->right, depth) + ")"
                            : print(p->right, depth);
        return l + " | " + r;
      }
      case Process::Kind::Nu: {
        std::string n = fresh(depth + 1);
        names.push_back(n);
        std::string body = print(p->body, depth + 1);
        names.pop_back();
        taken.erase(n);
        return "new " + n + ". " + body;
      }
      case Process::Kind::Call: {
        if (p->call_rn.is_inclusion()) return p->callee;
        std::string out = p->callee + "{";
        for (size_t i = 0; i < p->call_rn.map.size(); ++i) {
          if (i) out += ",";
          out += names.at(p->call_rn.map[i] - 1);
        }
        return out + "}";
      }
    }
    throw std::logic_error("print: bad node");
  }

  std::string print_branch(const Branch& b, int depth) {
    std::string out;
    switch (b.pfx.kind) {
      case Prefix::Kind::Output:
        out = names.at(b.pfx.a - 1) + "!" + names.at(b.pfx.b - 1);
        break;
      case Prefix::Kind::Input: {
        out = names.at(b.pfx.a - 1) + "?";
        auto used = used_channels(b.cont, depth + 1);
        if (!used.empty() && used[depth]) {
          std::string n = fresh(depth + 1);
          out += "(" + n + ")";
          names.push_back(n);
          std::string cont = cont_str(b.cont, depth + 1);
          names.pop_back();
          taken.erase(n);
          return out + "." + cont;
        }
        std::string n = fresh(depth + 1);  // placeholder, never referenced
        names.push_back(n);
        std::string cont = cont_str(b.cont, depth + 1);
        names.pop_back();
        taken.erase(n);
        return out + "." + cont;
      }
      case Prefix::Kind::Tick:
        out = "tick";
        break;
    }
    std::string cont = cont_str(b.cont, depth);
    return out + "." + cont;
  }

  std::string cont_str(const ProcessPtr& c, int depth) {
    std::string s = print(c, depth);
    return cont_needs_parens(c) ? "(" + s + ")" : s;
  }
};

}  // namespace

std::string pretty(const Prefix& pfx, const std::vector<std::string>& names) {
  switch (pfx.kind) {
    case Prefix::Kind::Output:
      return names.at(pfx.a - 1) + "!" + names.at(pfx.b - 1);
    case Prefix::Kind::Input:
      return names.at(pfx.a - 1) + "?";
    case Prefix::Kind::Tick:
      return "tick";
  }
  return "?";
}

std::string pretty(const TypedProcess& p, const std::vector<std::string>& chan_names) {
  Printer pr;
  for (int i = 0; i < p.ctx; ++i) {
    std::string n = i < static_cast<int>(chan_names.size()) ? chan_names[i]
                                                            : "c" + std::to_string(i + 1);
    pr.names.push_back(n);
    pr.taken.insert(n);
  }
  return pr.print(p.proc, p.ctx);
}

}  // namespace pigame
