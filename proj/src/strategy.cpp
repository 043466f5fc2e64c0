#include "pigame/strategy.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace pigame {

Strategy empty_strategy(int arity) { return Strategy{arity, {}}; }

DefiniteStrategy make_definite(int arity) {
  DefiniteStrategy d;
  d.arity = arity;
  auto same = std::make_shared<Strategy>(empty_strategy(arity));
  auto wider = std::make_shared<Strategy>(empty_strategy(arity + 1));
  d.forkl = d.forkr = d.tick = same;
  d.nu = wider;
  d.in.assign(arity, wider);
  d.out.assign(arity, std::vector<std::shared_ptr<Strategy>>(arity, same));
  return d;
}

namespace {

int cont_arity(const SeedKind& b) {
  return (b.k == SeedKind::K::In || b.k == SeedKind::K::Nu) ? b.n + 1 : b.n;
}

std::shared_ptr<Strategy>& slot_ref(DefiniteStrategy& d, const SeedKind& b) {
  if (b.n != d.arity) throw ShapeError("seed arity does not match the table");
  switch (b.k) {
    case SeedKind::K::ForkL: return d.forkl;
    case SeedKind::K::ForkR: return d.forkr;
    case SeedKind::K::Tick: return d.tick;
    case SeedKind::K::Nu: return d.nu;
    case SeedKind::K::In:
      if (b.a < 1 || b.a > d.arity) throw ShapeError("input port out of range");
      return d.in[b.a - 1];
    case SeedKind::K::Out:
      if (b.a < 1 || b.a > d.arity || b.b < 1 || b.b > d.arity)
        throw ShapeError("output port out of range");
      return d.out[b.a - 1][b.b - 1];
    default:
      throw ShapeError("derivation needs a basic seed");
  }
}

DSummand delay_summand(const TypedProcess& tp, const DefTable& defs,
                       int fuel) {
  if (tp.proc->kind == Process::Kind::Call) {
    if (tp.proc->call_rn.target != tp.ctx)
      throw TypeError("call renaming does not land in the current context");
    DSummand s;
    s.ref = tp.proc->callee;
    s.ref_rn = tp.proc->call_rn;
    return s;
  }
  DSummand s;
  s.table = translate(tp, defs, fuel);
  return s;
}

Strategy delay(const TypedProcess& tp, const DefTable& defs, int fuel) {
  Strategy s;
  s.arity = tp.ctx;
  s.summands.push_back(delay_summand(tp, defs, fuel));
  return s;
}

}  // namespace

DefiniteStrategy translate(const TypedProcess& p, const DefTable& defs,
                           int fuel) {
  switch (p.proc->kind) {
    case Process::Kind::Call: {
      if (fuel <= 0)
        throw UnfoldLimit("translation keeps unfolding '" + p.proc->callee +
                          "' without reaching a guard");
      const Definition& d = defs.at(p.proc->callee);
      if (p.proc->call_rn.source != d.ctx ||
          p.proc->call_rn.target != p.ctx)
        throw TypeError("call renaming does not match the definition");
      return translate({rename(d.body, p.proc->call_rn), p.ctx}, defs,
                       fuel - 1);
    }
    case Process::Kind::Par: {
      DefiniteStrategy t = make_definite(p.ctx);
      t.forkl = std::make_shared<Strategy>(
          delay({p.proc->left, p.ctx}, defs, fuel));
      t.forkr = std::make_shared<Strategy>(
          delay({p.proc->right, p.ctx}, defs, fuel));
      return t;
    }
    case Process::Kind::Nu: {
      DefiniteStrategy t = make_definite(p.ctx);
      t.nu = std::make_shared<Strategy>(
          delay({p.proc->body, p.ctx + 1}, defs, fuel));
      return t;
    }
    case Process::Kind::Sum: {
      DefiniteStrategy t = make_definite(p.ctx);
      std::map<SeedKind, std::vector<DSummand>> slots;
      for (const Branch& br : p.proc->branches) {
        SeedKind b = SeedKind::tick(p.ctx);
        int cctx = p.ctx;
        switch (br.pfx.kind) {
          case Prefix::Kind::Output:
            b = SeedKind::out(p.ctx, br.pfx.a, br.pfx.b);
            break;
          case Prefix::Kind::Input:
            b = SeedKind::in(p.ctx, br.pfx.a);
            cctx = p.ctx + 1;
            break;
          case Prefix::Kind::Tick:
            break;
        }
        slots[b].push_back(delay_summand({br.cont, cctx}, defs, fuel));
      }
      for (auto& [b, sums] : slots)
        slot_ref(t, b) = std::make_shared<Strategy>(
            Strategy{cont_arity(b), std::move(sums)});
      return t;
    }
  }
  throw ShapeError("unreachable process kind");
}

DefiniteStrategy resolve_summand(const DSummand& s, const DefTable& defs,
                                 int fuel) {
  if (s.table) return *s.table;
  const Definition& d = defs.at(s.ref);
  if (s.ref_rn.source != d.ctx)
    throw TypeError("reference renaming does not match the definition");
  return translate({rename(d.body, s.ref_rn), s.ref_rn.target}, defs, fuel);
}

const Strategy& derive(const DefiniteStrategy& d, const SeedKind& b) {
  // slot_ref validates; const_cast is safe because we only read
  return *slot_ref(const_cast<DefiniteStrategy&>(d), b);
}

DefiniteStrategy pick(const Strategy& s, int i, const DefTable& defs,
                      int fuel) {
  if (i < 1 || i > static_cast<int>(s.summands.size()))
    throw ShapeError("summand index " + std::to_string(i) +
                     " out of range (sum has " +
                     std::to_string(s.summands.size()) + ")");
  return resolve_summand(s.summands[i - 1], defs, fuel);
}

Strategy rename_strategy(const Strategy& s, const Renaming& rn) {
  if (rn.source != s.arity)
    throw ShapeError("renaming source does not match the strategy arity");
  Strategy out;
  out.arity = rn.target;
  for (const DSummand& sm : s.summands) {
    if (sm.table) {
      DSummand t;
      t.table = rename_definite(*sm.table, rn);
      out.summands.push_back(std::move(t));
    } else {
      DSummand t;
      t.ref = sm.ref;
      t.ref_rn = rn.after(sm.ref_rn);
      out.summands.push_back(std::move(t));
    }
  }
  return out;
}

DefiniteStrategy rename_definite(const DefiniteStrategy& d,
                                 const Renaming& rn) {
  if (rn.source != d.arity)
    throw ShapeError("renaming source does not match the table arity");
  DefiniteStrategy out = make_definite(rn.target);
  Renaming lifted = rn.lift();
  // Empty entries are skipped before their target slot is computed, so rn
  // is only ever evaluated on ports that carry something.
  auto append = [](std::shared_ptr<Strategy>& slot, Strategy add) {
    auto grown = std::make_shared<Strategy>(*slot);
    for (auto& sm : add.summands) grown->summands.push_back(std::move(sm));
    slot = std::move(grown);
  };
  if (!d.forkl->summands.empty())
    append(out.forkl, rename_strategy(*d.forkl, rn));
  if (!d.forkr->summands.empty())
    append(out.forkr, rename_strategy(*d.forkr, rn));
  if (!d.tick->summands.empty())
    append(out.tick, rename_strategy(*d.tick, rn));
  if (!d.nu->summands.empty()) append(out.nu, rename_strategy(*d.nu, lifted));
  for (int a = 1; a <= d.arity; ++a)
    if (!d.in[a - 1]->summands.empty())
      append(out.in[rn(a) - 1], rename_strategy(*d.in[a - 1], lifted));
  for (int a = 1; a <= d.arity; ++a)
    for (int b = 1; b <= d.arity; ++b)
      if (!d.out[a - 1][b - 1]->summands.empty())
        append(out.out[rn(a) - 1][rn(b) - 1],
               rename_strategy(*d.out[a - 1][b - 1], rn));
  return out;
}

namespace {

std::uint64_t ways_def(const DefiniteStrategy& d, const View& v, size_t i,
                       const DefTable& defs, int fuel) {
  if (i == v.steps.size()) return 1;
  const SeedKind& b = v.steps[i];
  const Strategy& next = derive(d, b);
  std::uint64_t total = 0;
  for (const DSummand& sm : next.summands)
    total += ways_def(resolve_summand(sm, defs, fuel), v, i + 1, defs, fuel);
  return total;
}

}  // namespace

std::uint64_t accepts_view(const DefiniteStrategy& d, const View& v,
                           const DefTable& defs, int fuel) {
  if (d.arity != v.arity)
    throw ShapeError("view arity does not match the strategy");
  return ways_def(d, v, 0, defs, fuel);
}

std::uint64_t accepts_view(const Strategy& s, const View& v,
                           const DefTable& defs, int fuel) {
  if (s.arity != v.arity)
    throw ShapeError("view arity does not match the strategy");
  std::uint64_t total = 0;
  for (const DSummand& sm : s.summands)
    total += ways_def(resolve_summand(sm, defs, fuel), v, 0, defs, fuel);
  return total;
}

bool accepts_play(const PositionStrategy& ps, const Play& p,
                  const DefTable& defs, int fuel) {
  if (!(p.initial == ps.base))
    throw ShapeError("play does not start at the strategy's position");
  if (ps.assign.size() != ps.base.players.size())
    throw ShapeError("one strategy per player required");
  for (size_t pl = 0; pl < ps.base.players.size(); ++pl) {
    if (ps.assign[pl].arity != ps.base.players[pl].arity)
      throw ShapeError("strategy arity does not match its player");
    for (const View& v : views_of(p, static_cast<int>(pl)))
      if (accepts_view(ps.assign[pl], v, defs, fuel) == 0) return false;
  }
  return true;
}

// ---- textual format ----------------------------------------------------

std::string print_strategy(const Strategy& s) {
  std::string out = "(+";
  for (const DSummand& sm : s.summands) {
    out += " ";
    if (sm.table) {
      out += print_definite(*sm.table);
    } else {
      out += "(ref " + sm.ref;
      for (int v : sm.ref_rn.map) out += " " + std::to_string(v);
      out += ")";
    }
  }
  out += ")";
  return out;
}

std::string print_definite(const DefiniteStrategy& d) {
  std::string out = "<";
  bool first = true;
  auto add = [&](const std::string& label, const Strategy& s) {
    if (s.summands.empty()) return;
    if (!first) out += "; ";
    first = false;
    out += label + ": " + print_strategy(s);
  };
  add("forkl", *d.forkl);
  add("forkr", *d.forkr);
  add("tick", *d.tick);
  add("nu", *d.nu);
  for (int a = 1; a <= d.arity; ++a)
    add("in " + std::to_string(a), *d.in[a - 1]);
  for (int a = 1; a <= d.arity; ++a)
    for (int b = 1; b <= d.arity; ++b)
      add("out " + std::to_string(a) + " " + std::to_string(b),
          *d.out[a - 1][b - 1]);
  out += ">";
  return out;
}

namespace {

struct Lexer {
  std::string text;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ShapeError("strategy text, offset " + std::to_string(pos) + ": " +
                     msg);
  }
  void skip() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  char peek() {
    skip();
    return pos < text.size() ? text[pos] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos;
    return true;
  }
  std::string word() {
    skip();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_' || text[pos] == '\''))
      ++pos;
    if (start == pos) fail("expected a name");
    return text.substr(start, pos - start);
  }
  bool peek_digit() {
    skip();
    return pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]));
  }
  int number() {
    skip();
    size_t start = pos;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (start == pos) fail("expected a number");
    return std::stoi(text.substr(start, pos - start));
  }
};

Strategy parse_strategy_at(Lexer& lx, int arity);

DefiniteStrategy parse_definite_at(Lexer& lx, int arity) {
  lx.expect('<');
  DefiniteStrategy d = make_definite(arity);
  std::map<std::string, bool> seen;
  bool first = true;
  while (lx.peek() != '>') {
    if (!first) lx.expect(';');
    first = false;
    std::string key = lx.word();
    SeedKind b = SeedKind::tick(arity);
    if (key == "forkl") b = SeedKind::forkl(arity);
    else if (key == "forkr") b = SeedKind::forkr(arity);
    else if (key == "tick") b = SeedKind::tick(arity);
    else if (key == "nu") b = SeedKind::nu(arity);
    else if (key == "in") {
      int a = lx.number();
      if (a < 1 || a > arity) lx.fail("input port out of range");
      b = SeedKind::in(arity, a);
    } else if (key == "out") {
      int a = lx.number(), v = lx.number();
      if (a < 1 || a > arity || v < 1 || v > arity)
        lx.fail("output port out of range");
      b = SeedKind::out(arity, a, v);
    } else {
      lx.fail("unknown table entry '" + key + "'");
    }
    std::string dedup = key;
    if (b.k == SeedKind::K::In) dedup += " " + std::to_string(b.a);
    if (b.k == SeedKind::K::Out)
      dedup += " " + std::to_string(b.a) + " " + std::to_string(b.b);
    if (seen[dedup]) lx.fail("duplicate table entry '" + dedup + "'");
    seen[dedup] = true;
    lx.expect(':');
    slot_ref(d, b) = std::make_shared<Strategy>(
        parse_strategy_at(lx, cont_arity(b)));
  }
  lx.expect('>');
  return d;
}

Strategy parse_strategy_at(Lexer& lx, int arity) {
  lx.expect('(');
  lx.expect('+');
  Strategy s;
  s.arity = arity;
  while (lx.peek() != ')') {
    if (lx.peek() == '<') {
      DSummand sm;
      sm.table = parse_definite_at(lx, arity);
      s.summands.push_back(std::move(sm));
    } else {
      lx.expect('(');
      std::string kw = lx.word();
      if (kw != "ref") lx.fail("expected 'ref'");
      DSummand sm;
      sm.ref = lx.word();
      while (lx.peek_digit()) {
        int v = lx.number();
        if (v < 1 || v > arity) lx.fail("reference channel out of range");
        sm.ref_rn.map.push_back(v);
      }
      sm.ref_rn.source = static_cast<int>(sm.ref_rn.map.size());
      sm.ref_rn.target = arity;
      lx.expect(')');
      s.summands.push_back(std::move(sm));
    }
  }
  lx.expect(')');
  return s;
}

}  // namespace

Strategy parse_strategy(const std::string& text, int arity) {
  Lexer lx{text, 0};
  Strategy s = parse_strategy_at(lx, arity);
  if (lx.peek() != '\0') lx.fail("trailing input");
  return s;
}

DefiniteStrategy parse_definite(const std::string& text, int arity) {
  Lexer lx{text, 0};
  DefiniteStrategy d = parse_definite_at(lx, arity);
  if (lx.peek() != '\0') lx.fail("trailing input");
  return d;
}

}  // namespace pigame
