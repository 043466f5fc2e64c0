#include "pigame/position.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace pigame {

void check_horiz(const HorizMap& h) {
  if (static_cast<int>(h.chan_map.size()) != h.source.channels)
    throw ShapeError("channel map has the wrong domain size");
  for (int c : h.chan_map)
    if (c < 0 || c >= h.target.channels)
      throw ShapeError("channel map out of range");
  if (h.player_map.size() != h.source.players.size())
    throw ShapeError("player map has the wrong domain size");
  std::vector<char> hit(h.target.players.size(), 0);
  for (size_t p = 0; p < h.player_map.size(); ++p) {
    int q = h.player_map[p];
    if (q < 0 || q >= static_cast<int>(h.target.players.size()))
      throw ShapeError("player map out of range");
    if (hit[q]) throw ShapeError("player map collapses two players");
    hit[q] = 1;
    const Player& src = h.source.players[p];
    const Player& tgt = h.target.players[q];
    if (src.arity != tgt.arity) throw ShapeError("player arity not preserved");
    for (int i = 0; i < src.arity; ++i)
      if (tgt.attach[i] != h.chan_map[src.attach[i]])
        throw ShapeError("player attachment not preserved");
  }
}

HorizMap identity_horiz(const Position& p) {
  HorizMap h;
  h.source = h.target = p;
  h.chan_map.resize(p.channels);
  std::iota(h.chan_map.begin(), h.chan_map.end(), 0);
  h.player_map.resize(p.players.size());
  std::iota(h.player_map.begin(), h.player_map.end(), 0);
  return h;
}

HorizMap compose(const HorizMap& g, const HorizMap& h) {
  if (!(h.target == g.source))
    throw ShapeError("composition boundary mismatch");
  HorizMap out;
  out.source = h.source;
  out.target = g.target;
  for (int c : h.chan_map) out.chan_map.push_back(g.chan_map.at(c));
  for (int p : h.player_map) out.player_map.push_back(g.player_map.at(p));
  return out;
}

InterfaceOf interface_of(const Position& x) {
  InterfaceOf out;
  out.iface.channels = x.channels;
  out.incl.source = out.iface;
  out.incl.target = x;
  out.incl.chan_map.resize(x.channels);
  std::iota(out.incl.chan_map.begin(), out.incl.chan_map.end(), 0);
  return out;
}

Pushout glue(const Position& x, const HorizMap& i, const HorizMap& f) {
  if (!i.source.players.empty())
    throw ShapeError("gluing interface must have no players");
  if (!(i.target == x)) throw ShapeError("interface inclusion must land in the glued position");
  if (!(f.source == i.source))
    throw ShapeError("the two legs must share the interface");
  check_horiz(i);
  check_horiz(f);
  // i must be injective on channels for the pushout below to be one
  {
    std::vector<char> hit(x.channels, 0);
    for (int c : i.chan_map) {
      if (hit[c]) throw ShapeError("interface inclusion must be injective");
      hit[c] = 1;
    }
  }

  Pushout out;
  out.result = f.target;
  // interface channel owning each x channel, if any
  std::vector<int> owner(x.channels, -1);
  for (size_t d = 0; d < i.chan_map.size(); ++d)
    owner[i.chan_map[d]] = static_cast<int>(d);

  HorizMap& fm = out.from_main;
  fm.source = x;
  fm.chan_map.resize(x.channels);
  for (int c = 0; c < x.channels; ++c)
    fm.chan_map[c] = owner[c] >= 0 ? f.chan_map[owner[c]] : out.result.channels++;
  for (const auto& pl : x.players) {
    Player q{pl.arity, {}};
    for (int a : pl.attach) q.attach.push_back(fm.chan_map[a]);
    fm.player_map.push_back(static_cast<int>(out.result.players.size()));
    out.result.players.push_back(std::move(q));
  }
  fm.target = out.result;

  HorizMap& fc = out.from_context;
  fc.source = f.target;
  fc.target = out.result;
  fc.chan_map.resize(f.target.channels);
  std::iota(fc.chan_map.begin(), fc.chan_map.end(), 0);
  fc.player_map.resize(f.target.players.size());
  std::iota(fc.player_map.begin(), fc.player_map.end(), 0);
  return out;
}

namespace {

// Dense recoloring: map each distinct signature to a small int, preserving
// signature order for determinism.
template <class Sig>
std::vector<int> compress(const std::vector<Sig>& sigs) {
  std::map<Sig, int> ids;
  for (const auto& s : sigs) ids.emplace(s, 0);
  int next = 0;
  for (auto& [k, v] : ids) v = next++;
  std::vector<int> out;
  out.reserve(sigs.size());
  for (const auto& s : sigs) out.push_back(ids[s]);
  return out;
}

std::string render(const Position& p, const std::vector<std::string>& tags,
                   const std::vector<int>& chan_perm) {
  std::vector<std::string> rows;
  for (size_t pl = 0; pl < p.players.size(); ++pl) {
    std::string r = "p" + std::to_string(p.players[pl].arity) + "<" +
                    (tags.empty() ? std::string() : tags[pl]) + ">[";
    for (int a : p.players[pl].attach)
      r += std::to_string(chan_perm[a]) + ",";
    r += "]";
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end());
  std::string out = "C" + std::to_string(p.channels) + ";";
  for (auto& r : rows) out += r;
  return out;
}

constexpr long kPermCap = 5040;

}  // namespace

CanonicalPosition canonical_position(const Position& p,
                                     const std::vector<std::string>& player_tags) {
  if (!player_tags.empty() && player_tags.size() != p.players.size())
    throw ShapeError("one tag per player, or none");

  // Iterative refinement of channel colors against player colors.
  std::vector<int> pcol;
  {
    std::vector<std::pair<int, std::string>> sig;
    for (size_t i = 0; i < p.players.size(); ++i)
      sig.push_back({p.players[i].arity,
                     player_tags.empty() ? std::string() : player_tags[i]});
    pcol = compress(sig);
  }
  std::vector<int> ccol(p.channels, 0);
  for (int round = 0; round < p.channels + static_cast<int>(p.players.size()) + 2;
       ++round) {
    std::vector<std::vector<std::pair<int, int>>> csig(p.channels);
    for (size_t pl = 0; pl < p.players.size(); ++pl)
      for (int port = 0; port < p.players[pl].arity; ++port)
        csig[p.players[pl].attach[port]].push_back({pcol[pl], port});
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> cfull(p.channels);
    for (int c = 0; c < p.channels; ++c) {
      std::sort(csig[c].begin(), csig[c].end());
      cfull[c] = {ccol[c], std::move(csig[c])};
    }
    auto ccol2 = compress(cfull);
    std::vector<std::pair<int, std::vector<int>>> pfull(p.players.size());
    for (size_t pl = 0; pl < p.players.size(); ++pl) {
      std::vector<int> at;
      for (int a : p.players[pl].attach) at.push_back(ccol2[a]);
      pfull[pl] = {pcol[pl], std::move(at)};
    }
    auto pcol2 = compress(pfull);
    if (ccol2 == ccol && pcol2 == pcol) break;
    ccol = std::move(ccol2);
    pcol = std::move(pcol2);
  }

  // Channel classes in color order; search class-respecting renumberings for
  // the least rendering, up to a cap.
  std::vector<int> order(p.channels);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ccol[a] < ccol[b]; });
  std::vector<std::vector<int>> classes;
  for (int c : order) {
    if (classes.empty() || ccol[classes.back().front()] != ccol[c])
      classes.push_back({});
    classes.back().push_back(c);
  }
  long perms = 1;
  for (const auto& cl : classes) {
    for (size_t k = 2; k <= cl.size() && perms <= kPermCap; ++k)
      perms *= static_cast<long>(k);
    if (perms > kPermCap) break;
  }

  CanonicalPosition best;
  auto apply = [&](const std::vector<std::vector<int>>& arrangement) {
    std::vector<int> perm(p.channels);
    int next = 0;
    for (const auto& cl : arrangement)
      for (int c : cl) perm[c] = next++;
    std::string key = render(p, player_tags, perm);
    if (best.key.empty() || key < best.key) {
      best.key = std::move(key);
      best.chan_perm = std::move(perm);
    }
  };

  if (perms > kPermCap) {
    apply(classes);
  } else {
    // enumerate permutations within each class (odometer over classes)
    std::vector<std::vector<int>> arr = classes;
    for (auto& cl : arr) std::sort(cl.begin(), cl.end());
    while (true) {
      apply(arr);
      size_t k = 0;
      for (; k < arr.size(); ++k)
        if (std::next_permutation(arr[k].begin(), arr[k].end())) break;
      if (k == arr.size()) break;
    }
  }

  // Canonical player order: sort by rendered row.
  std::vector<std::pair<std::string, int>> rows;
  for (size_t pl = 0; pl < p.players.size(); ++pl) {
    std::string r = "p" + std::to_string(p.players[pl].arity) + "<" +
                    (player_tags.empty() ? std::string() : player_tags[pl]) +
                    ">[";
    for (int a : p.players[pl].attach)
      r += std::to_string(best.chan_perm[a]) + ",";
    r += "]";
    rows.push_back({std::move(r), static_cast<int>(pl)});
  }
  std::sort(rows.begin(), rows.end());
  best.player_perm.resize(p.players.size());
  for (size_t slot = 0; slot < rows.size(); ++slot)
    best.player_perm[rows[slot].second] = static_cast<int>(slot);
  return best;
}

std::string to_dot(const Position& p) {
  std::ostringstream os;
  os << "graph position {\n  node [fontsize=10];\n";
  for (int c = 0; c < p.channels; ++c)
    os << "  c" << c << " [shape=circle, label=\"" << c << "\"];\n";
  for (size_t pl = 0; pl < p.players.size(); ++pl)
    os << "  p" << pl << " [shape=point, width=0.12, xlabel=\"p" << pl
       << "\"];\n";
  for (size_t pl = 0; pl < p.players.size(); ++pl)
    for (int port = 0; port < p.players[pl].arity; ++port)
      os << "  p" << pl << " -- c" << p.players[pl].attach[port]
         << " [label=\"" << (port + 1) << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace pigame
