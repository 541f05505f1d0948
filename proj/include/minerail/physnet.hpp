#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minerail/core.hpp"

namespace minerail {

using json = nlohmann::ordered_json;

enum class NodeKind { Station, Loadout, LoadoutEntry, LoadoutExit, SidingInternal, Dummy };
enum class LinkKind { Mainline, Siding, Crossover, LoadoutInternal };
enum class BanDirection { Fwd, Bwd, Both };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Station: return "station";
    case NodeKind::Loadout: return "loadout";
    case NodeKind::LoadoutEntry: return "loadout_entry";
    case NodeKind::LoadoutExit: return "loadout_exit";
    case NodeKind::SidingInternal: return "siding_internal";
    case NodeKind::Dummy: return "dummy";
  }
  return "?";
}

inline const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Mainline: return "mainline";
    case LinkKind::Siding: return "siding";
    case LinkKind::Crossover: return "crossover";
    case LinkKind::LoadoutInternal: return "loadout_internal";
  }
  return "?";
}

/// Forbids trains carrying `tag` from traversing a link in a direction.
/// Tag "*" matches every train.
struct Ban {
  std::string tag;
  BanDirection direction = BanDirection::Both;
};

struct PhysNode {
  std::string id;
  NodeKind kind = NodeKind::Station;
  double loading_time_min = 0;  // P_i, load-outs only
  int loop_capacity = 1;        // cap_s, load-outs only
};

struct PhysLink {
  std::string id;
  int from = -1;
  int to = -1;
  LinkKind kind = LinkKind::Mainline;
  double capacity = 1;
  double travel_fwd_min = 0;
  double travel_bwd_min = 0;
  bool fwd_allowed = true;  // expansion around load-outs creates one-way links
  bool bwd_allowed = true;
  int dur_fwd = 0;  // instants, filled by validation / expansion passes
  int dur_bwd = 0;
  std::string iden_key;  // arcs of one physical track share this key
  std::vector<Ban> bans;
};

struct PhysicalNetwork {
  std::vector<PhysNode> nodes;
  std::vector<PhysLink> links;
  TimeGrid grid;
  bool expanded = false;
  // original load-out id -> (entry node id, exit node id), filled by split_loadouts
  std::map<std::string, std::pair<std::string, std::string>> loadout_map;

  int find_node(const std::string& id) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
      if (nodes[i].id == id) return i;
    return -1;
  }

  int require_node(const std::string& id) const {
    int i = find_node(id);
    if (i < 0) throw ValidationError("unknown node '" + id + "'");
    return i;
  }

  int add_node(PhysNode n) {
    if (find_node(n.id) >= 0) throw ValidationError("duplicate node id '" + n.id + "'");
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  bool is_loadout_like(int idx) const {
    NodeKind k = nodes[idx].kind;
    return k == NodeKind::Loadout || k == NodeKind::LoadoutEntry || k == NodeKind::LoadoutExit;
  }

  /// Maps a node reference in train data onto the expanded network: a
  /// load-out id resolves to its exit node, everything else to itself.
  std::string resolve_train_node(const std::string& id) const {
    auto it = loadout_map.find(id);
    if (it != loadout_map.end()) return it->second.second;
    return id;
  }

  void validate() const {
    grid.validate();
    std::set<std::string> seen;
    for (const auto& n : nodes) {
      if (!seen.insert(n.id).second) throw ValidationError("duplicate node id '" + n.id + "'");
      if (n.kind == NodeKind::Loadout || n.kind == NodeKind::LoadoutEntry) {
        if (n.loading_time_min <= 0 && n.kind == NodeKind::Loadout)
          throw ValidationError("load-out '" + n.id + "': loading_time_min must be positive");
        if (n.loop_capacity < 1)
          throw ValidationError("load-out '" + n.id + "': loop_capacity must be >= 1");
      }
    }
    for (const auto& l : links) {
      if (l.from < 0 || l.from >= static_cast<int>(nodes.size()) || l.to < 0 ||
          l.to >= static_cast<int>(nodes.size()))
        throw ValidationError("link '" + l.id + "': endpoint out of range");
      if (l.travel_fwd_min <= 0 || l.travel_bwd_min <= 0)
        throw ValidationError("link '" + l.id + "': travel times must be positive");
      if ((l.kind == LinkKind::Mainline || l.kind == LinkKind::Siding) && l.capacity < 1)
        throw ValidationError("link '" + l.id + "': capacity must be >= 1");
    }
    // connectivity over the undirected view
    if (!nodes.empty()) {
      std::vector<int> comp(nodes.size(), 0);
      std::vector<int> stack{0};
      comp[0] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& l : links) {
          int v = -1;
          if (l.from == u) v = l.to;
          else if (l.to == u) v = l.from;
          if (v >= 0 && !comp[v]) {
            comp[v] = 1;
            stack.push_back(v);
          }
        }
      }
      for (size_t i = 0; i < nodes.size(); ++i)
        if (!comp[i]) throw ValidationError("graph is disconnected at node '" + nodes[i].id + "'");
    }
  }
};

/// One leg of a real train's journey between direction changes.
struct ModelTrain {
  int id = -1;
  std::string real_train;
  int leg_index = 0;
  int dep_q = 0;                    // earliest departure instant
  std::string dep_node;             // physical node id (load-out ids allowed)
  std::string dest_node;            // physical node id (load-out ids allowed)
  int pred = -1;                    // predecessor model-train id, -1 for none
  std::vector<std::string> tags;
};

struct RealTrain {
  std::string name;
  std::string dep_node;
  int dep_q = 0;
  std::optional<std::string> dest_node;    // single-leg form
  std::vector<std::string> loadout_seq;    // decomposed form
  std::vector<std::string> tags;
};

// ---------------------------------------------------------------------------
// Document loading
// ---------------------------------------------------------------------------

inline NodeKind parse_node_kind(const std::string& s) {
  if (s == "station") return NodeKind::Station;
  if (s == "loadout") return NodeKind::Loadout;
  throw ValidationError("node kind '" + s + "' is not accepted in input");
}

inline LinkKind parse_link_kind(const std::string& s) {
  if (s == "mainline") return LinkKind::Mainline;
  if (s == "siding") return LinkKind::Siding;
  if (s == "crossover") return LinkKind::Crossover;
  throw ValidationError("link kind '" + s + "' is not accepted in input");
}

inline BanDirection parse_ban_direction(const std::string& s) {
  if (s == "fwd") return BanDirection::Fwd;
  if (s == "bwd") return BanDirection::Bwd;
  if (s == "both") return BanDirection::Both;
  throw ValidationError("ban direction '" + s + "' must be fwd|bwd|both");
}

inline PhysicalNetwork load_network(const json& doc) {
  PhysicalNetwork net;
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("links") || !doc.contains("grid"))
    throw ValidationError("network document must have keys nodes, links, grid");
  const auto& grid = doc.at("grid");
  net.grid.instant_len_min = grid.at("instant_len_min").get<int>();
  net.grid.horizon_instants = grid.at("horizon_instants").get<int>();
  net.grid.validate();
  for (const auto& jn : doc.at("nodes")) {
    PhysNode n;
    n.id = jn.at("id").get<std::string>();
    n.kind = parse_node_kind(jn.at("kind").get<std::string>());
    if (jn.contains("loading_time_min")) n.loading_time_min = jn.at("loading_time_min").get<double>();
    if (jn.contains("loop_capacity")) n.loop_capacity = jn.at("loop_capacity").get<int>();
    net.add_node(std::move(n));
  }
  std::map<std::string, int> pair_count;
  for (const auto& jl : doc.at("links")) {
    PhysLink l;
    l.from = net.require_node(jl.at("from").get<std::string>());
    l.to = net.require_node(jl.at("to").get<std::string>());
    l.kind = parse_link_kind(jl.at("kind").get<std::string>());
    l.capacity = jl.at("capacity").get<double>();
    l.travel_fwd_min = jl.at("travel_fwd_min").get<double>();
    l.travel_bwd_min = jl.at("travel_bwd_min").get<double>();
    if (jl.contains("bans")) {
      for (const auto& jb : jl.at("bans"))
        l.bans.push_back({jb.at("tag").get<std::string>(),
                          parse_ban_direction(jb.at("direction").get<std::string>())});
    }
    if (l.kind == LinkKind::Crossover) l.capacity = 1;  // treated as capacity-1 mainline
    std::string base = net.nodes[l.from].id + "-" + net.nodes[l.to].id;
    int n = pair_count[base]++;
    l.id = n == 0 ? base : base + "#" + std::to_string(n + 1);
    l.iden_key = l.id;
    l.dur_fwd = net.grid.instants(l.travel_fwd_min);
    l.dur_bwd = net.grid.instants(l.travel_bwd_min);
    net.links.push_back(std::move(l));
  }
  net.validate();
  return net;
}

inline json serialize_network(const PhysicalNetwork& net) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : net.nodes) {
    json jn{{"id", n.id}, {"kind", to_string(n.kind)}};
    if (n.kind == NodeKind::Loadout) {
      jn["loading_time_min"] = n.loading_time_min;
      jn["loop_capacity"] = n.loop_capacity;
    }
    doc["nodes"].push_back(jn);
  }
  doc["links"] = json::array();
  for (const auto& l : net.links) {
    json jl{{"from", net.nodes[l.from].id}, {"to", net.nodes[l.to].id},
            {"kind", to_string(l.kind)},   {"capacity", l.capacity},
            {"travel_fwd_min", l.travel_fwd_min}, {"travel_bwd_min", l.travel_bwd_min}};
    if (!l.bans.empty()) {
      jl["bans"] = json::array();
      for (const auto& b : l.bans)
        jl["bans"].push_back({{"tag", b.tag},
                              {"direction", b.direction == BanDirection::Fwd   ? "fwd"
                                            : b.direction == BanDirection::Bwd ? "bwd"
                                                                               : "both"}});
    }
    doc["links"].push_back(jl);
  }
  doc["grid"] = {{"instant_len_min", net.grid.instant_len_min},
                 {"horizon_instants", net.grid.horizon_instants}};
  return doc;
}

// ---------------------------------------------------------------------------
// Fleet
// ---------------------------------------------------------------------------

inline std::vector<RealTrain> load_fleet(const json& doc) {
  if (!doc.is_array()) throw ValidationError("fleet document must be a JSON array");
  std::vector<RealTrain> out;
  for (const auto& jt : doc) {
    RealTrain t;
    t.name = jt.at("name").get<std::string>();
    t.dep_node = jt.at("dep_node").get<std::string>();
    t.dep_q = jt.at("dep_q").get<int>();
    if (jt.contains("dest_node")) t.dest_node = jt.at("dest_node").get<std::string>();
    if (jt.contains("loadout_seq"))
      for (const auto& s : jt.at("loadout_seq")) t.loadout_seq.push_back(s.get<std::string>());
    if (jt.contains("tags"))
      for (const auto& s : jt.at("tags")) t.tags.push_back(s.get<std::string>());
    if (!t.dest_node && t.loadout_seq.empty())
      throw ValidationError("train '" + t.name + "': needs dest_node or loadout_seq");
    out.push_back(std::move(t));
  }
  return out;
}

/// Break a real train visiting n load-outs into n+1 chained model-train legs.
/// Ids are assigned from `first_id` upward.
inline std::vector<ModelTrain> decompose_train(const RealTrain& train, const PhysicalNetwork& network,
                                               int first_id = 0) {
  std::vector<ModelTrain> legs;
  auto mk = [&](const std::string& dep, const std::string& dest) {
    ModelTrain t;
    t.id = first_id + static_cast<int>(legs.size());
    t.real_train = train.name;
    t.leg_index = static_cast<int>(legs.size());
    t.dep_q = train.dep_q;
    t.dep_node = dep;
    t.dest_node = dest;
    t.pred = legs.empty() ? -1 : legs.back().id;
    t.tags = train.tags;
    legs.push_back(std::move(t));
  };
  if (train.loadout_seq.empty()) {
    mk(train.dep_node, *train.dest_node);
    return legs;
  }
  for (const auto& lo : train.loadout_seq) {
    int idx = network.find_node(lo);
    if (idx < 0 || network.nodes[idx].kind != NodeKind::Loadout)
      throw ValidationError("train '" + train.name + "': '" + lo + "' is not a load-out");
    mk(legs.empty() ? train.dep_node : train.loadout_seq[legs.size() - 1], lo);
  }
  mk(train.loadout_seq.back(), train.dep_node);
  return legs;
}

inline std::vector<ModelTrain> validate_fleet(const std::vector<RealTrain>& trains,
                                              const PhysicalNetwork& network, const TimeGrid& grid) {
  std::set<std::string> names;
  std::vector<ModelTrain> out;
  for (const auto& t : trains) {
    if (!names.insert(t.name).second)
      throw ValidationError("duplicate train name '" + t.name + "'");
    if (t.dep_q < 0 || t.dep_q >= grid.horizon_instants)
      throw ValidationError("train '" + t.name + "': dep_q outside the time grid");
    network.require_node(t.dep_node);
    if (t.dest_node) network.require_node(*t.dest_node);
    std::vector<ModelTrain> legs;
    try {
      legs = decompose_train(t, network, static_cast<int>(out.size()));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (train '" + t.name + "')");
    }
    for (auto& l : legs) out.push_back(std::move(l));
  }
  return out;
}

}  // namespace minerail
