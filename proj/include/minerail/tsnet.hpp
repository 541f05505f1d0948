#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "minerail/physnet.hpp"

namespace minerail {

// ---------------------------------------------------------------------------
// Expansion passes over the physical network
// ---------------------------------------------------------------------------

/// Replace every load-out s by an entry/exit node pair joined by a loading
/// link of duration P_s. Links touching a load-out become one-way siblings
/// (into the entry node, out of the exit node) sharing the parent's identity.
inline PhysicalNetwork split_loadouts(const PhysicalNetwork& network) {
  PhysicalNetwork out;
  out.grid = network.grid;
  out.loadout_map = network.loadout_map;
  std::vector<int> remap(network.nodes.size(), -1);
  for (size_t i = 0; i < network.nodes.size(); ++i) {
    const auto& n = network.nodes[i];
    if (n.kind != NodeKind::Loadout) {
      remap[i] = out.add_node(n);
      continue;
    }
    PhysNode in{n.id + ".in", NodeKind::LoadoutEntry, n.loading_time_min, n.loop_capacity};
    PhysNode ex{n.id + ".out", NodeKind::LoadoutExit, 0, 1};
    int in_idx = out.add_node(in);
    out.add_node(ex);
    remap[i] = in_idx;  // entry node; exit is in_idx + 1
    out.loadout_map[n.id] = {n.id + ".in", n.id + ".out"};

    PhysLink load;
    load.id = n.id + ".load";
    load.from = in_idx;
    load.to = in_idx + 1;
    load.kind = LinkKind::LoadoutInternal;
    load.capacity = 1;
    load.travel_fwd_min = load.travel_bwd_min = n.loading_time_min;
    load.bwd_allowed = false;
    load.dur_fwd = load.dur_bwd = std::max(1, out.grid.instants(n.loading_time_min));
    load.iden_key = load.id;
    out.links.push_back(std::move(load));
  }
  auto filter_bans = [](const std::vector<Ban>& bans, bool fwd_side) {
    std::vector<Ban> kept;
    for (const auto& b : bans) {
      if (b.direction == BanDirection::Both ||
          (fwd_side && b.direction == BanDirection::Fwd) ||
          (!fwd_side && b.direction == BanDirection::Bwd))
        kept.push_back({b.tag, BanDirection::Fwd});
    }
    return kept;
  };
  for (const auto& l : network.links) {
    bool from_lo = network.nodes[l.from].kind == NodeKind::Loadout;
    bool to_lo = network.nodes[l.to].kind == NodeKind::Loadout;
    if (!from_lo && !to_lo) {
      PhysLink c = l;
      c.from = remap[l.from];
      c.to = remap[l.to];
      out.links.push_back(std::move(c));
      continue;
    }
    // forward sibling: original from -> to, entering at to.in / leaving from from.out
    PhysLink f = l;
    f.id = l.id + ".f";
    f.from = from_lo ? remap[l.from] + 1 : remap[l.from];
    f.to = to_lo ? remap[l.to] : remap[l.to];
    f.bwd_allowed = false;
    f.bans = filter_bans(l.bans, true);
    out.links.push_back(std::move(f));
    // reverse sibling: original to -> from
    PhysLink r = l;
    r.id = l.id + ".r";
    r.from = to_lo ? remap[l.to] + 1 : remap[l.to];
    r.to = from_lo ? remap[l.from] : remap[l.from];
    r.travel_fwd_min = l.travel_bwd_min;
    r.travel_bwd_min = l.travel_bwd_min;
    r.dur_fwd = l.dur_bwd;
    r.dur_bwd = l.dur_bwd;
    r.bwd_allowed = false;
    r.bans = filter_bans(l.bans, false);
    out.links.push_back(std::move(r));
  }
  return out;
}

/// Break every link of capacity d > 1 into a chain through floor(d-1) dummy
/// nodes. Segment durations apportion the parent's duration exactly; every
/// remaining link has capacity 1.
inline PhysicalNetwork subdivide_by_capacity(const PhysicalNetwork& network) {
  PhysicalNetwork out;
  out.grid = network.grid;
  out.loadout_map = network.loadout_map;
  out.nodes = network.nodes;
  for (const auto& l : network.links) {
    int dummies = static_cast<int>(std::floor(l.capacity - 1 + 1e-9));
    if (dummies < 1) {
      PhysLink c = l;
      c.capacity = 1;
      out.links.push_back(std::move(c));
      continue;
    }
    int nseg = dummies + 1;
    auto fwd = apportion_instants(l.dur_fwd, nseg);
    auto bwd = apportion_instants(l.dur_bwd, nseg);
    int prev = l.from;
    for (int s = 0; s < nseg; ++s) {
      int next;
      if (s == nseg - 1) {
        next = l.to;
      } else {
        PhysNode d{l.id + ".d" + std::to_string(s + 1), NodeKind::Dummy, 0, 1};
        next = out.add_node(d);
      }
      PhysLink seg = l;
      seg.id = l.id + "#s" + std::to_string(s);
      seg.from = prev;
      seg.to = next;
      seg.capacity = 1;
      seg.travel_fwd_min = l.travel_fwd_min / nseg;
      seg.travel_bwd_min = l.travel_bwd_min / nseg;
      seg.dur_fwd = fwd[s];
      // backward traversal crosses segments in reverse order
      seg.dur_bwd = bwd[nseg - 1 - s];
      seg.iden_key = seg.id;
      out.links.push_back(std::move(seg));
      prev = next;
    }
  }
  return out;
}

/// Insert a dwell node at the midpoint of every siding link, halving travel
/// times per direction. Both halves keep the parent's arc identity.
inline PhysicalNetwork insert_siding_nodes(const PhysicalNetwork& network) {
  PhysicalNetwork out;
  out.grid = network.grid;
  out.loadout_map = network.loadout_map;
  out.nodes = network.nodes;
  for (const auto& l : network.links) {
    if (l.kind != LinkKind::Siding) {
      out.links.push_back(l);
      continue;
    }
    PhysNode w{l.id + "#w", NodeKind::SidingInternal, 0, 1};
    int widx = out.add_node(w);
    auto fwd = apportion_instants(l.dur_fwd, 2);
    auto bwd = apportion_instants(l.dur_bwd, 2);
    PhysLink a = l, b = l;
    a.id = l.id + "#a";
    a.from = l.from;
    a.to = widx;
    a.travel_fwd_min = l.travel_fwd_min / 2;
    a.travel_bwd_min = l.travel_bwd_min / 2;
    a.dur_fwd = fwd[0];
    a.dur_bwd = bwd[1];
    b.id = l.id + "#b";
    b.from = widx;
    b.to = l.to;
    b.travel_fwd_min = l.travel_fwd_min / 2;
    b.travel_bwd_min = l.travel_bwd_min / 2;
    b.dur_fwd = fwd[1];
    b.dur_bwd = bwd[0];
    out.links.push_back(std::move(a));
    out.links.push_back(std::move(b));
  }
  return out;
}

/// All three construction passes in order.
inline PhysicalNetwork expand_network(const PhysicalNetwork& network) {
  PhysicalNetwork out = insert_siding_nodes(subdivide_by_capacity(split_loadouts(network)));
  out.expanded = true;
  return out;
}

// ---------------------------------------------------------------------------
// Time-space network
// ---------------------------------------------------------------------------

enum class ArcClass { Transit, Waiting, Starting, Disappearing };

inline const char* to_string(ArcClass k) {
  switch (k) {
    case ArcClass::Transit: return "transit";
    case ArcClass::Waiting: return "waiting";
    case ArcClass::Starting: return "starting";
    case ArcClass::Disappearing: return "disappearing";
  }
  return "?";
}

struct TsNode {
  int id = -1;
  int phys = -1;   // expanded physical node index, -1 for source/sink
  int time = -1;   // instant, -1 for source/sink
  enum Kind { Timed, Source, Sink } kind = Timed;
  int train = -1;  // owning model train for sources
};

struct TsArc {
  int id = -1;
  int from = -1;
  int to = -1;
  ArcClass klass = ArcClass::Transit;
  int phys_link = -1;    // expanded link index for transit arcs
  int duration = 0;      // instants
  int iden_group = -1;   // transit arcs only
  int train = -1;        // owning model train for starting arcs
};

/// A model train bound to the expanded network.
struct TrainBinding {
  ModelTrain train;
  int dep_phys = -1;
  int dest_phys = -1;
  int source_node = -1;  // ts node id
};

struct TimeSpaceNetwork {
  PhysicalNetwork net;  // expanded physical network
  TimeGrid grid;
  std::vector<TsNode> nodes;
  std::vector<TsArc> arcs;
  std::vector<std::vector<int>> outb, inb;   // per ts node
  std::vector<std::string> iden_keys;        // group index -> key
  std::vector<std::vector<int>> iden;        // group index -> transit arc ids
  std::vector<TrainBinding> trains;
  int sink = -1;

  int timed(int phys, int k) const { return phys * grid.horizon_instants + k; }

  std::string node_label(int id) const {
    const TsNode& n = nodes[id];
    if (n.kind == TsNode::Sink) return "sink";
    if (n.kind == TsNode::Source)
      return "src:" + trains[n.train].train.real_train + "#" +
             std::to_string(trains[n.train].train.leg_index);
    return net.nodes[n.phys].id + "@" + std::to_string(n.time);
  }

  int count(ArcClass k) const {
    int c = 0;
    for (const auto& a : arcs)
      if (a.klass == k) ++c;
    return c;
  }
};

/// Build the time-space graph over an expanded physical network. Trains may
/// reference original load-out ids (resolved to the exit node) or expanded
/// node ids directly.
inline TimeSpaceNetwork build_tsnet(const PhysicalNetwork& network, const TimeGrid& grid,
                                    const std::vector<ModelTrain>& trains) {
  TimeSpaceNetwork ts;
  ts.net = network;
  ts.grid = grid;
  const int Q = grid.horizon_instants;
  const int P = static_cast<int>(network.nodes.size());

  for (int p = 0; p < P; ++p)
    for (int k = 0; k < Q; ++k)
      ts.nodes.push_back({p * Q + k, p, k, TsNode::Timed, -1});
  for (const auto& t : trains) {
    TrainBinding b;
    b.train = t;
    b.dep_phys = network.require_node(network.resolve_train_node(t.dep_node));
    b.dest_phys = network.require_node(network.resolve_train_node(t.dest_node));
    if (t.dep_q >= Q)
      throw ValidationError("train '" + t.real_train + "': departure instant " +
                            std::to_string(t.dep_q) + " is outside the horizon");
    b.source_node = static_cast<int>(ts.nodes.size());
    ts.nodes.push_back({b.source_node, -1, -1, TsNode::Source, static_cast<int>(ts.trains.size())});
    ts.trains.push_back(std::move(b));
  }
  ts.sink = static_cast<int>(ts.nodes.size());
  ts.nodes.push_back({ts.sink, -1, -1, TsNode::Sink, -1});
  ts.outb.assign(ts.nodes.size(), {});
  ts.inb.assign(ts.nodes.size(), {});

  std::map<std::string, int> group_of;
  auto add_arc = [&](int from, int to, ArcClass klass, int link, int dur, int train) {
    TsArc a{static_cast<int>(ts.arcs.size()), from, to, klass, link, dur, -1, train};
    if (klass == ArcClass::Transit) {
      const std::string& key = network.links[link].iden_key;
      auto it = group_of.find(key);
      if (it == group_of.end()) {
        it = group_of.emplace(key, static_cast<int>(ts.iden.size())).first;
        ts.iden_keys.push_back(key);
        ts.iden.emplace_back();
      }
      a.iden_group = it->second;
      ts.iden[it->second].push_back(a.id);
    }
    ts.outb[from].push_back(a.id);
    ts.inb[to].push_back(a.id);
    ts.arcs.push_back(std::move(a));
  };

  // transit arcs, both directions where allowed
  for (int li = 0; li < static_cast<int>(network.links.size()); ++li) {
    const auto& l = network.links[li];
    if (l.fwd_allowed) {
      if (l.dur_fwd < 1) throw InternalError("link '" + l.id + "': nonpositive forward duration");
      for (int k = 0; k + l.dur_fwd <= Q - 1; ++k)
        add_arc(ts.timed(l.from, k), ts.timed(l.to, k + l.dur_fwd), ArcClass::Transit, li, l.dur_fwd, -1);
    }
    if (l.bwd_allowed) {
      if (l.dur_bwd < 1) throw InternalError("link '" + l.id + "': nonpositive backward duration");
      for (int k = 0; k + l.dur_bwd <= Q - 1; ++k)
        add_arc(ts.timed(l.to, k), ts.timed(l.from, k + l.dur_bwd), ArcClass::Transit, li, l.dur_bwd, -1);
    }
  }

  // waiting arcs: siding dwell nodes, and load-out loop queueing at the entry node
  for (int p = 0; p < P; ++p) {
    const auto& n = network.nodes[p];
    if (n.kind == NodeKind::SidingInternal) {
      for (int k = 0; k + 1 <= Q - 1; ++k)
        add_arc(ts.timed(p, k), ts.timed(p, k + 1), ArcClass::Waiting, -1, 1, -1);
    } else if (n.kind == NodeKind::LoadoutEntry) {
      for (int c = 0; c < n.loop_capacity - 1; ++c)
        for (int k = 0; k + 1 <= Q - 1; ++k)
          add_arc(ts.timed(p, k), ts.timed(p, k + 1), ArcClass::Waiting, -1, 1, -1);
    }
  }

  // disappearing arcs: every station, plus every destination node of a train
  std::set<int> dest_nodes;
  for (const auto& b : ts.trains) dest_nodes.insert(b.dest_phys);
  for (int p = 0; p < P; ++p) {
    if (network.nodes[p].kind == NodeKind::Station || dest_nodes.count(p)) {
      for (int k = 0; k < Q; ++k)
        add_arc(ts.timed(p, k), ts.sink, ArcClass::Disappearing, -1, 0, -1);
    }
  }

  // starting arcs from every train's source
  for (int ti = 0; ti < static_cast<int>(ts.trains.size()); ++ti) {
    const auto& b = ts.trains[ti];
    for (int k = std::max(0, b.train.dep_q); k < Q; ++k)
      add_arc(b.source_node, ts.timed(b.dep_phys, k), ArcClass::Starting, -1, 0, ti);
  }
  return ts;
}

/// Debug export of the time-space graph, one node/edge per line (DOT).
inline std::string export_graph(const TimeSpaceNetwork& ts) {
  std::ostringstream os;
  os << "digraph timespace {\n";
  for (const auto& n : ts.nodes) {
    os << "  \"" << ts.node_label(n.id) << "\" [kind="
       << (n.kind == TsNode::Timed ? "timed" : n.kind == TsNode::Source ? "source" : "sink");
    if (n.kind == TsNode::Timed) os << ", time=" << n.time;
    os << "];\n";
  }
  for (const auto& a : ts.arcs) {
    os << "  \"" << ts.node_label(a.from) << "\" -> \"" << ts.node_label(a.to) << "\" [class="
       << to_string(a.klass) << ", duration=" << a.duration;
    if (a.klass == ArcClass::Transit)
      os << ", link=\"" << ts.net.links[a.phys_link].id << "\", iden=\""
         << ts.iden_keys[a.iden_group] << "\"";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace minerail
