#pragma once

#include <limits>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "minerail/tsnet.hpp"

namespace minerail {

/// Weights of the cost attribute. big_m = 0 requests auto-computation.
struct PenaltyConfig {
  double gamma = 1;   // transit cost per instant
  double alpha = 1;   // waiting weight
  double beta = 10;   // late-departure weight
  double rho = 100;   // cancellation-distance weight
  double big_m = 0;   // wrong-destination cancellation penalty
};

constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Conflict-free shortest travel time (instants) from every expanded node to
/// each train's destination, ignoring other trains.
struct TimeLeft {
  std::vector<std::vector<int>> per_train;  // [train][phys node] -> instants

  int at(int train, int phys) const { return per_train[train][phys]; }
};

inline TimeLeft compute_time_left(const TimeSpaceNetwork& ts) {
  TimeLeft tl;
  const auto& net = ts.net;
  const int P = static_cast<int>(net.nodes.size());
  // reverse adjacency: edge u->v with duration d contributes v -> (u, d)
  std::vector<std::vector<std::pair<int, int>>> radj(P);
  for (const auto& l : net.links) {
    if (l.fwd_allowed) radj[l.to].push_back({l.from, l.dur_fwd});
    if (l.bwd_allowed) radj[l.from].push_back({l.to, l.dur_bwd});
  }
  for (const auto& b : ts.trains) {
    std::vector<int> dist(P, kUnreachable);
    using Item = std::pair<int, int>;  // (dist, node)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[b.dest_phys] = 0;
    pq.push({0, b.dest_phys});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d != dist[u]) continue;
      for (auto [v, w] : radj[u]) {
        if (dist[v] > d + w) {
          dist[v] = d + w;
          pq.push({dist[v], v});
        }
      }
    }
    tl.per_train.push_back(std::move(dist));
  }
  return tl;
}

/// Cost attribute of one (train, arc) pair.
inline double arc_cost(const TimeSpaceNetwork& ts, int train, const TsArc& arc,
                       const PenaltyConfig& pen, const TimeLeft& tl) {
  const TimeGrid& grid = ts.grid;
  const int Q = grid.horizon_instants;
  switch (arc.klass) {
    case ArcClass::Transit:
      return pen.gamma * arc.duration;
    case ArcClass::Waiting: {
      int k = ts.nodes[arc.from].time;
      return pen.alpha * (Q - k / (60 / grid.instant_len_min));
    }
    case ArcClass::Disappearing: {
      int phys = ts.nodes[arc.from].phys;
      int k = ts.nodes[arc.from].time;
      if (phys == ts.trains[train].dest_phys || k == Q - 1) {
        int left = tl.at(train, phys);
        return left == kUnreachable ? pen.big_m : pen.rho * left;
      }
      return pen.big_m;
    }
    case ArcClass::Starting: {
      int l = ts.nodes[arc.to].time;
      return pen.beta * (l - ts.trains[train].train.dep_q);
    }
  }
  return 0;
}

enum class RowFamily { FlowSource, FlowSink, FlowBalance, NodeCapacity, ArcCapacity, DepartureLink };

inline const char* to_string(RowFamily f) {
  switch (f) {
    case RowFamily::FlowSource: return "flow-source";
    case RowFamily::FlowSink: return "flow-sink";
    case RowFamily::FlowBalance: return "flow-balance";
    case RowFamily::NodeCapacity: return "node-capacity";
    case RowFamily::ArcCapacity: return "arc-capacity";
    case RowFamily::DepartureLink: return "departure-link";
  }
  return "?";
}

struct VarKey {
  int train = -1;
  int arc = -1;
  bool operator<(const VarKey& o) const {
    return train != o.train ? train < o.train : arc < o.arc;
  }
  bool operator==(const VarKey& o) const { return train == o.train && arc == o.arc; }
};

struct MipVar {
  VarKey key;
  double cost = 0;
  bool fixed0 = false;
};

struct MipRow {
  RowFamily family;
  std::vector<std::pair<int, double>> coefs;  // (var index, coefficient)
  char sense = '<';                           // '<' means <=, '=' equality
  double rhs = 0;
};

struct MipModel {
  std::shared_ptr<const TimeSpaceNetwork> tsn;
  PenaltyConfig penalties;
  TimeLeft time_left;
  std::vector<MipVar> vars;
  std::vector<MipRow> rows;
  std::vector<std::vector<int>> train_vars;  // per train, var indices (incl. fixed)
  std::vector<int> infeasible_trains;        // trains whose source row emptied

  int live_count() const {
    int c = 0;
    for (const auto& v : vars)
      if (!v.fixed0) ++c;
    return c;
  }

  int find_var(int train, int arc) const {
    for (int vi : train_vars[train])
      if (vars[vi].key.arc == arc) return vi;
    return -1;
  }
};

namespace detail {

/// Rebuild all constraint rows over the live variables. Called after
/// construction and after each pruning pass so rows never reference fixed
/// variables. Emptied source/sink rows mark the train infeasible.
inline void rebuild_rows(MipModel& m) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const int Q = ts.grid.horizon_instants;
  const int T = static_cast<int>(ts.trains.size());
  m.rows.clear();
  m.infeasible_trains.clear();

  // arc id -> live var index per train (dense lookup)
  std::vector<std::vector<int>> var_of(T, std::vector<int>(ts.arcs.size(), -1));
  for (int vi = 0; vi < static_cast<int>(m.vars.size()); ++vi) {
    const auto& v = m.vars[vi];
    if (!v.fixed0) var_of[v.key.train][v.key.arc] = vi;
  }

  auto push = [&](MipRow row) {
    if (row.coefs.empty()) return false;
    m.rows.push_back(std::move(row));
    return true;
  };

  for (int t = 0; t < T; ++t) {
    MipRow src{RowFamily::FlowSource, {}, '=', 1};
    for (int a : ts.outb[ts.trains[t].source_node])
      if (var_of[t][a] >= 0) src.coefs.push_back({var_of[t][a], 1});
    if (!push(std::move(src))) m.infeasible_trains.push_back(t);
    MipRow snk{RowFamily::FlowSink, {}, '=', 1};
    for (int a : ts.inb[ts.sink])
      if (var_of[t][a] >= 0) snk.coefs.push_back({var_of[t][a], 1});
    push(std::move(snk));
  }
  for (int t = 0; t < T; ++t) {
    for (const auto& n : ts.nodes) {
      if (n.kind != TsNode::Timed) continue;
      MipRow bal{RowFamily::FlowBalance, {}, '=', 0};
      for (int a : ts.outb[n.id])
        if (var_of[t][a] >= 0) bal.coefs.push_back({var_of[t][a], 1});
      for (int a : ts.inb[n.id])
        if (var_of[t][a] >= 0) bal.coefs.push_back({var_of[t][a], -1});
      push(std::move(bal));
    }
  }
  // A chained successor appears exactly where and when its predecessor
  // disappears (departure-link equality); the predecessor's arrival arc
  // already occupies that timed node, so counting the successor's starting
  // arc as well would double-bill the handover instant.
  std::vector<char> chained(T, 0);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < T; ++u)
      if (ts.trains[t].train.pred >= 0 && ts.trains[u].train.id == ts.trains[t].train.pred)
        chained[t] = 1;
  for (const auto& n : ts.nodes) {
    if (n.kind == TsNode::Sink || n.kind == TsNode::Source) continue;
    MipRow cap{RowFamily::NodeCapacity, {}, '<', 1};
    for (int t = 0; t < T; ++t)
      for (int a : ts.inb[n.id]) {
        if (chained[t] && ts.arcs[a].klass == ArcClass::Starting) continue;
        if (var_of[t][a] >= 0) cap.coefs.push_back({var_of[t][a], 1});
      }
    if (cap.coefs.size() > 1) push(std::move(cap));
  }
  for (size_t g = 0; g < ts.iden.size(); ++g) {
    for (int q = 1; q < Q; ++q) {
      MipRow cap{RowFamily::ArcCapacity, {}, '<', 1};
      for (int a : ts.iden[g]) {
        int k = ts.nodes[ts.arcs[a].from].time;
        int l = ts.nodes[ts.arcs[a].to].time;
        if (k <= q - 1 && l >= q)
          for (int t = 0; t < T; ++t)
            if (var_of[t][a] >= 0) cap.coefs.push_back({var_of[t][a], 1});
      }
      if (cap.coefs.size() > 1) push(std::move(cap));
    }
  }
  for (int t = 0; t < T; ++t) {
    const auto& b = ts.trains[t];
    if (b.train.pred < 0) continue;
    int pre = -1;
    for (int i = 0; i < T; ++i)
      if (ts.trains[i].train.id == b.train.pred) pre = i;
    if (pre < 0) continue;  // predecessor completed in an earlier cycle
    for (int q = b.train.dep_q; q < Q; ++q) {
      int start_arc = -1, dis_arc = -1;
      for (int a : ts.outb[b.source_node])
        if (ts.nodes[ts.arcs[a].to].time == q) start_arc = a;
      for (int a : ts.outb[ts.timed(ts.trains[pre].dest_phys, q)])
        if (ts.arcs[a].klass == ArcClass::Disappearing) dis_arc = a;
      if (dis_arc < 0)
        throw InternalError("no disappearing arc at predecessor destination, instant " +
                            std::to_string(q));
      MipRow link{RowFamily::DepartureLink, {}, '=', 0};
      if (start_arc >= 0 && var_of[t][start_arc] >= 0)
        link.coefs.push_back({var_of[t][start_arc], 1});
      if (var_of[pre][dis_arc] >= 0) link.coefs.push_back({var_of[pre][dis_arc], -1});
      push(std::move(link));
    }
  }
}

}  // namespace detail

/// Build the binary program over a time-space network.
inline MipModel build_model(std::shared_ptr<const TimeSpaceNetwork> tsn, PenaltyConfig penalties) {
  MipModel m;
  m.tsn = std::move(tsn);
  const TimeSpaceNetwork& ts = *m.tsn;
  m.time_left = compute_time_left(ts);
  const int Q = ts.grid.horizon_instants;
  const int T = static_cast<int>(ts.trains.size());

  int max_tl = 0;
  for (const auto& per : m.time_left.per_train)
    for (int d : per)
      if (d != kUnreachable) max_tl = std::max(max_tl, d);
  double route_ub = T * (penalties.gamma * Q + penalties.alpha * Q * Q + penalties.beta * Q +
                         penalties.rho * max_tl);
  if (penalties.big_m <= 0) {
    penalties.big_m = 10 * std::max(route_ub, 1.0);
  } else if (penalties.big_m <= penalties.rho * max_tl || (T > 0 && penalties.big_m <= route_ub)) {
    throw ValidationError("big_m too small: must exceed any feasible schedule's routing cost");
  }
  m.penalties = penalties;

  m.train_vars.assign(T, {});
  for (int t = 0; t < T; ++t) {
    for (const auto& a : ts.arcs) {
      if (a.klass == ArcClass::Starting && a.train != t) continue;
      MipVar v;
      v.key = {t, a.id};
      v.cost = arc_cost(ts, t, a, m.penalties, m.time_left);
      m.train_vars[t].push_back(static_cast<int>(m.vars.size()));
      m.vars.push_back(std::move(v));
    }
  }
  detail::rebuild_rows(m);
  return m;
}

inline MipModel build_model(const TimeSpaceNetwork& tsn, PenaltyConfig penalties) {
  return build_model(std::make_shared<TimeSpaceNetwork>(tsn), penalties);
}

/// Fix to zero every variable whose link carries a directional ban matching
/// the train's tags.
inline void prune_banned(MipModel& m) {
  const TimeSpaceNetwork& ts = *m.tsn;
  for (auto& v : m.vars) {
    if (v.fixed0) continue;
    const TsArc& a = ts.arcs[v.key.arc];
    if (a.klass != ArcClass::Transit) continue;
    const PhysLink& l = ts.net.links[a.phys_link];
    if (l.bans.empty()) continue;
    bool fwd_traversal = ts.nodes[a.from].phys == l.from;
    const auto& tags = ts.trains[v.key.train].train.tags;
    for (const auto& b : l.bans) {
      bool dir_match = b.direction == BanDirection::Both ||
                       (fwd_traversal && b.direction == BanDirection::Fwd) ||
                       (!fwd_traversal && b.direction == BanDirection::Bwd);
      bool tag_match = b.tag == "*" ||
                       std::find(tags.begin(), tags.end(), b.tag) != tags.end();
      if (dir_match && tag_match) {
        v.fixed0 = true;
        break;
      }
    }
  }
  detail::rebuild_rows(m);
}

/// Fix to zero every variable not on any live source-to-sink path of its
/// train (forward-reachable from the source and backward-reachable from the
/// sink within the horizon).
inline void prune_unreachable(MipModel& m) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const int N = static_cast<int>(ts.nodes.size());
  for (int t = 0; t < static_cast<int>(ts.trains.size()); ++t) {
    std::vector<std::vector<int>> out_live(N), in_live(N);
    for (int vi : m.train_vars[t]) {
      if (m.vars[vi].fixed0) continue;
      const TsArc& a = ts.arcs[m.vars[vi].key.arc];
      out_live[a.from].push_back(vi);
      in_live[a.to].push_back(vi);
    }
    std::vector<char> fwd(N, 0), bwd(N, 0);
    std::vector<int> stack{ts.trains[t].source_node};
    fwd[ts.trains[t].source_node] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int vi : out_live[u]) {
        int v = ts.arcs[m.vars[vi].key.arc].to;
        if (!fwd[v]) {
          fwd[v] = 1;
          stack.push_back(v);
        }
      }
    }
    stack = {ts.sink};
    bwd[ts.sink] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int vi : in_live[u]) {
        int v = ts.arcs[m.vars[vi].key.arc].from;
        if (!bwd[v]) {
          bwd[v] = 1;
          stack.push_back(v);
        }
      }
    }
    for (int vi : m.train_vars[t]) {
      if (m.vars[vi].fixed0) continue;
      const TsArc& a = ts.arcs[m.vars[vi].key.arc];
      if (!fwd[a.from] || !bwd[a.to]) m.vars[vi].fixed0 = true;
    }
  }
  detail::rebuild_rows(m);
}

/// Independent row checker: index of the first violated row, or -1.
inline int first_violated_row(const MipModel& m, const std::vector<char>& assignment) {
  for (int ri = 0; ri < static_cast<int>(m.rows.size()); ++ri) {
    const auto& row = m.rows[ri];
    double lhs = 0;
    for (auto [vi, c] : row.coefs) lhs += c * assignment[vi];
    if (row.sense == '<' ? lhs > row.rhs + 1e-9 : std::abs(lhs - row.rhs) > 1e-9) return ri;
  }
  return -1;
}

inline double assignment_objective(const MipModel& m, const std::vector<char>& assignment) {
  double obj = 0;
  for (size_t i = 0; i < m.vars.size(); ++i)
    if (assignment[i]) obj += m.vars[i].cost;
  return obj;
}

}  // namespace minerail
