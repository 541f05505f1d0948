#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minerail/solver.hpp"

namespace minerail {

// ---------------------------------------------------------------------------
// Schedule: the post-processed, per-real-train view of a solution
// ---------------------------------------------------------------------------

struct ScheduleEvent {
  std::string node;  // expanded node id
  int arrival = 0;
  int departure = 0;
};

struct ScheduleMovement {
  std::string link;  // expanded link id
  std::string iden;  // identity group key (single-occupancy unit)
  std::string from, to;
  int enter = 0;
  int exit = 0;
};

struct LegResult {
  int model_id = -1;
  int leg_index = 0;
  int start_q = -1;
  int end_q = -1;
  std::string end_node;
  bool completed = false;  // reached its destination
  bool cancelled = false;
};

struct TrainSchedule {
  std::string name;
  bool cancelled = false;
  std::string cancel_reason;
  double cost_transit = 0, cost_waiting = 0, cost_late = 0, cost_cancel = 0;
  std::vector<ScheduleEvent> events;
  std::vector<ScheduleMovement> movements;
  std::vector<LegResult> legs;
};

struct Schedule {
  TimeGrid grid;
  long clock_offset = 0;  // global instant of local instant 0
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0;
  std::vector<TrainSchedule> trains;

  const TrainSchedule* find(const std::string& name) const {
    for (const auto& t : trains)
      if (t.name == name) return &t;
    return nullptr;
  }
};

/// Combine model-train legs into per-real-train schedules. Chained legs must
/// join at the shared node and instant; a mismatch is a solver defect.
inline Schedule stitch(const Solution& sol, const MipModel& m) {
  const TimeSpaceNetwork& ts = *m.tsn;
  Schedule out;
  out.grid = ts.grid;
  out.status = sol.status;
  out.objective = sol.objective;
  if (sol.status == SolveStatus::Infeasible) return out;

  // real trains in first-appearance order
  std::vector<std::string> names;
  for (const auto& b : ts.trains)
    if (std::find(names.begin(), names.end(), b.train.real_train) == names.end())
      names.push_back(b.train.real_train);

  for (const auto& name : names) {
    TrainSchedule tsch;
    tsch.name = name;
    std::vector<int> legs;
    for (int t = 0; t < static_cast<int>(ts.trains.size()); ++t)
      if (ts.trains[t].train.real_train == name) legs.push_back(t);
    std::stable_sort(legs.begin(), legs.end(), [&](int a, int b) {
      return ts.trains[a].train.leg_index < ts.trains[b].train.leg_index;
    });

    int prev_end_q = -1;
    std::string prev_end_node;
    for (int t : legs) {
      if (tsch.cancelled) break;  // truncate after a cancelled leg
      if (sol.paths.empty() || sol.paths[t].empty()) {
        tsch.cancelled = true;
        tsch.cancel_reason = "no path assigned";
        break;
      }
      LegResult lr;
      lr.model_id = ts.trains[t].train.id;
      lr.leg_index = ts.trains[t].train.leg_index;
      std::string at_node;
      int arrival = -1;
      for (int vi : sol.paths[t]) {
        const MipVar& v = m.vars[vi];
        const TsArc& a = ts.arcs[v.key.arc];
        switch (a.klass) {
          case ArcClass::Starting: {
            int q = ts.nodes[a.to].time;
            lr.start_q = q;
            at_node = ts.net.nodes[ts.nodes[a.to].phys].id;
            arrival = q;
            if (ts.trains[t].train.pred >= 0 && prev_end_q >= 0) {
              if (q != prev_end_q || at_node != prev_end_node)
                throw InternalError("leg of '" + name + "' departs at " + at_node + "@" +
                                    std::to_string(q) + " but predecessor completed at " +
                                    prev_end_node + "@" + std::to_string(prev_end_q));
            }
            tsch.cost_late += v.cost;
            break;
          }
          case ArcClass::Waiting:
            tsch.cost_waiting += v.cost;
            break;
          case ArcClass::Transit: {
            int k = ts.nodes[a.from].time, l = ts.nodes[a.to].time;
            tsch.events.push_back({at_node, arrival, k});
            const PhysLink& link = ts.net.links[a.phys_link];
            tsch.movements.push_back({link.id, link.iden_key,
                                      ts.net.nodes[ts.nodes[a.from].phys].id,
                                      ts.net.nodes[ts.nodes[a.to].phys].id, k, l});
            at_node = ts.net.nodes[ts.nodes[a.to].phys].id;
            arrival = l;
            tsch.cost_transit += v.cost;
            break;
          }
          case ArcClass::Disappearing: {
            int k = ts.nodes[a.from].time;
            tsch.events.push_back({at_node, arrival, k});
            lr.end_q = k;
            lr.end_node = at_node;
            lr.completed = ts.nodes[a.from].phys == ts.trains[t].dest_phys;
            if (!lr.completed) {
              lr.cancelled = true;
              tsch.cancelled = true;
              tsch.cancel_reason = k == ts.grid.horizon_instants - 1
                                       ? "destination not reachable within horizon"
                                       : "deadlock escape";
            }
            tsch.cost_cancel += v.cost;
            break;
          }
        }
      }
      // merge the boundary event with the previous leg's final event
      if (!tsch.legs.empty() && tsch.events.size() >= 2) {
        for (size_t i = 1; i < tsch.events.size(); ++i) {
          if (tsch.events[i - 1].node == tsch.events[i].node &&
              tsch.events[i - 1].departure == tsch.events[i].arrival) {
            tsch.events[i - 1].departure = tsch.events[i].departure;
            tsch.events.erase(tsch.events.begin() + i);
            --i;
          }
        }
      }
      prev_end_q = lr.end_q;
      prev_end_node = lr.end_node;
      tsch.legs.push_back(std::move(lr));
    }
    out.trains.push_back(std::move(tsch));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independent replay checker
// ---------------------------------------------------------------------------

struct ReplayViolation {
  std::string what;
};

/// Recount occupancancies from a schedule, independent of the solver: at most
/// one train per identity group per instant (a link occupied over (k, l] is
/// busy at q iff k <= q-1 and l >= q), and at most one train per node per
/// instant of presence.
inline std::vector<ReplayViolation> replay_check(
    const std::vector<std::pair<std::string, const TrainSchedule*>>& trains, long offset = 0) {
  std::vector<ReplayViolation> out;
  std::map<std::pair<std::string, long>, std::string> link_busy;  // (iden, q) -> train
  std::map<std::pair<std::string, long>, std::string> node_busy;  // (node, q) -> train
  for (const auto& [name, t] : trains) {
    for (const auto& mv : t->movements) {
      for (long q = mv.enter + 1; q <= mv.exit; ++q) {
        auto key = std::make_pair(mv.iden, q + offset);
        auto [it, fresh] = link_busy.emplace(key, name);
        if (!fresh && it->second != name)
          out.push_back({"link " + mv.iden + " occupied by " + it->second + " and " + name +
                         " at instant " + std::to_string(q + offset)});
      }
    }
    for (const auto& ev : t->events) {
      for (long q = ev.arrival; q <= ev.departure; ++q) {
        auto key = std::make_pair(ev.node, q + offset);
        auto [it, fresh] = node_busy.emplace(key, name);
        if (!fresh && it->second != name)
          out.push_back({"node " + ev.node + " occupied by " + it->second + " and " + name +
                         " at instant " + std::to_string(q + offset)});
      }
    }
  }
  return out;
}

inline std::vector<ReplayViolation> replay_check(const Schedule& s) {
  std::vector<std::pair<std::string, const TrainSchedule*>> trains;
  for (const auto& t : s.trains) trains.push_back({t.name, &t});
  return replay_check(trains, s.clock_offset);
}

/// Accumulates the executed prefix of each cycle for an end-to-end replay.
struct ExecutionLog {
  struct Interval {
    std::string train, key;
    long a = 0, b = 0;
  };
  std::vector<Interval> node_presence;
  std::vector<Interval> link_occupancy;

  /// Log everything of `s` that starts before local instant `limit`
  /// (limit < 0 logs the whole schedule). Movements keep their full span.
  void append(const Schedule& s, long limit) {
    for (const auto& t : s.trains) {
      for (const auto& mv : t.movements)
        if (limit < 0 || mv.enter < limit)
          link_occupancy.push_back(
              {t.name, mv.iden, s.clock_offset + mv.enter + 1, s.clock_offset + mv.exit});
      for (const auto& ev : t.events)
        if (limit < 0 || ev.arrival < limit)
          node_presence.push_back({t.name, ev.node, s.clock_offset + ev.arrival,
                                   s.clock_offset + (limit < 0 ? ev.departure
                                                               : std::min<long>(ev.departure, limit))});
    }
  }

  std::vector<ReplayViolation> check() const {
    std::vector<ReplayViolation> out;
    auto scan = [&](const std::vector<Interval>& ivs, const std::string& what) {
      // merge intervals per (train, key), then recount instants across trains
      std::map<std::pair<std::string, std::string>, std::vector<std::pair<long, long>>> merged;
      for (const auto& iv : ivs) merged[{iv.train, iv.key}].push_back({iv.a, iv.b});
      std::map<std::pair<std::string, long>, std::string> busy;
      for (auto& [tk, spans] : merged) {
        std::sort(spans.begin(), spans.end());
        for (auto [a, b] : spans)
          for (long q = a; q <= b; ++q) {
            auto [it, fresh] = busy.emplace(std::make_pair(tk.second, q), tk.first);
            if (!fresh && it->second != tk.first)
              out.push_back({what + " " + tk.second + " occupied by " + it->second + " and " +
                             tk.first + " at instant " + std::to_string(q)});
          }
      }
      return out;
    };
    auto a = scan(link_occupancy, "link");
    auto b = scan(node_presence, "node");
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
};

// ---------------------------------------------------------------------------
// Online framework: world state, cyclic planning, simulation step
// ---------------------------------------------------------------------------

struct Position {
  std::string node;       // expanded node id when not on a link
  bool on_link = false;
  std::string link;       // expanded link id
  std::string ahead;      // forward endpoint the train will re-enter at
  int remaining = 0;      // instants until link exit, local to current clock
};

struct WorldState {
  long clock = 0;  // global instants
  std::map<std::string, Position> positions;  // per real train
  std::vector<ModelTrain> pending;            // dep_q in global instants
  std::vector<LegResult> completed;
  std::vector<std::pair<ModelTrain, std::string>> cancelled;  // leg, reason
};

/// Portable warm-start hint, independent of any one cycle's variable ids.
struct PortableHint {
  std::string real_train;
  int leg_index = 0;
  std::string from_label, to_label;  // expanded node ids, or "SRC"/"SNK"
  int from_time = -1;
  int to_time = -1;
};

struct CycleConfig {
  int cycle_len_min = 5;
  int horizon_instants = 0;  // per-cycle |Q|; 0 = network grid value
  PenaltyConfig penalties;
  SolverConfig solver;
};

inline WorldState initial_state(const std::vector<ModelTrain>& legs,
                                const PhysicalNetwork& expanded) {
  WorldState st;
  st.pending = legs;
  for (const auto& l : legs)
    if (l.pred < 0)
      st.positions[l.real_train] = {expanded.resolve_train_node(l.dep_node), false, "", "", 0};
  return st;
}

struct CyclePlan {
  Schedule schedule;
  std::vector<PortableHint> next_warm;  // times already shifted for the next cycle
  MipModel model;                       // kept for inspection/tests
  Solution solution;
};

inline CyclePlan plan_cycle(const WorldState& state, const PhysicalNetwork& network,
                            const CycleConfig& config,
                            const std::vector<PortableHint>& warm_prev = {}) {
  PhysicalNetwork expanded = network.expanded ? network : expand_network(network);
  TimeGrid grid = expanded.grid;
  if (config.horizon_instants > 0) grid.horizon_instants = config.horizon_instants;
  if (config.cycle_len_min % grid.instant_len_min != 0)
    throw ValidationError("cycle_len_min must be a multiple of the instant length");

  // rebuild model trains from pending legs, re-anchored at current positions
  std::vector<ModelTrain> local;
  std::map<int, int> id_map;  // original model id -> local id
  std::map<std::string, std::vector<ModelTrain>> by_train;
  for (const auto& l : state.pending) by_train[l.real_train].push_back(l);
  std::vector<std::string> order;
  for (const auto& l : state.pending)
    if (by_train.count(l.real_train) && (order.empty() || std::find(order.begin(), order.end(),
                                                                    l.real_train) == order.end()))
      order.push_back(l.real_train);
  for (const auto& name : order) {
    auto legs = by_train[name];
    std::stable_sort(legs.begin(), legs.end(),
                     [](const ModelTrain& a, const ModelTrain& b) { return a.leg_index < b.leg_index; });
    for (size_t i = 0; i < legs.size(); ++i) {
      ModelTrain t = legs[i];
      int orig_id = t.id;
      t.id = static_cast<int>(local.size());
      if (i == 0) {
        t.pred = -1;
        auto pit = state.positions.find(name);
        if (pit != state.positions.end()) {
          const Position& p = pit->second;
          if (p.on_link) {
            t.dep_node = p.ahead;
            t.dep_q = p.remaining;
          } else {
            t.dep_node = p.node;
            t.dep_q = static_cast<int>(std::max<long>(0, t.dep_q - state.clock));
          }
        } else {
          t.dep_q = static_cast<int>(std::max<long>(0, t.dep_q - state.clock));
        }
      } else {
        t.pred = id_map.at(t.pred);
        t.dep_q = static_cast<int>(std::max<long>(0, t.dep_q - state.clock));
      }
      id_map[orig_id] = t.id;
      local.push_back(std::move(t));
    }
  }

  CyclePlan plan;
  auto tsn = std::make_shared<TimeSpaceNetwork>(build_tsnet(expanded, grid, local));
  plan.model = build_model(tsn, config.penalties);
  prune_banned(plan.model);
  prune_unreachable(plan.model);

  std::optional<WarmStart> warm;
  if (!warm_prev.empty()) {
    WarmStart w;
    for (const auto& h : warm_prev) {
      int t = -1;
      for (int i = 0; i < static_cast<int>(tsn->trains.size()); ++i)
        if (tsn->trains[i].train.real_train == h.real_train &&
            tsn->trains[i].train.leg_index == h.leg_index)
          t = i;
      if (t < 0) continue;
      for (int vi : plan.model.train_vars[t]) {
        if (plan.model.vars[vi].fixed0) continue;
        const TsArc& a = tsn->arcs[plan.model.vars[vi].key.arc];
        auto side = [&](int node) -> std::pair<std::string, int> {
          const TsNode& n = tsn->nodes[node];
          if (n.kind == TsNode::Source) return {"SRC", -1};
          if (n.kind == TsNode::Sink) return {"SNK", -1};
          return {tsn->net.nodes[n.phys].id, n.time};
        };
        auto [fl, ft] = side(a.from);
        auto [tl2, tt] = side(a.to);
        if (fl == h.from_label && ft == h.from_time && tl2 == h.to_label && tt == h.to_time)
          w.hints[plan.model.vars[vi].key] = 1;
      }
    }
    if (!w.hints.empty()) warm = std::move(w);
  }

  plan.solution = solve(plan.model, config.solver, warm);
  if (plan.solution.status == SolveStatus::Infeasible) {
    plan.schedule.grid = grid;
    plan.schedule.clock_offset = state.clock;
    plan.schedule.status = SolveStatus::Infeasible;
    for (const auto& name : order) {
      TrainSchedule tsch;
      tsch.name = name;
      tsch.cancelled = true;
      tsch.cancel_reason = "no feasible plan: " + plan.solution.diagnostic;
      plan.schedule.trains.push_back(std::move(tsch));
    }
    return plan;
  }
  plan.schedule = stitch(plan.solution, plan.model);
  plan.schedule.clock_offset = state.clock;

  // warm start for the next cycle: this solution shifted by one cycle length
  int shift = config.cycle_len_min / grid.instant_len_min;
  for (int t = 0; t < static_cast<int>(tsn->trains.size()); ++t) {
    for (int vi : plan.solution.paths.empty() ? std::vector<int>{} : plan.solution.paths[t]) {
      const TsArc& a = tsn->arcs[plan.model.vars[vi].key.arc];
      auto side = [&](int node) -> std::pair<std::string, int> {
        const TsNode& n = tsn->nodes[node];
        if (n.kind == TsNode::Source) return {"SRC", -1};
        if (n.kind == TsNode::Sink) return {"SNK", -1};
        return {tsn->net.nodes[n.phys].id, n.time};
      };
      auto [fl, ft] = side(a.from);
      auto [tl2, tt] = side(a.to);
      int nft = ft < 0 ? -1 : ft - shift;
      int ntt = tt < 0 ? -1 : tt - shift;
      if ((ft >= 0 && nft < 0) || (tt >= 0 && ntt < 0)) continue;
      plan.next_warm.push_back({tsn->trains[t].train.real_train, tsn->trains[t].train.leg_index,
                                fl, tl2, nft, ntt});
    }
  }
  return plan;
}

/// Execute one cycle length of a plan: update positions, retire completed
/// legs, advance the clock, and re-verify occupancy over the executed window.
inline WorldState advance(const WorldState& state, const Schedule& schedule,
                          const CycleConfig& config) {
  int c = config.cycle_len_min / schedule.grid.instant_len_min;
  auto viols = replay_check(schedule);
  if (!viols.empty())
    throw InternalError("occupancy violation during replay: " + viols.front().what);

  WorldState next = state;
  next.clock = state.clock + c;
  std::vector<ModelTrain> still_pending;
  for (const auto& leg : state.pending) {
    const TrainSchedule* t = schedule.find(leg.real_train);
    bool retired = false;
    if (t) {
      for (const auto& lr : t->legs) {
        if (lr.leg_index != leg.leg_index || lr.end_q > c) continue;
        if (lr.cancelled) {
          next.cancelled.push_back({leg, t->cancel_reason});
        } else if (lr.completed) {
          LegResult g = lr;
          g.start_q += static_cast<int>(state.clock);
          g.end_q += static_cast<int>(state.clock);
          next.completed.push_back(g);
        }
        retired = true;
      }
      // a cancelled train drops its remaining legs as well
      if (!retired && t->cancelled) {
        bool past = false;
        for (const auto& lr : t->legs)
          if (lr.cancelled && lr.end_q <= c) past = true;
        if (past) {
          next.cancelled.push_back({leg, t->cancel_reason});
          retired = true;
        }
      }
    }
    if (!retired) still_pending.push_back(leg);
  }
  next.pending = std::move(still_pending);

  for (auto& [name, pos] : next.positions) {
    const TrainSchedule* t = schedule.find(name);
    if (!t || t->events.empty()) continue;
    bool placed = false;
    for (const auto& mv : t->movements) {
      if (mv.enter < c && c < mv.exit) {
        pos = {"", true, mv.link, mv.to, mv.exit - c};
        placed = true;
      }
    }
    if (!placed) {
      for (const auto& ev : t->events) {
        if (ev.arrival <= c && c <= ev.departure) {
          pos = {ev.node, false, "", "", 0};
          placed = true;
        }
      }
    }
    if (!placed) {
      // all activity ended before the cycle boundary: rest at the final node
      const auto& last = t->events.back();
      if (last.departure <= c) pos = {last.node, false, "", "", 0};
      // otherwise activity starts later; the train holds its position
    }
  }
  // drop positions of trains with no pending legs left
  for (auto it = next.positions.begin(); it != next.positions.end();) {
    bool has = false;
    for (const auto& l : next.pending)
      if (l.real_train == it->first) has = true;
    it = has ? std::next(it) : next.positions.erase(it);
  }
  return next;
}

struct SimulationResult {
  std::vector<Schedule> cycles;
  WorldState final_state;
  std::vector<ReplayViolation> violations;  // end-to-end executed replay
  bool completed = false;                   // all legs retired
};

/// Run the online loop: plan, execute one cycle, repeat. `max_cycles` = 0
/// emits the initial plan only; negative runs to completion (capped).
inline SimulationResult run_simulation(const PhysicalNetwork& network,
                                       const std::vector<ModelTrain>& legs,
                                       const CycleConfig& config, int max_cycles = -1) {
  PhysicalNetwork expanded = expand_network(network);
  SimulationResult res;
  WorldState state = initial_state(legs, expanded);
  std::vector<PortableHint> warm;
  ExecutionLog log;
  int cap = max_cycles < 0 ? 1000 : max_cycles;
  int c = config.cycle_len_min / expanded.grid.instant_len_min;
  for (int cycle = 0;; ++cycle) {
    CyclePlan plan = plan_cycle(state, expanded, config, warm);
    res.cycles.push_back(plan.schedule);
    if (plan.schedule.status == SolveStatus::Infeasible) break;
    if (cycle >= cap || state.pending.empty()) {
      log.append(plan.schedule, -1);
      res.completed = state.pending.empty();
      break;
    }
    // hold position at the boundary until first activity (source dwell)
    log.append(plan.schedule, c);
    for (const auto& t : plan.schedule.trains) {
      auto pit = state.positions.find(t.name);
      if (pit == state.positions.end() || pit->second.on_link || t.events.empty()) continue;
      if (t.events.front().arrival > 0 && t.events.front().node == pit->second.node)
        log.node_presence.push_back(
            {t.name, pit->second.node, state.clock, state.clock + t.events.front().arrival});
    }
    state = advance(state, plan.schedule, config);
    warm = plan.next_warm;
    if (state.pending.empty()) {
      res.completed = true;
      break;
    }
  }
  res.final_state = state;
  res.violations = log.check();
  return res;
}

// ---------------------------------------------------------------------------
// JSON serialization of schedules and state snapshots
// ---------------------------------------------------------------------------

inline json schedule_to_json(const Schedule& s) {
  json doc;
  doc["status"] = s.status == SolveStatus::Optimal     ? "optimal"
                  : s.status == SolveStatus::Infeasible ? "infeasible"
                                                        : "timeout";
  doc["clock_offset"] = s.clock_offset;
  doc["grid"] = {{"instant_len_min", s.grid.instant_len_min},
                 {"horizon_instants", s.grid.horizon_instants}};
  doc["objective_total"] = s.objective;
  doc["trains"] = json::array();
  for (const auto& t : s.trains) {
    json jt;
    jt["name"] = t.name;
    jt["cancelled"] = t.cancelled;
    if (t.cancelled) jt["cancel_reason"] = t.cancel_reason;
    jt["objective"] = {{"transit", t.cost_transit},
                       {"waiting", t.cost_waiting},
                       {"late_departure", t.cost_late},
                       {"cancellation", t.cost_cancel},
                       {"total", t.cost_transit + t.cost_waiting + t.cost_late + t.cost_cancel}};
    jt["events"] = json::array();
    for (const auto& e : t.events) {
      jt["events"].push_back({{"node", e.node},
                              {"arrival", e.arrival},
                              {"departure", e.departure},
                              {"arrival_min", e.arrival * s.grid.instant_len_min},
                              {"departure_min", e.departure * s.grid.instant_len_min}});
    }
    jt["movements"] = json::array();
    for (const auto& mv : t.movements) {
      jt["movements"].push_back({{"link", mv.link},
                                 {"iden", mv.iden},
                                 {"from", mv.from},
                                 {"to", mv.to},
                                 {"enter", mv.enter},
                                 {"exit", mv.exit}});
    }
    doc["trains"].push_back(std::move(jt));
  }
  return doc;
}

inline Schedule schedule_from_json(const json& doc) {
  Schedule s;
  std::string st = doc.at("status").get<std::string>();
  s.status = st == "optimal"      ? SolveStatus::Optimal
             : st == "infeasible" ? SolveStatus::Infeasible
             : st == "timeout"    ? SolveStatus::Timeout
                                  : throw ValidationError("schedule: unknown status '" + st + "'");
  s.clock_offset = doc.value("clock_offset", 0L);
  s.grid.instant_len_min = doc.at("grid").at("instant_len_min").get<int>();
  s.grid.horizon_instants = doc.at("grid").at("horizon_instants").get<int>();
  s.objective = doc.value("objective_total", 0.0);
  for (const auto& jt : doc.at("trains")) {
    TrainSchedule t;
    t.name = jt.at("name").get<std::string>();
    t.cancelled = jt.value("cancelled", false);
    t.cancel_reason = jt.value("cancel_reason", std::string());
    if (jt.contains("objective")) {
      t.cost_transit = jt.at("objective").value("transit", 0.0);
      t.cost_waiting = jt.at("objective").value("waiting", 0.0);
      t.cost_late = jt.at("objective").value("late_departure", 0.0);
      t.cost_cancel = jt.at("objective").value("cancellation", 0.0);
    }
    for (const auto& je : jt.value("events", json::array()))
      t.events.push_back({je.at("node").get<std::string>(), je.at("arrival").get<int>(),
                          je.at("departure").get<int>()});
    for (const auto& jm : jt.value("movements", json::array()))
      t.movements.push_back({jm.at("link").get<std::string>(), jm.value("iden", std::string()),
                             jm.at("from").get<std::string>(), jm.at("to").get<std::string>(),
                             jm.at("enter").get<int>(), jm.at("exit").get<int>()});
    s.trains.push_back(std::move(t));
  }
  return s;
}

inline json state_to_json(const WorldState& st) {
  json doc;
  doc["clock"] = st.clock;
  doc["positions"] = json::array();
  for (const auto& [name, p] : st.positions) {
    json jp{{"train", name}};
    if (p.on_link) {
      jp["link"] = p.link;
      jp["ahead"] = p.ahead;
      jp["remaining"] = p.remaining;
    } else {
      jp["node"] = p.node;
    }
    doc["positions"].push_back(std::move(jp));
  }
  doc["pending"] = json::array();
  for (const auto& l : st.pending)
    doc["pending"].push_back({{"train", l.real_train},
                              {"leg", l.leg_index},
                              {"dep_node", l.dep_node},
                              {"dest_node", l.dest_node},
                              {"dep_q", l.dep_q}});
  doc["completed"] = json::array();
  for (const auto& lr : st.completed)
    doc["completed"].push_back({{"leg", lr.leg_index}, {"end_q", lr.end_q}, {"node", lr.end_node}});
  doc["cancelled"] = json::array();
  for (const auto& [l, why] : st.cancelled)
    doc["cancelled"].push_back({{"train", l.real_train}, {"leg", l.leg_index}, {"reason", why}});
  return doc;
}

}  // namespace minerail
