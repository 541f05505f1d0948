#pragma once

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "minerail/mip.hpp"

namespace minerail {

struct WarmStart {
  std::map<VarKey, int> hints;  // possibly partial
};

struct SolverConfig {
  double time_limit_s = 60;
  std::optional<long> node_limit;
  enum class Branching { EarliestDepartureFirst, MostConstrainedFirst };
  Branching branching = Branching::EarliestDepartureFirst;
  double gap_tolerance = 0;  // exact by default
};

enum class SolveStatus { Optimal, Infeasible, Timeout };

struct Solution {
  std::vector<char> assignment;            // indexed by model var index
  double objective = 0;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<std::vector<int>> paths;     // per train, ordered var indices
  long nodes_explored = 0;
  double wall_time_s = 0;
  std::string diagnostic;
  int ties = 0;                            // brute force only

  bool value(const MipModel& m, VarKey key) const {
    int vi = m.find_var(key.train, key.arc);
    return vi >= 0 && vi < static_cast<int>(assignment.size()) && assignment[vi];
  }
};

namespace detail {

/// Per-train view of the live variables as a DAG from the train's source to
/// the sink, with an exact cost-to-go for ordered path enumeration.
struct TrainGraph {
  int train = -1;
  int source = -1, sink = -1;
  std::vector<std::vector<int>> out;  // ts node -> live var indices, arc order
  std::vector<double> to_go;          // exact min cost to sink, or infinity
  std::vector<int> topo;              // sources, timed by (time, id), sink

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  TrainGraph() = default;
  TrainGraph(const MipModel& m, int t) : train(t) {
    const TimeSpaceNetwork& ts = *m.tsn;
    source = ts.trains[t].source_node;
    sink = ts.sink;
    out.assign(ts.nodes.size(), {});
    for (int vi : m.train_vars[t])
      if (!m.vars[vi].fixed0) out[ts.arcs[m.vars[vi].key.arc].from].push_back(vi);
    for (const auto& n : ts.nodes)
      if (n.kind == TsNode::Source) topo.push_back(n.id);
    std::vector<int> timed;
    for (const auto& n : ts.nodes)
      if (n.kind == TsNode::Timed) timed.push_back(n.id);
    std::stable_sort(timed.begin(), timed.end(),
                     [&](int a, int b) { return ts.nodes[a].time < ts.nodes[b].time; });
    topo.insert(topo.end(), timed.begin(), timed.end());
    topo.push_back(sink);
    to_go.assign(ts.nodes.size(), kInf);
    to_go[sink] = 0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      for (int vi : out[*it]) {
        double via = m.vars[vi].cost + to_go[ts.arcs[m.vars[vi].key.arc].to];
        if (via < to_go[*it]) to_go[*it] = via;
      }
    }
  }
};

struct Path {
  std::vector<int> vars;  // model var indices in travel order
  double cost = 0;
};

/// Lazy enumeration of source-to-sink paths in exactly nondecreasing cost
/// order (best-first expansion with the exact cost-to-go as heuristic).
class PathEnumerator {
public:
  PathEnumerator(const MipModel& m, const TrainGraph& g) : m_(&m), g_(&g) {
    if (g.to_go[g.source] != TrainGraph::kInf) heap_.push({g.to_go[g.source], 0, g.source, {}});
  }

  /// Path with index i (ordered by cost), generating on demand.
  const Path* get(size_t i) {
    while (emitted_.size() <= i && advance()) {
    }
    return i < emitted_.size() ? &emitted_[i] : nullptr;
  }

private:
  struct Partial {
    double f = 0;
    double g = 0;
    int node = -1;
    std::vector<int> vars;
    bool operator>(const Partial& o) const {
      if (f != o.f) return f > o.f;
      return vars > o.vars;  // deterministic tie-break by variable sequence
    }
  };

  bool advance() {
    const TimeSpaceNetwork& ts = *m_->tsn;
    while (!heap_.empty()) {
      Partial p = heap_.top();
      heap_.pop();
      if (p.node == g_->sink) {
        emitted_.push_back({std::move(p.vars), p.g});
        return true;
      }
      for (int vi : g_->out[p.node]) {
        int to = ts.arcs[m_->vars[vi].key.arc].to;
        if (g_->to_go[to] == TrainGraph::kInf) continue;
        Partial q;
        q.g = p.g + m_->vars[vi].cost;
        q.f = q.g + g_->to_go[to];
        q.node = to;
        q.vars = p.vars;
        q.vars.push_back(vi);
        heap_.push(std::move(q));
      }
    }
    return false;
  }

  const MipModel* m_;
  const TrainGraph* g_;
  std::priority_queue<Partial, std::vector<Partial>, std::greater<>> heap_;
  std::deque<Path> emitted_;  // deque: handed-out pointers must stay valid
};

/// Check every <= row against the chosen variables, and every equality row
/// whose participating trains are all assigned. Returns the violated family.
inline std::optional<RowFamily> partial_violation(const MipModel& m,
                                                  const std::vector<const Path*>& chosen,
                                                  const std::vector<char>& train_assigned) {
  std::vector<char> a(m.vars.size(), 0);
  for (const Path* p : chosen)
    if (p)
      for (int vi : p->vars) a[vi] = 1;
  for (const auto& row : m.rows) {
    double lhs = 0;
    bool all_assigned = true;
    for (auto [vi, c] : row.coefs) {
      lhs += c * a[vi];
      if (!train_assigned[m.vars[vi].key.train]) all_assigned = false;
    }
    if (row.sense == '<') {
      if (lhs > row.rhs + 1e-9) return row.family;
    } else if (all_assigned && std::abs(lhs - row.rhs) > 1e-9) {
      return row.family;
    }
  }
  return std::nullopt;
}

/// Train branching order: predecessors always precede successors; within
/// that, ordered by the configured rule.
inline std::vector<int> branching_order(const MipModel& m, SolverConfig::Branching rule) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const int T = static_cast<int>(ts.trains.size());
  std::vector<double> key(T);
  for (int t = 0; t < T; ++t) {
    if (rule == SolverConfig::Branching::EarliestDepartureFirst) {
      key[t] = ts.trains[t].train.dep_q;
    } else {
      int live_starts = 0;
      for (int vi : m.train_vars[t])
        if (!m.vars[vi].fixed0 && ts.arcs[m.vars[vi].key.arc].klass == ArcClass::Starting)
          ++live_starts;
      key[t] = live_starts;
    }
  }
  std::vector<int> pred(T, -1);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < T; ++u)
      if (ts.trains[t].train.pred == ts.trains[u].train.id) pred[t] = u;
  // Kahn's algorithm over the chain DAG, picking the smallest key available.
  std::vector<int> order;
  std::vector<char> done(T, 0);
  while (static_cast<int>(order.size()) < T) {
    int best = -1;
    for (int t = 0; t < T; ++t) {
      if (done[t] || (pred[t] >= 0 && !done[pred[t]])) continue;
      if (best < 0 || key[t] < key[best] || (key[t] == key[best] && t < best)) best = t;
    }
    done[best] = 1;
    order.push_back(best);
  }
  return order;
}

inline Solution make_solution(const MipModel& m, const std::vector<const Path*>& chosen,
                              const std::vector<int>& order, SolveStatus status) {
  Solution s;
  s.status = status;
  s.assignment.assign(m.vars.size(), 0);
  s.paths.assign(m.train_vars.size(), {});
  for (size_t d = 0; d < order.size(); ++d) {
    if (!chosen[d]) continue;
    s.paths[order[d]] = chosen[d]->vars;
    for (int vi : chosen[d]->vars) s.assignment[vi] = 1;
  }
  s.objective = assignment_objective(m, s.assignment);
  return s;
}

}  // namespace detail

/// Admissible bound: cost of the fixed portion plus, for every undecided
/// train, its conflict-free shortest source-to-sink path cost.
inline double lower_bound(const MipModel& m, const std::map<VarKey, int>& fixed) {
  const int T = static_cast<int>(m.train_vars.size());
  double bound = 0;
  std::vector<double> fixed_cost(T, 0);
  std::vector<char> decided(T, 0);
  for (const auto& [key, val] : fixed) {
    if (!val) continue;
    int vi = m.find_var(key.train, key.arc);
    if (vi < 0) throw ValidationError("lower_bound: hint references an unknown variable");
    fixed_cost[key.train] += m.vars[vi].cost;
    if (m.tsn->arcs[key.arc].to == m.tsn->sink) decided[key.train] = 1;
  }
  for (int t = 0; t < T; ++t) {
    if (decided[t]) {
      bound += fixed_cost[t];
    } else {
      detail::TrainGraph g(m, t);
      double h = g.to_go[g.source];
      bound += fixed_cost[t] + (h == detail::TrainGraph::kInf ? 0 : h);
    }
  }
  return bound;
}

/// Exact branch-and-bound over per-train paths, explored best-first by an
/// admissible bound. The first complete assignment popped is optimal.
inline Solution solve(const MipModel& m, const SolverConfig& config = {},
                      const std::optional<WarmStart>& warm = std::nullopt) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const int T = static_cast<int>(m.train_vars.size());
  Solution sol;

  if (!m.infeasible_trains.empty()) {
    sol.status = SolveStatus::Infeasible;
    sol.diagnostic = "flow-source row emptied by pruning (train unreachable within horizon)";
    sol.wall_time_s = elapsed();
    return sol;
  }
  std::vector<int> order = detail::branching_order(m, config.branching);
  std::vector<detail::TrainGraph> graphs;
  graphs.reserve(T);
  for (int t = 0; t < T; ++t) graphs.emplace_back(m, t);
  std::vector<detail::PathEnumerator> gens;
  gens.reserve(T);
  for (int t = 0; t < T; ++t) gens.emplace_back(m, graphs[t]);

  std::vector<double> suffix_min(T + 1, 0);
  for (int d = T - 1; d >= 0; --d) {
    double h = graphs[order[d]].to_go[graphs[order[d]].source];
    if (h == detail::TrainGraph::kInf) {
      sol.status = SolveStatus::Infeasible;
      sol.diagnostic = "no source-to-sink path for train " +
                       m.tsn->trains[order[d]].train.real_train;
      sol.wall_time_s = elapsed();
      return sol;
    }
    suffix_min[d] = suffix_min[d + 1] + h;
  }

  // Warm start: accept the hints as the incumbent when they form a complete,
  // jointly feasible per-train path assignment.
  std::optional<Solution> incumbent;
  double incumbent_obj = std::numeric_limits<double>::infinity();
  if (warm) {
    std::vector<detail::Path> warm_paths(T);
    std::vector<const detail::Path*> chosen(T, nullptr);
    bool complete = true;
    for (int d = 0; d < T && complete; ++d) {
      int t = order[d];
      int node = graphs[t].source;
      double cost = 0;
      std::vector<int> vars;
      while (node != graphs[t].sink) {
        int next_vi = -1;
        for (int vi : graphs[t].out[node])
          if (auto it = warm->hints.find(m.vars[vi].key); it != warm->hints.end() && it->second)
            next_vi = vi;
        if (next_vi < 0) {
          complete = false;
          break;
        }
        vars.push_back(next_vi);
        cost += m.vars[next_vi].cost;
        node = m.tsn->arcs[m.vars[next_vi].key.arc].to;
      }
      warm_paths[t] = {std::move(vars), cost};
      chosen[d] = &warm_paths[t];
    }
    if (complete) {
      std::vector<char> all(T, 1);
      if (!detail::partial_violation(m, chosen, all)) {
        incumbent = detail::make_solution(m, chosen, order, SolveStatus::Optimal);
        incumbent_obj = incumbent->objective;
      }
    }
  }

  struct Node {
    double bound;
    int depth;               // trains order[0..depth-1] committed
    int candidate;           // path index for train order[depth] to try next
    std::vector<int> choice; // committed path indices
    long seq;
    bool operator>(const Node& o) const {
      if (bound != o.bound) return bound > o.bound;
      return seq > o.seq;
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
  long seq = 0;
  std::map<std::string, long> rejections;
  auto prefix_cost = [&](const std::vector<int>& choice) {
    double c = 0;
    for (size_t d = 0; d < choice.size(); ++d) c += gens[order[d]].get(choice[d])->cost;
    return c;
  };
  auto push_node = [&](int depth, int candidate, std::vector<int> choice) {
    if (T == 0) return;
    const detail::Path* cand = gens[order[depth]].get(candidate);
    if (!cand) return;
    double b = prefix_cost(choice) + cand->cost + suffix_min[depth + 1];
    if (b >= incumbent_obj - config.gap_tolerance - 1e-9) return;
    pq.push({b, depth, candidate, std::move(choice), seq++});
  };

  if (T == 0) {
    sol = detail::make_solution(m, {}, {}, SolveStatus::Optimal);
    sol.wall_time_s = elapsed();
    return sol;
  }
  push_node(0, 0, {});

  while (!pq.empty()) {
    if (elapsed() > config.time_limit_s ||
        (config.node_limit && sol.nodes_explored >= *config.node_limit)) {
      Solution out = incumbent ? *incumbent : Solution{};
      out.status = SolveStatus::Timeout;
      out.nodes_explored = sol.nodes_explored;
      out.wall_time_s = elapsed();
      return out;
    }
    Node n = pq.top();
    pq.pop();
    if (n.bound >= incumbent_obj - config.gap_tolerance - 1e-9) continue;
    ++sol.nodes_explored;

    std::vector<const detail::Path*> chosen(T, nullptr);
    std::vector<char> assigned(T, 0);
    for (size_t d = 0; d < n.choice.size(); ++d) {
      chosen[d] = gens[order[d]].get(n.choice[d]);
      assigned[order[d]] = 1;
    }
    chosen[n.depth] = gens[order[n.depth]].get(n.candidate);
    assigned[order[n.depth]] = 1;

    // sibling: next candidate path for this train under the same prefix
    {
      std::vector<int> sib_choice = n.choice;
      push_node(n.depth, n.candidate + 1, std::move(sib_choice));
    }
    if (auto viol = detail::partial_violation(m, chosen, assigned)) {
      ++rejections[to_string(*viol)];
      continue;
    }
    if (n.depth + 1 == T) {
      Solution out = detail::make_solution(m, chosen, order, SolveStatus::Optimal);
      out.nodes_explored = sol.nodes_explored;
      out.wall_time_s = elapsed();
      // final independent re-verification
      if (first_violated_row(m, out.assignment) >= 0)
        throw InternalError("solver produced an assignment violating a constraint row");
      return out;
    }
    std::vector<int> child_choice = n.choice;
    child_choice.push_back(n.candidate);
    push_node(n.depth + 1, 0, std::move(child_choice));
  }

  if (incumbent) {
    incumbent->nodes_explored = sol.nodes_explored;
    incumbent->wall_time_s = elapsed();
    return *incumbent;
  }
  sol.status = SolveStatus::Infeasible;
  std::string worst;
  long worst_n = -1;
  for (const auto& [fam, cnt] : rejections)
    if (cnt > worst_n) {
      worst = fam;
      worst_n = cnt;
    }
  sol.diagnostic = worst.empty() ? "no feasible joint assignment"
                                 : "no feasible joint assignment; most rejections from " + worst +
                                       " constraints";
  sol.wall_time_s = elapsed();
  return sol;
}

/// Exhaustive oracle: every combination of per-train source-to-sink paths,
/// checked against every constraint row. Test use only.
inline Solution brute_force(const MipModel& m) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const int T = static_cast<int>(m.train_vars.size());
  Solution best;
  best.status = SolveStatus::Infeasible;
  if (!m.infeasible_trains.empty()) return best;

  // enumerate all paths per train by DFS, guarding the combination count
  std::vector<std::vector<detail::Path>> paths(T);
  double product = 1;
  for (int t = 0; t < T; ++t) {
    detail::TrainGraph g(m, t);
    std::vector<int> stack_vars;
    std::function<void(int, double)> dfs = [&](int node, double cost) {
      if (node == g.sink) {
        paths[t].push_back({stack_vars, cost});
        return;
      }
      for (int vi : g.out[node]) {
        stack_vars.push_back(vi);
        dfs(ts.arcs[m.vars[vi].key.arc].to, cost + m.vars[vi].cost);
        stack_vars.pop_back();
      }
    };
    dfs(g.source, 0);
    if (paths[t].empty()) return best;
    product *= static_cast<double>(paths[t].size());
    if (product > 1e7) throw InternalError("brute_force: path combination guard exceeded");
  }

  // incremental row sums: var -> rows index, and the last train touching
  // each equality row (flow rows hold by path structure and are re-verified
  // on every champion below)
  const int R = static_cast<int>(m.rows.size());
  std::vector<std::vector<std::pair<int, double>>> var_rows(m.vars.size());
  std::vector<int> eq_last_train(R, -1);
  for (int r = 0; r < R; ++r)
    for (auto [vi, c] : m.rows[r].coefs) {
      var_rows[vi].push_back({r, c});
      eq_last_train[r] = std::max(eq_last_train[r], m.vars[vi].key.train);
    }
  std::vector<std::vector<int>> eq_rows_at(std::max(T, 1));
  for (int r = 0; r < R; ++r)
    if (m.rows[r].sense == '=' && m.rows[r].family == RowFamily::DepartureLink)
      eq_rows_at[eq_last_train[r]].push_back(r);

  std::vector<double> sums(R, 0);
  std::vector<const detail::Path*> chosen(T, nullptr);
  std::vector<int> order(T);
  for (int t = 0; t < T; ++t) order[t] = t;
  double best_obj = std::numeric_limits<double>::infinity();

  std::function<void(int, double)> rec = [&](int t, double obj) {
    if (t == T) {
      if (obj > best_obj + 1e-9) return;
      Solution cand = detail::make_solution(m, chosen, order, SolveStatus::Optimal);
      if (first_violated_row(m, cand.assignment) >= 0) return;
      if (obj < best_obj - 1e-9) {
        best_obj = obj;
        best = std::move(cand);
        best.ties = 1;
      } else {
        ++best.ties;
      }
      return;
    }
    for (const auto& p : paths[t]) {
      chosen[t] = &p;
      bool ok = true;
      for (int vi : p.vars)
        for (auto [r, c] : var_rows[vi]) {
          sums[r] += c;
          if (m.rows[r].sense == '<' && sums[r] > m.rows[r].rhs + 1e-9) ok = false;
        }
      if (ok)
        for (int r : eq_rows_at[t])
          if (std::abs(sums[r] - m.rows[r].rhs) > 1e-9) ok = false;
      if (ok) rec(t + 1, obj + p.cost);
      for (int vi : p.vars)
        for (auto [r, c] : var_rows[vi]) sums[r] -= c;
      chosen[t] = nullptr;
    }
  };
  rec(0, 0);
  if (T == 0) best = detail::make_solution(m, {}, {}, SolveStatus::Optimal);
  return best;
}

}  // namespace minerail
