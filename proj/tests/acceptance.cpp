// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Built on the public library API plus the installed CLI binary.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "minerail/lp.hpp"
#include "minerail/render.hpp"

#include "helpers.hpp"

using namespace minerail;
using minerail::testing::build_pipeline;
using minerail::testing::load_case;
using minerail::testing::make_random_instance;
using minerail::testing::read_fixture;

namespace {

int failures = 0;

void criterion(int n, const std::string& name, const std::function<void()>& body) {
  try {
    body();
    std::cout << "PASS criterion " << n << ": " << name << "\n";
  } catch (const std::exception& e) {
    ++failures;
    std::cout << "FAIL criterion " << n << ": " << name << " -- " << e.what() << "\n";
  }
}

void expect(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

const std::vector<std::string> kCaseFleets = {"case1.json", "case2.json", "case3.json",
                                              "case4.json"};

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

/// Independent recount of the structural properties of a solution.
void check_solution_properties(const MipModel& m, const Solution& s) {
  const TimeSpaceNetwork& ts = *m.tsn;
  const int Q = ts.grid.horizon_instants;
  // per-train source-to-sink path decomposition
  for (size_t t = 0; t < s.paths.size(); ++t) {
    expect(!s.paths[t].empty(), "train without a path");
    int at = ts.trains[t].source_node;
    for (int vi : s.paths[t]) {
      expect(ts.arcs[m.vars[vi].key.arc].from == at, "path is not contiguous");
      at = ts.arcs[m.vars[vi].key.arc].to;
    }
    expect(at == ts.sink, "path does not reach the sink");
  }
  // node capacity: at most one chosen inbound arc per timed node (chained
  // successors hand over in place, so their starting arcs do not re-occupy)
  std::map<int, int> inbound;
  for (size_t vi = 0; vi < s.assignment.size(); ++vi)
    if (s.assignment[vi]) {
      const TsArc& a = ts.arcs[m.vars[vi].key.arc];
      if (a.klass == ArcClass::Starting &&
          ts.trains[m.vars[vi].key.train].train.pred >= 0)
        continue;
      if (ts.nodes[a.to].kind == TsNode::Timed)
        expect(++inbound[a.to] <= 1, "two trains at one timed node");
    }
  // arc capacity recount per identity group and instant
  for (size_t g = 0; g < ts.iden.size(); ++g) {
    for (int q = 1; q < Q; ++q) {
      int busy = 0;
      for (int a : ts.iden[g])
        for (size_t t = 0; t < s.paths.size(); ++t) {
          int vi = m.find_var(static_cast<int>(t), a);
          if (vi < 0 || !s.assignment[vi]) continue;
          int k = ts.nodes[ts.arcs[a].from].time, l = ts.nodes[ts.arcs[a].to].time;
          if (k <= q - 1 && l >= q) ++busy;
        }
      expect(busy <= 1, "two trains in identity group " + ts.iden_keys[g]);
    }
  }
  // chained departures: successor start instant equals predecessor completion
  for (size_t t = 0; t < ts.trains.size(); ++t) {
    int pred_id = ts.trains[t].train.pred;
    if (pred_id < 0) continue;
    int pre = -1;
    for (size_t u = 0; u < ts.trains.size(); ++u)
      if (ts.trains[u].train.id == pred_id) pre = static_cast<int>(u);
    if (pre < 0) continue;
    int start_q = ts.nodes[ts.arcs[m.vars[s.paths[t].front()].key.arc].to].time;
    int end_q = ts.nodes[ts.arcs[m.vars[s.paths[pre].back()].key.arc].from].time;
    expect(start_q == end_q, "chained departure instant mismatch");
  }
}

std::string run_cli(const std::string& args) {
  std::string cmd = std::string(MINERAIL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return rc == 0 ? "" : "exit " + std::to_string(rc) + " from: " + args;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main() {
  const std::string net = "sample-network.json";
  unsetenv("MINERAIL_CONFIG");

  criterion(1, "sample cases solve to certified optimality with clean replay", [&] {
    for (const auto& fleet : kCaseFleets) {
      double t0 = now_s();
      auto p = load_case(net, fleet);
      Solution exact = solve(p.model);
      expect(exact.status == SolveStatus::Optimal, fleet + ": not optimal");
      expect(now_s() - t0 < 60, fleet + ": over a minute");
      Solution oracle = brute_force(p.model);
      expect(std::abs(exact.objective - oracle.objective) < 1e-9,
             fleet + ": objective differs from the exhaustive oracle");
      Schedule sched = stitch(exact, p.model);
      expect(replay_check(sched).empty(), fleet + ": replay violations");
    }
  });

  criterion(2, "solver matches the oracle on 100 randomized instances", [&] {
    for (unsigned seed = 1000; seed < 1100; ++seed) {
      double t0 = now_s();
      auto inst = make_random_instance(seed);
      auto p = build_pipeline(inst.network, inst.fleet);
      Solution exact = solve(p.model);
      Solution oracle = brute_force(p.model);
      expect(exact.status == oracle.status,
             "seed " + std::to_string(seed) + ": status disagrees");
      if (exact.status == SolveStatus::Optimal)
        expect(std::abs(exact.objective - oracle.objective) < 1e-9,
               "seed " + std::to_string(seed) + ": objective disagrees");
      expect(now_s() - t0 < 5, "seed " + std::to_string(seed) + ": over 5 s");
    }
  });

  criterion(3, "constraint-family properties hold on every returned solution", [&] {
    for (const auto& fleet : kCaseFleets) {
      auto p = load_case(net, fleet);
      Solution s = solve(p.model);
      expect(s.status == SolveStatus::Optimal, fleet + ": not optimal");
      check_solution_properties(p.model, s);
    }
    json wide = read_fixture(net);
    wide["grid"]["horizon_instants"] = 8;
    json chained = json::array(
        {{{"name", "M1"}, {"dep_node", "A"}, {"dep_q", 0}, {"loadout_seq", json::array({"G"})}}});
    auto pc = build_pipeline(wide, chained);
    Solution sc = solve(pc.model);
    expect(sc.status == SolveStatus::Optimal, "chained fixture: not optimal");
    check_solution_properties(pc.model, sc);
    for (unsigned seed = 1000; seed < 1100; ++seed) {
      auto inst = make_random_instance(seed);
      auto p = build_pipeline(inst.network, inst.fleet);
      Solution s = solve(p.model);
      if (s.status == SolveStatus::Optimal) check_solution_properties(p.model, s);
    }
  });

  criterion(4, "pruning preserves the optimum and strictly shrinks the model", [&] {
    for (const auto& fleet : kCaseFleets) {
      auto unpruned = load_case(net, fleet, {}, false);
      auto pruned = load_case(net, fleet, {}, true);
      Solution a = solve(unpruned.model), b = solve(pruned.model);
      expect(a.status == b.status && std::abs(a.objective - b.objective) < 1e-9,
             fleet + ": pruning changed the optimum");
    }
    int multi_loadout = 0;
    for (unsigned seed = 2000; seed < 2050; ++seed) {
      auto inst = make_random_instance(seed);
      // bans carry routing semantics, so they apply on both sides; the
      // reachability pass is the pure optimization under test
      auto unpruned = build_pipeline(inst.network, inst.fleet, {}, false);
      prune_banned(unpruned.model);
      auto pruned = build_pipeline(inst.network, inst.fleet, {}, true);
      Solution a = solve(unpruned.model), b = solve(pruned.model);
      expect(a.status == b.status, "seed " + std::to_string(seed) + ": status changed");
      if (a.status == SolveStatus::Optimal)
        expect(std::abs(a.objective - b.objective) < 1e-9,
               "seed " + std::to_string(seed) + ": objective changed");
      if (inst.loadouts >= 2) {
        ++multi_loadout;
        expect(pruned.model.live_count() < unpruned.model.live_count(),
               "seed " + std::to_string(seed) + ": no variables pruned");
      }
    }
    expect(multi_loadout > 0, "corpus produced no multi-load-out instance");
  });

  criterion(5, "construction matches the hand enumeration", [&] {
    PhysicalNetwork l3 = load_network(read_fixture("line3-network.json"));
    auto legs = validate_fleet(load_fleet(read_fixture("line3-fleet.json")), l3, l3.grid);
    PhysicalNetwork ex = expand_network(l3);
    TimeSpaceNetwork ts = build_tsnet(ex, l3.grid, legs);
    expect(ts.nodes.size() == 22, "node count");
    expect(ts.count(ArcClass::Transit) == 20, "transit arc count");
    expect(ts.count(ArcClass::Waiting) == 3, "waiting arc count");
    expect(ts.count(ArcClass::Starting) == 4, "starting arc count");
    expect(ts.count(ArcClass::Disappearing) == 12, "disappearing arc count");
    bool loading_ok = false, dummies = false;
    for (const auto& l : ex.links)
      if (l.id == "G.load") loading_ok = l.dur_fwd == 2;  // ceil(10 / 5)
    for (const auto& n : ex.nodes)
      if (n.kind == NodeKind::Dummy) dummies = true;
    expect(loading_ok, "loading-link duration");
    expect(dummies, "capacity-2 link did not gain a dummy node");
    PhysicalNetwork sx = expand_network(load_network(read_fixture(net)));
    for (const auto& l : sx.links)
      if (l.id == "B-G#2.f#a")
        expect(l.dur_fwd == 1, "siding half not halved");  // 10 min -> 2 -> 1 + 1
  });

  criterion(6, "rolling horizon completes with a stable, clean plan", [&] {
    PhysicalNetwork network = load_network(read_fixture(net));
    PhysicalNetwork expanded = expand_network(network);
    auto legs = validate_fleet(load_fleet(read_fixture("case2.json")), network, network.grid);
    CycleConfig cc;
    cc.cycle_len_min = 5;
    cc.horizon_instants = network.grid.horizon_instants;

    auto p = load_case(net, "case2.json");
    Solution offline = solve(p.model);
    WorldState st = initial_state(legs, expanded);
    CyclePlan c1 = plan_cycle(st, expanded, cc);
    expect(c1.schedule.status == SolveStatus::Optimal, "cycle 1 not optimal");
    expect(std::abs(c1.schedule.objective - offline.objective) < 1e-9,
           "cycle 1 differs from the one-shot solve");

    WorldState st2 = advance(st, c1.schedule, cc);
    CyclePlan c2 = plan_cycle(st2, expanded, cc, c1.next_warm);
    expect(c2.schedule.status == SolveStatus::Optimal, "cycle 2 not optimal");
    for (const auto& t2 : c2.schedule.trains) {
      const TrainSchedule* t1 = c1.schedule.find(t2.name);
      expect(t1 != nullptr, "train lost between cycles");
      for (const auto& mv : t2.movements) {
        bool found = false;
        for (const auto& mv1 : t1->movements)
          if (mv1.link == mv.link && mv1.enter == mv.enter + 1 && mv1.exit == mv.exit + 1)
            found = true;
        expect(found, t2.name + ": cycle-2 plan deviates without disturbance");
      }
    }
    SimulationResult res = run_simulation(network, legs, cc);
    expect(res.completed, "simulation did not run to completion");
    expect(res.violations.empty(), "end-to-end replay found violations");
  });

  criterion(7, "warm starts shrink the search and keep the objective", [&] {
    for (const auto& fleet : kCaseFleets) {
      auto p = load_case(net, fleet);
      Solution cold = solve(p.model);
      WarmStart w;
      for (size_t vi = 0; vi < cold.assignment.size(); ++vi)
        if (cold.assignment[vi]) w.hints[p.model.vars[vi].key] = 1;
      Solution warm = solve(p.model, {}, w);
      expect(warm.status == SolveStatus::Optimal, fleet + ": warm run not optimal");
      expect(std::abs(warm.objective - cold.objective) < 1e-9, fleet + ": objective changed");
      expect(warm.nodes_explored < cold.nodes_explored,
             fleet + ": warm start did not reduce explored nodes");
    }
  });

  criterion(8, "LP exports parse and mirror the in-memory model", [&] {
    for (const auto& fleet : kCaseFleets) {
      auto p = load_case(net, fleet);
      std::string doc = export_lp(p.model);
      lp::LpSummary sum = lp::check_lp_document(doc);
      expect(sum.variables == p.model.live_count(), fleet + ": variable count mismatch");
      expect(sum.rows == static_cast<int>(p.model.rows.size()), fleet + ": row count mismatch");
    }
  });

  criterion(9, "every command is byte-deterministic", [&] {
    std::string dir = "/tmp/minerail-acceptance";
    expect(std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) == 0,
           "could not prepare the scratch directory");
    std::string fx = MINERAIL_FIXTURE_DIR;
    auto twice = [&](const std::string& name, const std::string& args) {
      for (int run = 1; run <= 2; ++run) {
        std::string out = dir + "/" + name + "." + std::to_string(run);
        std::string err = run_cli(args + " --out " + out);
        expect(err.empty(), name + ": " + err);
      }
      std::string a = slurp(dir + "/" + name + ".1"), b = slurp(dir + "/" + name + ".2");
      expect(!a.empty(), name + ": empty output");
      expect(a == b, name + ": outputs differ between runs");
    };
    std::string netf = " --network " + fx + "/sample-network.json";
    twice("expand", "expand" + netf + " --fleet " + fx + "/case1.json");
    for (int c = 1; c <= 4; ++c) {
      std::string fleet = " --fleet " + fx + "/case" + std::to_string(c) + ".json";
      twice("solve" + std::to_string(c), "solve" + netf + fleet);
      twice("lp" + std::to_string(c), "export-lp" + netf + fleet);
    }
    twice("simulate", "simulate" + netf + " --fleet " + fx + "/case2.json --cycle-min 5");
    twice("render", "render" + netf + " --schedule " + dir + "/solve3.1");
  });

  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
