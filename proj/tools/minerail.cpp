// minerail: plan and replay driverless train movements on single-track
// mine networks. Subcommands cover time-space expansion, one-shot solving,
// rolling-horizon simulation, SVG rendering, and LP-format export.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "minerail/dispatch.hpp"
#include "minerail/lp.hpp"
#include "minerail/render.hpp"

namespace {

using namespace minerail;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTimeout = 4;
constexpr int kExitInternal = 5;

struct CommonOpts {
  std::string network_path, fleet_path, out_path;
  int grid_g = 0, horizon = 0;
  double alpha = -1, beta = -1, gamma = -1, rho = -1, big_m = -1;
  double time_limit = 60;
  int cycle_min = 5;
  int cycles = -1;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
  return doc;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

/// Defaults may come from a JSON config file named by MINERAIL_CONFIG;
/// explicit flags override it.
void apply_env_config(CommonOpts& o) {
  const char* path = std::getenv("MINERAIL_CONFIG");
  if (!path || !*path) return;
  json cfg = read_json_file(path);
  auto take_i = [&](const char* k, int& dst) {
    if (dst == 0 && cfg.contains(k)) dst = cfg.at(k).get<int>();
  };
  auto take_d = [&](const char* k, double& dst, double unset) {
    if (dst == unset && cfg.contains(k)) dst = cfg.at(k).get<double>();
  };
  take_i("grid_g", o.grid_g);
  take_i("horizon", o.horizon);
  take_d("alpha", o.alpha, -1);
  take_d("beta", o.beta, -1);
  take_d("gamma", o.gamma, -1);
  take_d("rho", o.rho, -1);
  take_d("big_m", o.big_m, -1);
  if (cfg.contains("time_limit") && o.time_limit == 60)
    o.time_limit = cfg.at("time_limit").get<double>();
  if (cfg.contains("cycle_min") && o.cycle_min == 5) o.cycle_min = cfg.at("cycle_min").get<int>();
}

PhysicalNetwork load_network_opts(const CommonOpts& o) {
  PhysicalNetwork net = load_network(read_json_file(o.network_path));
  if (o.grid_g > 0) net.grid.instant_len_min = o.grid_g;
  if (o.horizon > 0) net.grid.horizon_instants = o.horizon;
  net.grid.validate();
  return net;
}

PenaltyConfig penalties_of(const CommonOpts& o) {
  PenaltyConfig p;
  if (o.gamma >= 0) p.gamma = o.gamma;
  if (o.alpha >= 0) p.alpha = o.alpha;
  if (o.beta >= 0) p.beta = o.beta;
  if (o.rho >= 0) p.rho = o.rho;
  if (o.big_m >= 0) p.big_m = o.big_m;
  return p;
}

std::vector<ModelTrain> load_legs(const CommonOpts& o, const PhysicalNetwork& net) {
  auto fleet = load_fleet(read_json_file(o.fleet_path));
  return validate_fleet(fleet, net, net.grid);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool fleet_required) {
  cmd->add_option("--network", o.network_path, "physical network JSON")->required();
  auto* f = cmd->add_option("--fleet", o.fleet_path, "fleet JSON (array of trains)");
  if (fleet_required) f->required();
  cmd->add_option("--grid-g", o.grid_g, "instant length in minutes (overrides network file)");
  cmd->add_option("--horizon", o.horizon, "horizon length |Q| in instants (overrides network file)");
  cmd->add_option("--alpha", o.alpha, "waiting penalty weight");
  cmd->add_option("--beta", o.beta, "late-departure penalty weight");
  cmd->add_option("--gamma", o.gamma, "transit cost weight");
  cmd->add_option("--rho", o.rho, "finishing-time weight");
  cmd->add_option("--big-m", o.big_m, "cancellation penalty (default: derived)");
  cmd->add_option("--time-limit", o.time_limit, "solver time limit in seconds");
  cmd->add_option("--out", o.out_path, "output file ('-' = stdout)");
}

int run_solve_pipeline(const CommonOpts& o, bool emit_lp) {
  PhysicalNetwork net = load_network_opts(o);
  PhysicalNetwork expanded = expand_network(net);
  auto legs = load_legs(o, net);
  auto tsn = std::make_shared<TimeSpaceNetwork>(build_tsnet(expanded, net.grid, legs));
  MipModel model = build_model(tsn, penalties_of(o));
  prune_banned(model);
  prune_unreachable(model);

  if (emit_lp) {
    write_output(o.out_path, export_lp(model));
    std::cout << "variables " << model.live_count() << " rows " << model.rows.size() << "\n";
    return kExitOk;
  }
  SolverConfig sc;
  sc.time_limit_s = o.time_limit;
  Solution sol = solve(model, sc);
  Schedule sched = stitch(sol, model);
  write_output(o.out_path, schedule_to_json(sched).dump(2) + "\n");
  if (sol.status == SolveStatus::Infeasible) {
    std::cerr << "infeasible: " << sol.diagnostic << "\n";
    return kExitInfeasible;
  }
  std::cout << "status " << (sol.status == SolveStatus::Optimal ? "optimal" : "timeout")
            << " objective " << lp::fmt_num(sol.objective) << " nodes " << sol.nodes_explored
            << "\n";
  return sol.status == SolveStatus::Optimal ? kExitOk : kExitTimeout;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"train movement planner for single-track mine rail networks"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* c_expand = app.add_subcommand("expand", "build and export the time-space network");
  add_common(c_expand, o, false);

  auto* c_solve = app.add_subcommand("solve", "solve one planning window to a schedule");
  add_common(c_solve, o, true);

  auto* c_sim = app.add_subcommand("simulate", "run the cyclic re-planning loop");
  add_common(c_sim, o, true);
  c_sim->add_option("--cycle-min", o.cycle_min, "cycle length in minutes");
  c_sim->add_option("--cycles", o.cycles, "number of cycles (0 = initial plan only, -1 = run to completion)");

  auto* c_render = app.add_subcommand("render", "draw a schedule as an SVG time-distance diagram");
  std::string schedule_path;
  c_render->add_option("--schedule", schedule_path, "schedule JSON from 'solve'")->required();
  c_render->add_option("--network", o.network_path, "physical network JSON")->required();
  c_render->add_option("--grid-g", o.grid_g, "instant length in minutes");
  c_render->add_option("--horizon", o.horizon, "horizon length |Q| in instants");
  c_render->add_option("--out", o.out_path, "output file ('-' = stdout)");

  auto* c_lp = app.add_subcommand("export-lp", "emit the model in LP text format");
  add_common(c_lp, o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    apply_env_config(o);
    if (app.got_subcommand(c_expand)) {
      PhysicalNetwork net = load_network_opts(o);
      PhysicalNetwork expanded = expand_network(net);
      std::vector<ModelTrain> legs;
      if (!o.fleet_path.empty()) legs = load_legs(o, net);
      TimeSpaceNetwork tsn = build_tsnet(expanded, net.grid, legs);
      write_output(o.out_path, export_graph(tsn));
      std::cout << "nodes " << tsn.nodes.size() << " arcs " << tsn.arcs.size() << " transit "
                << tsn.count(ArcClass::Transit) << " waiting " << tsn.count(ArcClass::Waiting)
                << " starting " << tsn.count(ArcClass::Starting) << " disappearing "
                << tsn.count(ArcClass::Disappearing) << "\n";
      return kExitOk;
    }
    if (app.got_subcommand(c_solve)) return run_solve_pipeline(o, false);
    if (app.got_subcommand(c_lp)) return run_solve_pipeline(o, true);
    if (app.got_subcommand(c_sim)) {
      PhysicalNetwork net = load_network_opts(o);
      auto legs = load_legs(o, net);
      CycleConfig cc;
      cc.cycle_len_min = o.cycle_min;
      cc.horizon_instants = net.grid.horizon_instants;
      cc.penalties = penalties_of(o);
      cc.solver.time_limit_s = o.time_limit;
      SimulationResult res = run_simulation(net, legs, cc, o.cycles);
      json doc;
      doc["cycles"] = json::array();
      for (const auto& s : res.cycles) doc["cycles"].push_back(schedule_to_json(s));
      doc["final_state"] = state_to_json(res.final_state);
      doc["completed"] = res.completed;
      doc["replay_violations"] = json::array();
      for (const auto& v : res.violations) doc["replay_violations"].push_back(v.what);
      write_output(o.out_path, doc.dump(2) + "\n");
      if (!res.violations.empty())
        throw InternalError("occupancy violation during replay: " + res.violations.front().what);
      std::cout << "cycles " << res.cycles.size() << " completed "
                << (res.completed ? "yes" : "no") << "\n";
      if (!res.cycles.empty() && res.cycles.back().status == SolveStatus::Infeasible)
        return kExitInfeasible;
      return kExitOk;
    }
    if (app.got_subcommand(c_render)) {
      PhysicalNetwork net = load_network_opts(o);
      Schedule sched = schedule_from_json(read_json_file(schedule_path));
      RenderResult rr = render_svg(sched, net);
      // every scheduled node must land on the corridor layout
      for (const auto& t : sched.trains)
        for (const auto& ev : t.events)
          if (!rr.node_distance.count(ev.node))
            throw ValidationError("schedule references unknown node '" + ev.node + "'");
      write_output(o.out_path, rr.svg);
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
