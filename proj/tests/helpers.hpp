#pragma once

#include <fstream>
#include <random>
#include <string>

#include "minerail/dispatch.hpp"

namespace minerail::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(MINERAIL_FIXTURE_DIR) + "/" + name;
}

inline json read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  json doc;
  in >> doc;
  return doc;
}

struct Pipeline {
  PhysicalNetwork net;       // as loaded
  PhysicalNetwork expanded;
  std::shared_ptr<TimeSpaceNetwork> tsn;
  MipModel model;
};

inline Pipeline build_pipeline(const json& network_doc, const json& fleet_doc,
                               PenaltyConfig pen = {}, bool prune = true) {
  Pipeline p;
  p.net = load_network(network_doc);
  p.expanded = expand_network(p.net);
  auto fleet = load_fleet(fleet_doc);
  auto legs = validate_fleet(fleet, p.net, p.net.grid);
  p.tsn = std::make_shared<TimeSpaceNetwork>(build_tsnet(p.expanded, p.net.grid, legs));
  p.model = build_model(p.tsn, pen);
  if (prune) {
    prune_banned(p.model);
    prune_unreachable(p.model);
  }
  return p;
}

inline Pipeline load_case(const std::string& network, const std::string& fleet,
                          PenaltyConfig pen = {}, bool prune = true) {
  return build_pipeline(read_fixture(network), read_fixture(fleet), pen, prune);
}

/// Number of source-to-sink paths per train (capped), for oracle guards.
inline double count_paths(const MipModel& m, int train) {
  detail::TrainGraph g(m, train);
  const TimeSpaceNetwork& ts = *m.tsn;
  std::vector<double> cnt(ts.nodes.size(), 0);
  cnt[g.sink] = 1;
  for (auto it = g.topo.rbegin(); it != g.topo.rend(); ++it)
    for (int vi : g.out[*it]) cnt[*it] += cnt[ts.arcs[m.vars[vi].key.arc].to];
  return cnt[g.source];
}

struct RandomInstance {
  json network, fleet;
  unsigned seed = 0;
  int loadouts = 0;
};

/// Deterministic random desk-scale instance: a line of 3-6 core nodes with
/// optional parallel sidings, capacities, bans, and 1-3 trains. Instances
/// whose path-combination count would overwhelm the brute-force oracle are
/// rejected and regenerated from the same stream.
inline RandomInstance make_random_instance(unsigned seed) {
  std::mt19937 rng(seed * 2654435761u + 13u);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<>(0, 1)(rng) < p; };

  for (int attempt = 0;; ++attempt) {
    RandomInstance inst;
    inst.seed = seed;
    int n = pick(3, 6);
    int Q = pick(4, 8);
    json nodes = json::array(), links = json::array();
    std::vector<std::string> ids;
    std::vector<bool> is_loadout;
    for (int i = 0; i < n; ++i) {
      std::string id = "N" + std::to_string(i);
      bool loadout = i != 0 && i != n - 1 && chance(0.3);
      if (loadout) {
        nodes.push_back({{"id", id},
                         {"kind", "loadout"},
                         {"loop_capacity", pick(1, 2)},
                         {"loading_time_min", 5 * pick(1, 2)}});
        ++inst.loadouts;
      } else {
        nodes.push_back({{"id", id}, {"kind", "station"}});
      }
      ids.push_back(id);
      is_loadout.push_back(loadout);
    }
    for (int i = 0; i + 1 < n; ++i) {
      json link{{"from", ids[i]},
                {"to", ids[i + 1]},
                {"kind", "mainline"},
                {"capacity", pick(1, 2)},
                {"travel_fwd_min", 5 * pick(1, 2)},
                {"travel_bwd_min", 5 * pick(1, 2)}};
      if (chance(0.15)) {
        link["bans"] = json::array(
            {{{"tag", chance(0.5) ? "*" : "loaded"}, {"direction", chance(0.5) ? "fwd" : "bwd"}}});
      }
      links.push_back(std::move(link));
      if (chance(0.25))
        links.push_back({{"from", ids[i]},
                         {"to", ids[i + 1]},
                         {"kind", "siding"},
                         {"capacity", 1},
                         {"travel_fwd_min", 10},
                         {"travel_bwd_min", 10}});
    }
    inst.network = {{"grid", {{"instant_len_min", 5}, {"horizon_instants", Q}}},
                    {"nodes", nodes},
                    {"links", links}};

    int T = pick(1, 3);
    json fleet = json::array();
    for (int t = 0; t < T; ++t) {
      json jt{{"name", "R" + std::to_string(t + 1)}, {"dep_q", pick(0, Q - 2)}};
      int dep = pick(0, n - 1);
      jt["dep_node"] = ids[dep];
      std::vector<int> loadout_ix;
      for (int i = 0; i < n; ++i)
        if (is_loadout[i]) loadout_ix.push_back(i);
      if (!loadout_ix.empty() && Q >= 6 && chance(0.25)) {
        jt["loadout_seq"] = json::array({ids[loadout_ix[pick(0, (int)loadout_ix.size() - 1)]]});
      } else {
        int dest = pick(0, n - 1);
        if (dest == dep) dest = (dest + 1) % n;
        jt["dest_node"] = ids[dest];
      }
      if (chance(0.5)) jt["tags"] = json::array({"loaded"});
      fleet.push_back(std::move(jt));
    }
    inst.fleet = std::move(fleet);

    // oracle guard: reject instances with too many path combinations
    try {
      Pipeline p = build_pipeline(inst.network, inst.fleet);
      double product = 1;
      for (int t = 0; t < (int)p.tsn->trains.size(); ++t) {
        double c = count_paths(p.model, t);
        product *= std::max(c, 1.0);
      }
      if (product <= 2e5) return inst;
    } catch (const ValidationError&) {
      // malformed combination (e.g. decomposition needs a loadout kind); retry
    }
    if (attempt > 200) throw std::runtime_error("instance generator failed to converge");
  }
}

}  // namespace minerail::testing
