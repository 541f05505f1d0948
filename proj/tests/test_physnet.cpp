#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace minerail;
using minerail::testing::read_fixture;

TEST_CASE("sample network loads with auto link ids") {
  PhysicalNetwork net = load_network(read_fixture("sample-network.json"));
  REQUIRE(net.nodes.size() == 3);
  REQUIRE(net.links.size() == 3);
  CHECK(net.links[0].id == "A-B");
  CHECK(net.links[1].id == "B-G");
  CHECK(net.links[2].id == "B-G#2");
  CHECK(net.links[2].kind == LinkKind::Siding);
  CHECK(net.grid.instant_len_min == 5);
  CHECK(net.grid.horizon_instants == 5);
  CHECK(net.nodes[2].kind == NodeKind::Loadout);
  CHECK(net.nodes[2].loop_capacity == 2);
}

TEST_CASE("network serialization round-trips") {
  json doc = read_fixture("sample-network.json");
  PhysicalNetwork net = load_network(doc);
  json out = serialize_network(net);
  PhysicalNetwork again = load_network(out);
  CHECK(serialize_network(again) == out);
  CHECK(again.nodes.size() == net.nodes.size());
  CHECK(again.links.size() == net.links.size());
}

TEST_CASE("travel minutes convert to instants by ceiling") {
  TimeGrid g{5, 5};
  CHECK(g.instants(5) == 1);
  CHECK(g.instants(6) == 2);
  CHECK(g.instants(10) == 2);
  CHECK(g.instants(11) == 3);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((TimeGrid{7, 5}.validate()), ValidationError);
  CHECK_THROWS_AS((TimeGrid{5, 1}.validate()), ValidationError);
  CHECK_NOTHROW((TimeGrid{5, 2}.validate()));
}

TEST_CASE("apportionment splits instants with a floor of one") {
  CHECK(apportion_instants(4, 2) == std::vector<int>{2, 2});
  CHECK(apportion_instants(5, 2) == std::vector<int>{3, 2});
  CHECK(apportion_instants(1, 2) == std::vector<int>{1, 1});
  CHECK(apportion_instants(7, 3) == std::vector<int>{3, 2, 2});
}

TEST_CASE("crossover links are forced to capacity one") {
  json doc = read_fixture("sample-network.json");
  doc["links"][0]["kind"] = "crossover";
  doc["links"][0]["capacity"] = 4;
  PhysicalNetwork net = load_network(doc);
  CHECK(net.links[0].capacity == 1.0);
}

TEST_CASE("schema violations are rejected") {
  json doc = read_fixture("sample-network.json");
  SECTION("unknown node kind") {
    doc["nodes"][0]["kind"] = "harbor";
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
  SECTION("link to unknown node") {
    doc["links"][0]["to"] = "Z";
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
  SECTION("grid must divide the hour") {
    doc["grid"]["instant_len_min"] = 7;
    CHECK_THROWS_AS(load_network(doc), ValidationError);
  }
}

TEST_CASE("fleet loading and validation") {
  PhysicalNetwork net = load_network(read_fixture("sample-network.json"));
  SECTION("case fixtures load") {
    auto fleet = load_fleet(read_fixture("case3.json"));
    REQUIRE(fleet.size() == 3);
    auto legs = validate_fleet(fleet, net, net.grid);
    CHECK(legs.size() == 3);  // dest-only trains stay single-leg
    for (const auto& l : legs) CHECK(l.pred == -1);
  }
  SECTION("duplicate names rejected") {
    json doc = read_fixture("case2.json");
    doc[1]["name"] = "Mtest01";
    CHECK_THROWS_AS(validate_fleet(load_fleet(doc), net, net.grid), ValidationError);
  }
  SECTION("departure instant outside the grid rejected") {
    json doc = read_fixture("case1.json");
    doc[0]["dep_q"] = 5;
    CHECK_THROWS_AS(validate_fleet(load_fleet(doc), net, net.grid), ValidationError);
  }
  SECTION("train needs a destination or load-out sequence") {
    json doc = json::array({{{"name", "T"}, {"dep_node", "A"}, {"dep_q", 0}}});
    CHECK_THROWS_AS(load_fleet(doc), ValidationError);
  }
}

TEST_CASE("a train visiting n load-outs decomposes into n+1 chained legs") {
  json doc = read_fixture("sample-network.json");
  doc["nodes"].push_back({{"id", "G2"},
                          {"kind", "loadout"},
                          {"loop_capacity", 1},
                          {"loading_time_min", 5}});
  doc["links"].push_back({{"from", "G"},
                          {"to", "G2"},
                          {"kind", "mainline"},
                          {"capacity", 1},
                          {"travel_fwd_min", 5},
                          {"travel_bwd_min", 5}});
  PhysicalNetwork net = load_network(doc);
  RealTrain t;
  t.name = "M1";
  t.dep_node = "A";
  t.dep_q = 0;
  t.loadout_seq = {"G", "G2"};
  auto legs = decompose_train(t, net, 7);
  REQUIRE(legs.size() == 3);
  CHECK(legs[0].dep_node == "A");
  CHECK(legs[0].dest_node == "G");
  CHECK(legs[0].pred == -1);
  CHECK(legs[1].dep_node == "G");
  CHECK(legs[1].dest_node == "G2");
  CHECK(legs[1].pred == 7);
  CHECK(legs[2].dep_node == "G2");
  CHECK(legs[2].dest_node == "A");
  CHECK(legs[2].pred == 8);
  for (const auto& l : legs) CHECK(l.real_train == "M1");
}

TEST_CASE("load-out ids resolve to the exit node after expansion") {
  PhysicalNetwork net = load_network(read_fixture("sample-network.json"));
  PhysicalNetwork ex = expand_network(net);
  CHECK(ex.resolve_train_node("G") == "G.out");
  CHECK(ex.resolve_train_node("A") == "A");
}
