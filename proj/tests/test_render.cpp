#include <catch2/catch_amalgamated.hpp>

#include "minerail/render.hpp"

#include "helpers.hpp"

using namespace minerail;
using minerail::testing::load_case;

namespace {

size_t count_occurrences(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
    ++n;
  return n;
}

Schedule solve_case(const std::string& fleet, minerail::testing::Pipeline& p) {
  p = load_case("sample-network.json", fleet);
  Solution s = solve(p.model);
  REQUIRE(s.status == SolveStatus::Optimal);
  return stitch(s, p.model);
}

}  // namespace

TEST_CASE("a single train renders as one green polyline") {
  minerail::testing::Pipeline p;
  Schedule sched = solve_case("case1.json", p);
  RenderResult rr = render_svg(sched, p.net);
  CHECK(rr.svg.rfind("<svg", 0) == 0);
  CHECK(count_occurrences(rr.svg, "<polyline") == 1);
  REQUIRE(rr.train_colors.size() == 1);
  CHECK(rr.train_colors[0].second == "#2e9e4f");  // green first
  CHECK(rr.svg.find("Mtest01") != std::string::npos);
}

TEST_CASE("three trains get green, blue, orange") {
  minerail::testing::Pipeline p;
  Schedule sched = solve_case("case3.json", p);
  RenderResult rr = render_svg(sched, p.net);
  CHECK(count_occurrences(rr.svg, "<polyline") == 3);
  REQUIRE(rr.train_colors.size() == 3);
  CHECK(rr.train_colors[0].second == "#2e9e4f");
  CHECK(rr.train_colors[1].second == "#2b6fd4");
  CHECK(rr.train_colors[2].second == "#ef8a2c");
  std::set<std::string> distinct;
  for (const auto& [name, color] : rr.train_colors) distinct.insert(color);
  CHECK(distinct.size() == 3);
}

TEST_CASE("corridor layout places every scheduled node") {
  minerail::testing::Pipeline p;
  Schedule sched = solve_case("case4.json", p);
  RenderResult rr = render_svg(sched, p.net);
  for (const auto& t : sched.trains)
    for (const auto& ev : t.events) {
      INFO(ev.node);
      CHECK(rr.node_distance.count(ev.node) == 1);
    }
  // corridor order: A before B before the load-out
  CHECK(rr.node_distance.at("A") < rr.node_distance.at("B"));
  CHECK(rr.node_distance.at("B") < rr.node_distance.at("G.out"));
}

TEST_CASE("an empty schedule renders the grid only") {
  minerail::testing::Pipeline p = load_case("sample-network.json", "case1.json");
  Schedule empty;
  empty.grid = p.net.grid;
  empty.status = SolveStatus::Optimal;
  RenderResult rr = render_svg(empty, p.net);
  CHECK(count_occurrences(rr.svg, "<polyline") == 0);
  CHECK(rr.svg.find("time (min)") != std::string::npos);
}

TEST_CASE("rendering is byte-deterministic") {
  minerail::testing::Pipeline p;
  Schedule sched = solve_case("case2.json", p);
  CHECK(render_svg(sched, p.net).svg == render_svg(sched, p.net).svg);
}

TEST_CASE("waiting shows as horizontal segments") {
  // force a dwell: two trains meeting across the siding
  minerail::testing::Pipeline p;
  Schedule sched = solve_case("case3.json", p);
  RenderResult rr = render_svg(sched, p.net);
  // polylines exist and every coordinate is finite and inside the canvas
  std::istringstream is(rr.svg);
  std::string line;
  while (std::getline(is, line)) {
    auto pos = line.find("points=\"");
    if (pos == std::string::npos) continue;
    std::string pts = line.substr(pos + 8, line.find('"', pos + 8) - pos - 8);
    std::istringstream ps(pts);
    std::string pair;
    while (ps >> pair) {
      double x = std::stod(pair.substr(0, pair.find(',')));
      double y = std::stod(pair.substr(pair.find(',') + 1));
      CHECK(x >= 0);
      CHECK(y >= 0);
    }
  }
}
