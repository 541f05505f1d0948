#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "minerail/dispatch.hpp"

namespace minerail {

struct RenderResult {
  std::string svg;
  std::map<std::string, double> node_distance;  // expanded node id -> corridor km.. (minutes)
  std::vector<std::pair<std::string, std::string>> train_colors;
};

namespace detail {

/// Corridor layout: shortest forward travel time (minutes) from the first
/// node in file order, over the expanded graph, ignoring direction bans.
inline std::map<std::string, double> corridor_layout(const PhysicalNetwork& net) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.nodes.size(), inf);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  if (!net.nodes.empty()) {
    dist[0] = 0;
    pq.push({0, 0});
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u] + 1e-12) continue;
    for (const auto& l : net.links) {
      auto relax = [&](int a, int b, double w) {
        if (a == u && dist[u] + w < dist[b] - 1e-12) {
          dist[b] = dist[u] + w;
          pq.push({dist[b], b});
        }
      };
      relax(l.from, l.to, l.travel_fwd_min);
      relax(l.to, l.from, l.travel_bwd_min);
    }
  }
  std::map<std::string, double> out;
  for (size_t i = 0; i < net.nodes.size(); ++i)
    if (dist[i] < inf) out[net.nodes[i].id] = dist[i];
  return out;
}

inline std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace detail

/// Draw a time-distance diagram of a schedule as a standalone SVG document.
/// Time runs left to right, corridor position top to bottom; each train is
/// one polyline. Output is byte-deterministic for a given input.
inline RenderResult render_svg(const Schedule& s, const PhysicalNetwork& network) {
  PhysicalNetwork net = network.expanded ? network : expand_network(network);
  RenderResult res;
  res.node_distance = detail::corridor_layout(net);

  static const char* palette[] = {"#2e9e4f", "#2b6fd4", "#ef8a2c", "#b13fb1",
                                  "#c2403a", "#2fa3a3", "#8a6d3b", "#5b5ea6"};
  const double px_per_instant = 60, px_per_min = 8;
  const double ml = 120, mt = 40, mr = 30, mb = 50;
  double max_d = 0;
  for (const auto& [id, d] : res.node_distance) max_d = std::max(max_d, d);
  int Q = s.grid.horizon_instants;
  double w = ml + (Q - 1) * px_per_instant + mr;
  double h = mt + max_d * px_per_min + mb;
  auto X = [&](double q) { return ml + q * px_per_instant; };
  auto Y = [&](double d) { return mt + d * px_per_min; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(w) << "\" height=\""
     << detail::fmt(h) << "\" viewBox=\"0 0 " << detail::fmt(w) << " " << detail::fmt(h)
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // horizontal guide per physical station/junction, label on the left
  std::vector<std::pair<double, std::string>> guides;
  for (const auto& n : net.nodes) {
    if (n.kind == NodeKind::Dummy || n.kind == NodeKind::SidingInternal) continue;
    auto it = res.node_distance.find(n.id);
    if (it != res.node_distance.end()) guides.push_back({it->second, n.id});
  }
  std::sort(guides.begin(), guides.end());
  for (const auto& [d, id] : guides) {
    os << "<line x1=\"" << detail::fmt(X(0)) << "\" y1=\"" << detail::fmt(Y(d)) << "\" x2=\""
       << detail::fmt(X(Q - 1)) << "\" y2=\"" << detail::fmt(Y(d))
       << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << detail::fmt(ml - 8) << "\" y=\"" << detail::fmt(Y(d) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << id
       << "</text>\n";
  }
  // vertical time grid, one tick per instant, labelled in minutes
  for (int q = 0; q < Q; ++q) {
    os << "<line x1=\"" << detail::fmt(X(q)) << "\" y1=\"" << detail::fmt(mt) << "\" x2=\""
       << detail::fmt(X(q)) << "\" y2=\"" << detail::fmt(Y(max_d))
       << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << detail::fmt(X(q)) << "\" y=\"" << detail::fmt(Y(max_d) + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << q * s.grid.instant_len_min << "</text>\n";
  }
  os << "<text x=\"" << detail::fmt(X(0)) << "\" y=\"" << detail::fmt(Y(max_d) + 36)
     << "\" font-family=\"sans-serif\" font-size=\"11\">time (min)</text>\n";

  int ci = 0;
  for (const auto& t : s.trains) {
    std::string color = palette[ci % 8];
    ++ci;
    res.train_colors.push_back({t.name, color});
    if (t.events.empty()) continue;
    // interleave events (horizontal dwell) and movements (diagonal runs)
    std::vector<std::pair<double, double>> pts;  // (instant, distance)
    size_t mi = 0;
    for (const auto& ev : t.events) {
      auto dit = res.node_distance.find(ev.node);
      if (dit == res.node_distance.end()) continue;
      pts.push_back({static_cast<double>(ev.arrival), dit->second});
      pts.push_back({static_cast<double>(ev.departure), dit->second});
      if (mi < t.movements.size()) {
        const auto& mv = t.movements[mi];
        auto f = res.node_distance.find(mv.from), g = res.node_distance.find(mv.to);
        if (f != res.node_distance.end() && g != res.node_distance.end()) {
          pts.push_back({static_cast<double>(mv.enter), f->second});
          pts.push_back({static_cast<double>(mv.exit), g->second});
        }
        ++mi;
      }
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
       << (t.cancelled ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
    for (size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << detail::fmt(X(pts[i].first)) << "," << detail::fmt(Y(pts[i].second));
    os << "\"/>\n";
    // legend entry
    double ly = 16.0 + 14.0 * (ci - 1);
    os << "<line x1=\"" << detail::fmt(ml) << "\" y1=\"" << detail::fmt(ly - 4) << "\" x2=\""
       << detail::fmt(ml + 24) << "\" y2=\"" << detail::fmt(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << detail::fmt(ml + 30) << "\" y=\"" << detail::fmt(ly)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << t.name
       << (t.cancelled ? " (cancelled)" : "") << "</text>\n";
  }
  os << "</svg>\n";
  res.svg = os.str();
  return res;
}

}  // namespace minerail
