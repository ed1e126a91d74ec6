#pragma once

// Shared test fixtures: the T16 4x4 unit grid and independent shortest-path
// oracles used to freeze expected values.

#include <cmath>
#include <sstream>
#include <vector>

#include "pirpath/graph.hpp"

namespace fixtures {

struct EdgeSpec {
    pirpath::NodeId from, to;
    double weight;
};

inline pirpath::RoadNetwork make_network(const std::vector<std::pair<pirpath::NodeId, pirpath::Coord>>& nodes,
                                         const std::vector<EdgeSpec>& edges, bool directed) {
    std::ostringstream coords, edgef;
    for (const auto& [id, c] : nodes) coords << "v " << id << " " << c.x << " " << c.y << "\n";
    edgef << "p " << (directed ? "directed" : "undirected") << " " << nodes.size() << " "
          << edges.size() << "\n";
    for (const auto& e : edges) edgef << "e " << e.from << " " << e.to << " " << e.weight << "\n";
    std::istringstream ci(coords.str()), ei(edgef.str());
    return pirpath::parse_network(ci, ei);
}

/// 4x4 unit-weight grid; node id = y*4 + x at coordinates (x, y).
/// 16 nodes, 24 undirected edges.
inline pirpath::RoadNetwork t16() {
    std::vector<std::pair<pirpath::NodeId, pirpath::Coord>> nodes;
    std::vector<EdgeSpec> edges;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) nodes.push_back({static_cast<pirpath::NodeId>(y * 4 + x),
                                                     {double(x), double(y)}});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            pirpath::NodeId id = y * 4 + x;
            if (x + 1 < 4) edges.push_back({id, id + 1, 1.0});
            if (y + 1 < 4) edges.push_back({id, id + 4, 1.0});
        }
    return make_network(nodes, edges, false);
}

/// Independent all-pairs oracle (Floyd-Warshall) over dense indices.
inline std::vector<std::vector<double>> all_pairs_oracle(const pirpath::RoadNetwork& net) {
    const size_t n = net.node_count();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, pirpath::kInfiniteCost));
    for (size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    for (const auto& e : net.edges) {
        d[e.from][e.to] = std::min(d[e.from][e.to], e.weight);
        if (!net.directed) d[e.to][e.from] = std::min(d[e.to][e.from], e.weight);
    }
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i) {
            if (d[i][k] >= pirpath::kInfiniteCost) continue;
            for (size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
        }
    return d;
}

inline bool close(double a, double b, double rel = 1e-9) {
    return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace fixtures
