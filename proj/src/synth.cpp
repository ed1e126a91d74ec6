#include "pirpath/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pirpath {

namespace {

struct ProtoEdge {
    uint32_t a, b;
    double weight;
};

/// True when the graph over `n` nodes stays connected without edge `skip`.
bool connected_without(uint32_t n, const std::vector<ProtoEdge>& edges,
                       const std::vector<char>& alive, size_t skip) {
    std::vector<std::vector<uint32_t>> adj(n);
    for (size_t e = 0; e < edges.size(); ++e) {
        if (!alive[e] || e == skip) continue;
        adj[edges[e].a].push_back(edges[e].b);
        adj[edges[e].b].push_back(edges[e].a);
    }
    std::vector<char> seen(n, 0);
    std::vector<uint32_t> stack{0};
    seen[0] = 1;
    uint32_t reached = 1;
    while (!stack.empty()) {
        uint32_t u = stack.back();
        stack.pop_back();
        for (uint32_t v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
    }
    return reached == n;
}

}  // namespace

RoadNetwork generate_network(const SynthConfig& cfg) {
    const uint32_t w = cfg.grid_width, hgt = cfg.grid_height;
    if (w < 2 || hgt < 2) throw std::invalid_argument("grid must be at least 2x2");
    const uint32_t n = w * hgt;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(-cfg.jitter, cfg.jitter);

    std::vector<Coord> coords(n);
    for (uint32_t y = 0; y < hgt; ++y)
        for (uint32_t x = 0; x < w; ++x)
            coords[y * w + x] = {double(x) + noise(rng), double(y) + noise(rng)};

    std::vector<ProtoEdge> edges;
    auto dist = [&](uint32_t a, uint32_t b) {
        double dx = coords[a].x - coords[b].x, dy = coords[a].y - coords[b].y;
        return std::sqrt(dx * dx + dy * dy);
    };
    for (uint32_t y = 0; y < hgt; ++y)
        for (uint32_t x = 0; x < w; ++x) {
            uint32_t id = y * w + x;
            if (x + 1 < w) edges.push_back({id, id + 1, dist(id, id + 1)});
            if (y + 1 < hgt) edges.push_back({id, id + w, dist(id, id + w)});
        }

    // thin the grid without disconnecting it
    std::vector<char> alive(edges.size(), 1);
    std::vector<size_t> order(edges.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    size_t want_gone = static_cast<size_t>(double(edges.size()) * cfg.delete_fraction);
    size_t gone = 0;
    for (size_t e : order) {
        if (gone >= want_gone) break;
        if (connected_without(n, edges, alive, e)) {
            alive[e] = 0;
            ++gone;
        }
    }

    std::uniform_real_distribution<double> stretch(1.0, 1.5);
    std::ostringstream coord_text, edge_text;
    coord_text.precision(17);
    for (uint32_t u = 0; u < n; ++u)
        coord_text << "v " << u << " " << coords[u].x << " " << coords[u].y << "\n";
    size_t kept = gone < edges.size() ? edges.size() - gone : 0;
    edge_text << "p " << (cfg.directed ? "directed" : "undirected") << " " << n << " "
              << (cfg.directed ? kept * 2 : kept) << "\n";
    edge_text.precision(17);
    for (size_t e = 0; e < edges.size(); ++e) {
        if (!alive[e]) continue;
        edge_text << "e " << edges[e].a << " " << edges[e].b << " " << edges[e].weight << "\n";
        if (cfg.directed)
            edge_text << "e " << edges[e].b << " " << edges[e].a << " "
                      << edges[e].weight * stretch(rng) << "\n";
    }
    std::istringstream ci(coord_text.str()), ei(edge_text.str());
    return parse_network(ci, ei);
}

void write_network_files(const RoadNetwork& net, const std::string& coord_path,
                         const std::string& edge_path) {
    std::ofstream cf(coord_path, std::ios::trunc), ef(edge_path, std::ios::trunc);
    if (!cf || !ef) throw std::runtime_error("cannot open network output files");
    cf.precision(17);
    ef.precision(17);
    for (size_t u = 0; u < net.node_count(); ++u)
        cf << "v " << net.node_ids[u] << " " << net.coords[u].x << " " << net.coords[u].y << "\n";
    ef << "p " << (net.directed ? "directed" : "undirected") << " " << net.node_count() << " "
       << net.edge_count() << "\n";
    for (const auto& e : net.edges)
        ef << "e " << net.node_ids[e.from] << " " << net.node_ids[e.to] << " " << e.weight
           << "\n";
}

}  // namespace pirpath
