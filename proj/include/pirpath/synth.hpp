#pragma once

#include "pirpath/graph.hpp"

namespace pirpath {

/// Seeded synthetic road network: a jittered grid with distance weights and a
/// connectivity-preserving random edge thinning, so the result has irregular
/// degrees and node density like a small road map.
struct SynthConfig {
    uint32_t grid_width = 72;
    uint32_t grid_height = 72;   // 72 x 72 = 5,184 nodes
    double jitter = 0.3;         // per-axis coordinate noise, +/- this much
    double delete_fraction = 0.15;  // edges removed (skipping cut edges)
    bool directed = false;       // directed nets get asymmetric reverse arcs
    uint64_t seed = 1;
};

RoadNetwork generate_network(const SynthConfig& cfg);

/// Writes the two parser-compatible text files for a network.
void write_network_files(const RoadNetwork& net, const std::string& coord_path,
                         const std::string& edge_path);

}  // namespace pirpath
