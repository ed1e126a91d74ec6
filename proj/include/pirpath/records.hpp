#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pirpath/bytes.hpp"
#include "pirpath/graph.hpp"

namespace pirpath {

/// Fixed serialization of one node's region-data record:
///   nodeId u32, x f64, y f64, degree u16,
///   per neighbor: targetId u32 [, targetRegion u32] [, flags], weight f64,
///   then anchor_count shortest-path costs (f64).
/// The base layout (no options) is what CI/PI/HY/PI* store; LM adds the
/// anchor costs and neighbor regions, AF adds neighbor regions and per-arc
/// flag bytes.
struct RecordLayout {
    bool neighbor_region = false;
    uint16_t anchor_count = 0;
    uint16_t flag_bytes = 0;

    uint32_t arc_bytes() const {
        return 4 + (neighbor_region ? 4u : 0u) + flag_bytes + 8;
    }
    uint32_t record_bytes(uint32_t degree) const {
        return 4 + 8 + 8 + 2 + degree * arc_bytes() + anchor_count * 8u;
    }
};

struct DecodedArc {
    NodeId target_id;
    uint32_t target_region = 0;
    std::vector<uint8_t> flags;
    double weight;
};

struct DecodedNode {
    NodeId id;
    Coord position;
    std::vector<DecodedArc> arcs;
    std::vector<double> anchor_costs;
};

/// Per-node serialized sizes for the packing arithmetic.
std::vector<uint32_t> record_sizes(const RoadNetwork& net, const RecordLayout& layout);

struct RecordExtras {
    // node dense index -> anchor costs (layout.anchor_count each), may be empty
    const std::vector<std::vector<double>>* anchor_costs = nullptr;
    // node dense index -> region, required when layout.neighbor_region
    const std::vector<uint32_t>* node_region = nullptr;
    // adjacency-parallel flag bytes: flags[node][arc*flag_bytes + k]
    const std::vector<std::vector<uint8_t>>* arc_flags = nullptr;
};

void encode_record(const RoadNetwork& net, uint32_t node, const RecordLayout& layout,
                   const RecordExtras& extras, std::vector<uint8_t>& out);

DecodedNode decode_record(ByteReader& r, const RecordLayout& layout);

}  // namespace pirpath
