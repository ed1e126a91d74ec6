#include "pirpath/records.hpp"

#include <stdexcept>

namespace pirpath {

std::vector<uint32_t> record_sizes(const RoadNetwork& net, const RecordLayout& layout) {
    std::vector<uint32_t> sizes(net.node_count());
    for (size_t i = 0; i < net.node_count(); ++i)
        sizes[i] = layout.record_bytes(static_cast<uint32_t>(net.adjacency[i].size()));
    return sizes;
}

void encode_record(const RoadNetwork& net, uint32_t node, const RecordLayout& layout,
                   const RecordExtras& extras, std::vector<uint8_t>& out) {
    ByteWriter w(out);
    w.u32(net.node_ids[node]);
    w.f64(net.coords[node].x);
    w.f64(net.coords[node].y);
    const auto& arcs = net.adjacency[node];
    w.u16(static_cast<uint16_t>(arcs.size()));
    for (size_t a = 0; a < arcs.size(); ++a) {
        w.u32(net.node_ids[arcs[a].target]);
        if (layout.neighbor_region) w.u32((*extras.node_region)[arcs[a].target]);
        if (layout.flag_bytes > 0) {
            const auto& flags = (*extras.arc_flags)[node];
            w.bytes(flags.data() + a * layout.flag_bytes, layout.flag_bytes);
        }
        w.f64(arcs[a].weight);
    }
    if (layout.anchor_count > 0) {
        const auto& vec = (*extras.anchor_costs)[node];
        for (uint16_t k = 0; k < layout.anchor_count; ++k) w.f64(vec[k]);
    }
}

DecodedNode decode_record(ByteReader& r, const RecordLayout& layout) {
    DecodedNode n;
    n.id = r.u32();
    n.position.x = r.f64();
    n.position.y = r.f64();
    uint16_t degree = r.u16();
    n.arcs.resize(degree);
    for (auto& arc : n.arcs) {
        arc.target_id = r.u32();
        if (layout.neighbor_region) arc.target_region = r.u32();
        if (layout.flag_bytes > 0) {
            auto s = r.take(layout.flag_bytes);
            arc.flags.assign(s.begin(), s.end());
        }
        arc.weight = r.f64();
    }
    n.anchor_costs.resize(layout.anchor_count);
    for (auto& c : n.anchor_costs) c = r.f64();
    return n;
}

}  // namespace pirpath
