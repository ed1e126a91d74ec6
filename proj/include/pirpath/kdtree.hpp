#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirpath/graph.hpp"

namespace pirpath {

class CapacityError : public std::exception {
public:
    CapacityError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

class OutOfBoundsError : public std::exception {
public:
    OutOfBoundsError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

struct PartitionConfig {
    uint32_t page_size_bytes = 4096;
    uint32_t cluster_pages = 1;  // pages allocated per region (PI*: k, AF: pages-per-region)
};

struct Rect {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    bool contains(Coord p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

constexpr uint32_t kGroupHeaderBytes = 2;  // record count at the start of each page group

/// Space partition over the network, built with the byte-packing split rule
/// so every region's records fill its page group up to at most z slack.
struct PackedKdTree {
    struct Internal {
        uint8_t axis;  // 0 = X, 1 = Y
        double split;  // points with coord >= split belong to the right side
        int32_t left = -1, right = -1;
        bool left_is_leaf = false, right_is_leaf = false;
    };
    struct Leaf {
        uint32_t region_id;
        Rect rect;
        std::vector<uint32_t> members;  // dense node indices, ascending
        uint32_t first_page_in_fd;
        uint32_t payload_bytes;  // serialized member records, excl. group header
    };

    Rect bounds;
    std::vector<Internal> internals;  // preorder
    std::vector<Leaf> leaves;         // left-to-right, region_id == position
    int32_t root = 0;
    bool root_is_leaf = false;
    uint32_t page_size_bytes = 0;
    uint32_t cluster_pages = 1;
    uint32_t max_record_bytes = 0;  // z
    uint32_t group_capacity = 0;    // cluster_pages * page_size - group header

    uint32_t region_count() const { return static_cast<uint32_t>(leaves.size()); }
    uint32_t locate_region(Coord p) const;
    /// Region of every network node (leaf membership).
    std::vector<uint32_t> node_regions(size_t node_count) const;
};

PackedKdTree build_packed_kdtree(const RoadNetwork& net, const PartitionConfig& cfg,
                                 const std::vector<uint32_t>& record_bytes);

/// The cut position of a packing split over a `total`-byte stream: the
/// smallest 2^i * (capacity - z) at or right of the middle byte.
uint64_t packing_cut_bytes(uint64_t total, uint64_t capacity, uint64_t z);

struct BorderNode {
    uint32_t node_index;  // dense index in the augmented network
    EdgeId host_edge;     // original edge
    Coord position;
    double param;  // position along the host edge, in (0,1)
    std::vector<uint32_t> incident_regions;
};

constexpr uint32_t kNoRegion = 0xFFFFFFFFu;

/// Original network plus synthetic border nodes at every edge/split-line
/// intersection. Border nodes take part in precomputation only; they are
/// never persisted.
struct AugmentedNetwork {
    RoadNetwork net;
    size_t real_node_count = 0;
    std::vector<BorderNode> borders;
    std::vector<uint32_t> node_region;  // per dense index; kNoRegion for border nodes
    std::vector<EdgeId> origin_edge;    // augmented edge id -> original edge id

    bool is_border(uint32_t index) const { return index >= real_node_count; }
};

AugmentedNetwork extract_border_nodes(const RoadNetwork& net, const PackedKdTree& tree);

}  // namespace pirpath
