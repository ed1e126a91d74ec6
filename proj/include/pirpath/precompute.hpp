#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "pirpath/kdtree.hpp"

namespace pirpath {

using RegionPair = std::pair<uint32_t, uint32_t>;

/// Intermediate regions crossed by some border-pair shortest path between the
/// key's two regions. The endpoints' own regions are never members.
struct RegionSet {
    std::vector<uint32_t> members;  // ascending
    bool operator==(const RegionSet&) const = default;
};

/// Original edges appearing in some border-pair shortest path between the
/// key's two regions. Border-incident sub-edges are widened to their full
/// original edge, so the subgraph mentions real nodes only.
struct PassageSubgraph {
    std::vector<EdgeId> edges;  // ascending original edge ids
    bool operator==(const PassageSubgraph&) const = default;
};

/// Undirected networks keep one key per unordered pair (i <= j); directed
/// networks keep both orders. Both cases include i == j.
RegionPair normalize_pair(uint32_t i, uint32_t j, bool directed);
std::vector<RegionPair> region_pair_keys(uint32_t region_count, bool directed);
uint64_t pair_rank(uint32_t i, uint32_t j, uint32_t region_count, bool directed);

std::map<RegionPair, RegionSet> compute_region_sets(const AugmentedNetwork& aug,
                                                    const PackedKdTree& tree);

std::map<RegionPair, PassageSubgraph> compute_passage_subgraphs(const AugmentedNetwork& aug,
                                                                const PackedKdTree& tree);

/// One entry of the hybrid index: the region set if it was small enough,
/// otherwise its passage-subgraph replacement.
struct HybridChoice {
    bool use_subgraph = false;
    RegionSet set;
    PassageSubgraph graph;
    bool operator==(const HybridChoice&) const = default;
};

std::map<RegionPair, HybridChoice> hy_replace(const std::map<RegionPair, RegionSet>& sets,
                                              const std::map<RegionPair, PassageSubgraph>& graphs,
                                              uint64_t threshold);

/// Anchor nodes plus, for every node, its exact shortest-path cost to each
/// anchor (infinity sentinel when unreachable). Anchors are picked by
/// farthest-point greedy seeded at the smallest-id node.
struct Landmarks {
    std::vector<uint32_t> anchors;            // dense node indices
    std::vector<std::vector<double>> costs;   // [node][anchor]
};

Landmarks compute_landmarks(const RoadNetwork& net, uint32_t anchor_count);

/// Per-node, adjacency-parallel flag bytes: bit R of arc (u,v) is set when
/// the arc lies on some shortest path ending in region R. Built from reverse
/// shortest-path trees rooted at each region's boundary nodes; arcs interior
/// to a region always carry their own region's bit.
std::vector<std::vector<uint8_t>> compute_arcflags(const RoadNetwork& net,
                                                   const std::vector<uint32_t>& node_region,
                                                   uint32_t region_count);

inline uint32_t arcflag_bytes(uint32_t region_count) { return (region_count + 7) / 8; }

/// Query-plan constants: m = max region-set cardinality, h = max page span of
/// any subgraph entry, r = max page span of any surviving region set.
struct PlanConstants {
    uint64_t m = 0;
    uint64_t h = 0;
    uint64_t r = 0;
};

uint64_t max_set_cardinality(const std::map<RegionPair, RegionSet>& sets);

/// Shortest-path cost between s and t using only nodes whose region is i, j
/// or listed in extra. The covering property promises this equals the global
/// cost whenever extra = S_{region(s),region(t)}.
double restricted_cost(const RoadNetwork& net, const std::vector<uint32_t>& node_region,
                       uint32_t i, uint32_t j, std::span<const uint32_t> extra, uint32_t s,
                       uint32_t t);

}  // namespace pirpath
