#include "pirpath/precompute.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pirpath {

RegionPair normalize_pair(uint32_t i, uint32_t j, bool directed) {
    if (!directed && j < i) std::swap(i, j);
    return {i, j};
}

std::vector<RegionPair> region_pair_keys(uint32_t region_count, bool directed) {
    std::vector<RegionPair> keys;
    for (uint32_t i = 0; i < region_count; ++i)
        for (uint32_t j = directed ? 0 : i; j < region_count; ++j) keys.push_back({i, j});
    return keys;
}

uint64_t pair_rank(uint32_t i, uint32_t j, uint32_t region_count, bool directed) {
    uint64_t R = region_count;
    if (directed) return uint64_t(i) * R + j;
    // row i starts after R + (R-1) + ... + (R-i+1) entries
    return uint64_t(i) * R - uint64_t(i) * (i - 1) / 2 + (j - i);
}

namespace {

/// Multiset of the regions of real nodes on the current tree path, with O(1)
/// enumeration of the distinct regions present.
class RegionStack {
public:
    explicit RegionStack(uint32_t region_count) : cnt_(region_count, 0), pos_(region_count, 0) {}

    void push(uint32_t r) {
        if (cnt_[r]++ == 0) {
            pos_[r] = static_cast<uint32_t>(active_.size());
            active_.push_back(r);
        }
    }
    void pop(uint32_t r) {
        if (--cnt_[r] == 0) {
            uint32_t last = active_.back();
            active_[pos_[r]] = last;
            pos_[last] = pos_[r];
            active_.pop_back();
        }
    }
    const std::vector<uint32_t>& active() const { return active_; }

private:
    std::vector<uint32_t> cnt_;
    std::vector<uint32_t> pos_;
    std::vector<uint32_t> active_;
};

std::vector<std::vector<uint32_t>> tree_children(const ShortestPathTree& t) {
    std::vector<std::vector<uint32_t>> children(t.dist.size());
    for (uint32_t u = 0; u < t.dist.size(); ++u)
        if (t.pred_node[u] >= 0) children[t.pred_node[u]].push_back(u);
    return children;
}

}  // namespace

std::map<RegionPair, RegionSet> compute_region_sets(const AugmentedNetwork& aug,
                                                    const PackedKdTree& tree) {
    bool directed = aug.net.directed;
    std::map<RegionPair, std::set<uint32_t>> acc;
    for (RegionPair key : region_pair_keys(tree.region_count(), directed)) acc[key];

    for (const BorderNode& src : aug.borders) {
        ShortestPathTree spt = dijkstra_tree(aug.net, src.node_index);
        auto children = tree_children(spt);

        // walk the shortest-path tree, maintaining the regions of the real
        // nodes on the path from the source; every border node reached is a
        // border-pair endpoint and records the regions currently crossed
        RegionStack regions(tree.region_count());
        std::vector<std::pair<uint32_t, size_t>> stack{{src.node_index, 0}};
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next == 0) {  // first visit
                if (!aug.is_border(u)) regions.push(aug.node_region[u]);
                if (aug.is_border(u) && u != src.node_index) {
                    const BorderNode& dst = aug.borders[u - aug.real_node_count];
                    for (uint32_t i : src.incident_regions)
                        for (uint32_t j : dst.incident_regions) {
                            auto& members = acc[normalize_pair(i, j, directed)];
                            for (uint32_t r : regions.active())
                                if (r != i && r != j) members.insert(r);
                        }
                }
            }
            if (next < children[u].size()) {
                stack.push_back({children[u][next++], 0});
            } else {
                if (!aug.is_border(u)) regions.pop(aug.node_region[u]);
                stack.pop_back();
            }
        }
    }

    std::map<RegionPair, RegionSet> out;
    for (auto& [key, members] : acc)
        out[key] = RegionSet{std::vector<uint32_t>(members.begin(), members.end())};
    return out;
}

std::map<RegionPair, PassageSubgraph> compute_passage_subgraphs(const AugmentedNetwork& aug,
                                                                const PackedKdTree& tree) {
    bool directed = aug.net.directed;
    std::map<RegionPair, std::set<EdgeId>> acc;
    for (RegionPair key : region_pair_keys(tree.region_count(), directed)) acc[key];

    for (const BorderNode& src : aug.borders) {
        ShortestPathTree spt = dijkstra_tree(aug.net, src.node_index);
        for (const BorderNode& dst : aug.borders) {
            if (dst.node_index == src.node_index) continue;
            if (spt.dist[dst.node_index] >= kInfiniteCost) continue;
            // path edges mapped back to their original edges; the partial
            // edges at the border endpoints widen to the full original edge
            std::vector<EdgeId> origin;
            for (uint32_t u = dst.node_index; u != src.node_index;
                 u = static_cast<uint32_t>(spt.pred_node[u]))
                origin.push_back(aug.origin_edge[spt.pred_edge[u]]);
            std::sort(origin.begin(), origin.end());
            origin.erase(std::unique(origin.begin(), origin.end()), origin.end());
            for (uint32_t i : src.incident_regions)
                for (uint32_t j : dst.incident_regions)
                    acc[normalize_pair(i, j, directed)].insert(origin.begin(), origin.end());
        }
    }

    std::map<RegionPair, PassageSubgraph> out;
    for (auto& [key, edges] : acc)
        out[key] = PassageSubgraph{std::vector<EdgeId>(edges.begin(), edges.end())};
    return out;
}

std::map<RegionPair, HybridChoice> hy_replace(const std::map<RegionPair, RegionSet>& sets,
                                              const std::map<RegionPair, PassageSubgraph>& graphs,
                                              uint64_t threshold) {
    std::map<RegionPair, HybridChoice> out;
    for (const auto& [key, set] : sets) {
        HybridChoice choice;
        if (set.members.size() > threshold) {
            choice.use_subgraph = true;
            choice.graph = graphs.at(key);
        } else {
            choice.set = set;
        }
        out[key] = std::move(choice);
    }
    return out;
}

Landmarks compute_landmarks(const RoadNetwork& net, uint32_t anchor_count) {
    size_t n = net.node_count();
    anchor_count = static_cast<uint32_t>(std::min<size_t>(anchor_count, n));
    RoadNetwork rev = reverse(net);  // distances *to* an anchor

    Landmarks lm;
    lm.costs.assign(n, std::vector<double>(anchor_count, kInfiniteCost));
    std::vector<double> nearest(n, kInfiniteCost);
    uint32_t next = 0;  // farthest-point greedy, seeded at the smallest id
    for (uint32_t a = 0; a < anchor_count; ++a) {
        lm.anchors.push_back(next);
        ShortestPathTree t = dijkstra_tree(rev, next);
        for (uint32_t u = 0; u < n; ++u) {
            lm.costs[u][a] = t.dist[u];
            nearest[u] = std::min(nearest[u], t.dist[u]);
        }
        next = 0;
        for (uint32_t u = 1; u < n; ++u)
            if (nearest[u] > nearest[next]) next = u;
    }
    return lm;
}

namespace {

bool on_shortest_path(double du, double w, double dv) {
    if (du >= kInfiniteCost || dv >= kInfiniteCost) return false;
    return std::abs(du - (w + dv)) <= 1e-9 * std::max(1.0, du);
}

}  // namespace

std::vector<std::vector<uint8_t>> compute_arcflags(const RoadNetwork& net,
                                                   const std::vector<uint32_t>& node_region,
                                                   uint32_t region_count) {
    size_t n = net.node_count();
    uint32_t width = arcflag_bytes(region_count);
    std::vector<std::vector<uint8_t>> flags(n);
    for (uint32_t u = 0; u < n; ++u) flags[u].assign(net.adjacency[u].size() * width, 0);

    auto set_bit = [&](uint32_t u, size_t arc, uint32_t region) {
        flags[u][arc * width + region / 8] |= uint8_t(1u << (region % 8));
    };

    RoadNetwork rev = reverse(net);
    // boundary nodes: members of a region with an incoming arc from outside
    std::vector<std::vector<uint32_t>> boundary(region_count);
    for (uint32_t u = 0; u < n; ++u)
        for (const auto& arc : net.adjacency[u])
            if (node_region[arc.target] != node_region[u]) {
                auto& b = boundary[node_region[arc.target]];
                if (b.empty() || b.back() != arc.target) b.push_back(arc.target);
            }
    for (auto& b : boundary) {
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }

    for (uint32_t region = 0; region < region_count; ++region) {
        for (uint32_t entry : boundary[region]) {
            ShortestPathTree t = dijkstra_tree(rev, entry);  // dist[x] = cost x -> entry
            for (uint32_t u = 0; u < n; ++u)
                for (size_t a = 0; a < net.adjacency[u].size(); ++a) {
                    const auto& arc = net.adjacency[u][a];
                    if (on_shortest_path(t.dist[u], arc.weight, t.dist[arc.target]))
                        set_bit(u, a, region);
                }
        }
        // arcs interior to the region always serve intra-region targets
        for (uint32_t u = 0; u < n; ++u) {
            if (node_region[u] != region) continue;
            for (size_t a = 0; a < net.adjacency[u].size(); ++a)
                if (node_region[net.adjacency[u][a].target] == region) set_bit(u, a, region);
        }
    }
    return flags;
}

uint64_t max_set_cardinality(const std::map<RegionPair, RegionSet>& sets) {
    uint64_t m = 0;
    for (const auto& [key, set] : sets) m = std::max<uint64_t>(m, set.members.size());
    return m;
}

double restricted_cost(const RoadNetwork& net, const std::vector<uint32_t>& node_region,
                       uint32_t i, uint32_t j, std::span<const uint32_t> extra, uint32_t s,
                       uint32_t t) {
    std::vector<char> allowed(net.node_count(), 0);
    for (uint32_t u = 0; u < net.node_count(); ++u) {
        uint32_t r = node_region[u];
        allowed[u] = (r == i || r == j || std::find(extra.begin(), extra.end(), r) != extra.end());
    }
    auto path = dijkstra_restricted(net, allowed, s, t);
    return path ? path->total_cost : kInfiniteCost;
}

}  // namespace pirpath
