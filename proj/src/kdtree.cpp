#include "pirpath/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace pirpath {

namespace {

double coord_axis(const Coord& c, int axis) { return axis == 0 ? c.x : c.y; }

struct Item {
    uint32_t node;
    uint32_t size;
};

struct ChildRef {
    int32_t index = -1;
    bool is_leaf = false;
};

struct Builder {
    const RoadNetwork& net;
    PackedKdTree& tree;
    uint64_t capacity;  // usable bytes per page group
    uint64_t z;

    // Streams at or below this many bytes are packed by the exact slab
    // partition; above it, recursive cuts only need to keep both sides
    // packable and the shape stays quadrant-like.
    uint64_t slab_threshold() const { return 8 * capacity; }

    double item_coord(const Item& it, int axis) const {
        return coord_axis(net.coords[it.node], axis);
    }

    void sort_items(std::vector<Item>& items, int axis) const {
        std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
            double ca = item_coord(a, axis), cb = item_coord(b, axis);
            if (ca != cb) return ca < cb;
            double oa = item_coord(a, 1 - axis), ob = item_coord(b, 1 - axis);
            if (oa != ob) return oa < ob;
            return a.node < b.node;
        });
    }

    // Cut positions where the sort coordinate strictly increases; a cut here
    // yields a geometric split line between two distinct coordinate values.
    struct Boundary {
        size_t item_index;   // first item on the right side
        uint64_t cum_bytes;  // bytes before it
        double split_coord;  // midpoint between the adjacent coordinate values
    };

    std::vector<Boundary> boundaries(const std::vector<Item>& items, int axis) const {
        std::vector<Boundary> out;
        uint64_t cum = 0;
        for (size_t i = 1; i < items.size(); ++i) {
            cum += items[i - 1].size;
            double prev = item_coord(items[i - 1], axis);
            double next = item_coord(items[i], axis);
            if (next > prev) out.push_back({i, cum, (prev + next) / 2.0});
        }
        return out;
    }

    static uint64_t total_bytes(const std::vector<Item>& items) {
        uint64_t t = 0;
        for (const Item& it : items) t += it.size;
        return t;
    }

    ChildRef make_leaf(const std::vector<Item>& items, const Rect& rect) {
        PackedKdTree::Leaf leaf;
        leaf.rect = rect;
        leaf.payload_bytes = static_cast<uint32_t>(total_bytes(items));
        leaf.members.reserve(items.size());
        for (const Item& it : items) leaf.members.push_back(it.node);
        std::sort(leaf.members.begin(), leaf.members.end());
        tree.leaves.push_back(std::move(leaf));
        return {static_cast<int32_t>(tree.leaves.size() - 1), true};
    }

    static void split_at(const std::vector<Item>& items, size_t first_right,
                         std::vector<Item>& left, std::vector<Item>& right) {
        left.assign(items.begin(), items.begin() + first_right);
        right.assign(items.begin() + first_right, items.end());
    }

    int32_t new_internal(int axis, double split) {
        int32_t slot = static_cast<int32_t>(tree.internals.size());
        tree.internals.push_back({});
        tree.internals[slot].axis = static_cast<uint8_t>(axis);
        tree.internals[slot].split = split;
        return slot;
    }

    static void child_rects(const Rect& rect, int axis, double split, Rect& lrect, Rect& rrect) {
        lrect = rect;
        rrect = rect;
        if (axis == 0) {
            lrect.xmax = split;
            rrect.xmin = split;
        } else {
            lrect.ymax = split;
            rrect.ymin = split;
        }
    }

    // --- exact slab partition -------------------------------------------

    // Best worst-leaf fill over every prefix of the run stream `pre`
    // (cumulative byte counts, pre[0] == 0), with each leaf capped at the
    // group capacity. fill[k] == 0 means the first k runs cannot be packed.
    void slab_fill(const std::vector<uint64_t>& pre, std::vector<uint64_t>& fill,
                   std::vector<size_t>& from) const {
        const size_t n = pre.size() - 1;
        fill.assign(n + 1, 0);
        from.assign(n + 1, 0);
        fill[0] = std::numeric_limits<uint64_t>::max();
        for (size_t k = 1; k <= n; ++k) {
            for (size_t j = k; j-- > 0;) {
                uint64_t run = pre[k] - pre[j];
                if (run > capacity) break;  // smaller j only grows the run
                uint64_t worst = std::min(fill[j], run);
                if (fill[j] > 0 && worst > fill[k]) {
                    fill[k] = worst;
                    from[k] = j;
                }
            }
        }
    }

    struct SlabPlan {
        int axis = 0;
        uint64_t min_fill = 0;                 // 0: not packable on this axis
        std::vector<Item> sorted;              // items in slab order
        std::vector<Boundary> bs;
        std::vector<size_t> leaf_end_run;      // run index ending each leaf, ascending
    };

    // Optimal contiguous partition of the stream along `axis` into leaves of
    // at most `capacity` bytes, maximizing the least-filled leaf.
    SlabPlan plan_slabs(const std::vector<Item>& items, int axis) const {
        SlabPlan plan;
        plan.axis = axis;
        plan.sorted = items;
        sort_items(plan.sorted, axis);
        plan.bs = boundaries(plan.sorted, axis);
        uint64_t total = total_bytes(plan.sorted);

        std::vector<uint64_t> pre;
        pre.push_back(0);
        for (const Boundary& b : plan.bs) pre.push_back(b.cum_bytes);
        pre.push_back(total);

        std::vector<uint64_t> fill;
        std::vector<size_t> from;
        slab_fill(pre, fill, from);
        const size_t n = pre.size() - 1;
        if (fill[n] == 0) return plan;
        plan.min_fill = fill[n];
        for (size_t k = n; k > 0; k = from[k]) plan.leaf_end_run.push_back(k);
        std::reverse(plan.leaf_end_run.begin(), plan.leaf_end_run.end());
        return plan;
    }

    // Emits the slab plan as a right-leaning chain of internals.
    ChildRef emit_slabs(const SlabPlan& plan, const Rect& rect) {
        ChildRef result{-1, false};
        int32_t pending = -1;  // internal slot awaiting its right child
        Rect remaining = rect;
        size_t first_item = 0;
        auto attach = [&](ChildRef child) {
            if (pending < 0) {
                result = child;
            } else {
                tree.internals[pending].right = child.index;
                tree.internals[pending].right_is_leaf = child.is_leaf;
            }
        };
        for (size_t s = 0; s < plan.leaf_end_run.size(); ++s) {
            bool last = s + 1 == plan.leaf_end_run.size();
            if (last) {
                std::vector<Item> slab(plan.sorted.begin() + first_item, plan.sorted.end());
                attach(make_leaf(slab, remaining));
                break;
            }
            size_t end_item = plan.bs[plan.leaf_end_run[s] - 1].item_index;
            double split = plan.bs[plan.leaf_end_run[s] - 1].split_coord;
            Rect lrect, rrect;
            child_rects(remaining, plan.axis, split, lrect, rrect);
            int32_t slot = new_internal(plan.axis, split);
            std::vector<Item> slab(plan.sorted.begin() + first_item,
                                   plan.sorted.begin() + end_item);
            ChildRef leaf = make_leaf(slab, lrect);
            tree.internals[slot].left = leaf.index;
            tree.internals[slot].left_is_leaf = true;
            attach({slot, false});
            pending = slot;
            remaining = rrect;
            first_item = end_item;
        }
        return result;
    }

    // Packs a small stream with the exact slab partition, taking whichever
    // axis fills its worst leaf better.
    ChildRef slabs(const std::vector<Item>& items, int axis, const Rect& rect) {
        SlabPlan first = plan_slabs(items, axis);
        SlabPlan second = plan_slabs(items, 1 - axis);
        const SlabPlan& best = second.min_fill > first.min_fill ? second : first;
        if (best.min_fill == 0)
            throw CapacityError("coincident nodes exceed the page group capacity (node id " +
                                std::to_string(net.node_ids[items.front().node]) + ")");
        return emit_slabs(best, rect);
    }

    // Cumulative byte counts at every cut position: pre[0] == 0, one entry
    // per boundary, pre.back() == the stream total.
    std::vector<uint64_t> prefix_sums(const std::vector<Boundary>& bs, uint64_t total) const {
        std::vector<uint64_t> pre;
        pre.reserve(bs.size() + 2);
        pre.push_back(0);
        for (const Boundary& b : bs) pre.push_back(b.cum_bytes);
        pre.push_back(total);
        return pre;
    }

    // ok[k]: the first pre[k] bytes split into groups of capacity - z to
    // capacity bytes each (every group full to within z). Sliding-window
    // count of reachable predecessors keeps the scan linear.
    std::vector<uint8_t> prefix_perfect(const std::vector<uint64_t>& pre) const {
        const size_t n = pre.size();
        const uint64_t lo = capacity > z ? capacity - z : 1;
        std::vector<uint8_t> ok(n, 0);
        ok[0] = 1;
        size_t jlo = 0, jhi = 0, reachable = 0;
        for (size_t k = 1; k < n; ++k) {
            while (jhi < k && pre[jhi] + lo <= pre[k]) reachable += ok[jhi++];
            while (jlo < jhi && pre[jlo] + capacity < pre[k]) reachable -= ok[jlo++];
            ok[k] = reachable > 0;
        }
        return ok;
    }

    // ok[k]: the bytes after pre[k] split into full-to-within-z groups.
    std::vector<uint8_t> suffix_perfect(const std::vector<uint64_t>& pre) const {
        const size_t n = pre.size();
        const uint64_t total = pre.back();
        std::vector<uint64_t> rev(n);
        for (size_t i = 0; i < n; ++i) rev[i] = total - pre[n - 1 - i];
        std::vector<uint8_t> rok = prefix_perfect(rev);
        std::vector<uint8_t> ok(n);
        for (size_t i = 0; i < n; ++i) ok[i] = rok[n - 1 - i];
        return ok;
    }

    // --- recursive splits -------------------------------------------------

    // Subdivides a stream larger than the slab threshold near its middle
    // byte, preferring cuts whose sides can still be packed to within z of
    // full; small streams go straight to the exact slab partition.
    ChildRef balanced(std::vector<Item>& items, int axis, const Rect& rect) {
        uint64_t total = total_bytes(items);
        if (total <= capacity) return make_leaf(items, rect);
        if (total <= slab_threshold()) return slabs(items, axis, rect);
        auto emit = [&](int a, const Boundary& b) -> ChildRef {
            std::vector<Item> left, right;
            split_at(items, b.item_index, left, right);
            Rect lrect, rrect;
            child_rects(rect, a, b.split_coord, lrect, rrect);
            int32_t slot = new_internal(a, b.split_coord);
            ChildRef l = balanced(left, 1 - a, lrect);
            ChildRef r = balanced(right, 1 - a, rrect);
            tree.internals[slot].left = l.index;
            tree.internals[slot].left_is_leaf = l.is_leaf;
            tree.internals[slot].right = r.index;
            tree.internals[slot].right_is_leaf = r.is_leaf;
            return {slot, false};
        };
        Boundary fallback{};
        int fallback_axis = axis;
        bool have_fallback = false;
        uint64_t middle = (total + 1) / 2;
        auto distance = [&](const Boundary& b) {
            return b.cum_bytes > middle ? b.cum_bytes - middle : middle - b.cum_bytes;
        };
        for (int attempt = 0; attempt < 2; ++attempt) {
            int a = attempt == 0 ? axis : 1 - axis;
            sort_items(items, a);
            auto bs = boundaries(items, a);
            if (bs.empty()) continue;
            if (!have_fallback) {
                fallback = *std::min_element(bs.begin(), bs.end(),
                                             [&](const Boundary& x, const Boundary& y) {
                                                 return distance(x) < distance(y);
                                             });
                fallback_axis = a;
                have_fallback = true;
            }
            auto pre = prefix_sums(bs, total);
            auto left_ok = prefix_perfect(pre);
            auto right_ok = suffix_perfect(pre);
            const Boundary* best = nullptr;
            for (size_t i = 0; i < bs.size(); ++i) {
                if (!left_ok[i + 1] || !right_ok[i + 1]) continue;
                if (!best || distance(bs[i]) < distance(*best)) best = &bs[i];
            }
            if (best) return emit(a, *best);
        }
        if (have_fallback) {
            // no cut on either axis leaves both sides packable to within z of
            // full (coincident coordinates leave too few boundaries); take the
            // most balanced one and pack best-effort
            sort_items(items, fallback_axis);
            return emit(fallback_axis, fallback);
        }
        throw CapacityError("coincident nodes exceed the page group capacity (node id " +
                            std::to_string(net.node_ids[items.front().node]) + ")");
    }

    // Packing split: cut the sorted byte stream at the smallest
    // 2^i * (capacity - z) at or right of the middle byte (straddling record
    // and its coordinate tie-group pushed left); the left side is subdivided
    // by balanced(), the right side repeats the packing split on the
    // alternate axis. The snap steps right to the nearest cut whose left side
    // splits into full-to-within-z groups, so only the rightmost leaf of the
    // whole tree can stay underfull.
    ChildRef pack(std::vector<Item>& items, int axis, const Rect& rect) {
        uint64_t total = total_bytes(items);
        if (total <= capacity) return make_leaf(items, rect);
        for (int attempt = 0; attempt < 2; ++attempt) {
            int a = attempt == 0 ? axis : 1 - axis;
            sort_items(items, a);
            auto bs = boundaries(items, a);
            if (bs.empty()) continue;
            uint64_t cut = packing_cut_bytes(total, capacity, z);
            size_t first_candidate = bs.size();
            for (size_t i = 0; i < bs.size(); ++i)
                if (bs[i].cum_bytes >= cut) {
                    first_candidate = i;
                    break;
                }
            const Boundary* chosen = nullptr;
            if (first_candidate == bs.size()) {
                chosen = &bs.back();  // no boundary at or past the cut
            } else {
                auto pre = prefix_sums(bs, total);
                auto left_ok = prefix_perfect(pre);
                for (size_t i = first_candidate; i < bs.size(); ++i)
                    if (left_ok[i + 1]) {
                        chosen = &bs[i];
                        break;
                    }
                if (!chosen) chosen = &bs[first_candidate];
            }
            std::vector<Item> left, right;
            split_at(items, chosen->item_index, left, right);
            Rect lrect, rrect;
            child_rects(rect, a, chosen->split_coord, lrect, rrect);
            int32_t slot = new_internal(a, chosen->split_coord);
            ChildRef l = balanced(left, 1 - a, lrect);
            ChildRef r = pack(right, 1 - a, rrect);
            tree.internals[slot].left = l.index;
            tree.internals[slot].left_is_leaf = l.is_leaf;
            tree.internals[slot].right = r.index;
            tree.internals[slot].right_is_leaf = r.is_leaf;
            return {slot, false};
        }
        throw CapacityError("coincident nodes exceed the page group capacity (node id " +
                            std::to_string(net.node_ids[items.front().node]) + ")");
    }
};

}  // namespace

uint64_t packing_cut_bytes(uint64_t total, uint64_t capacity, uint64_t z) {
    uint64_t unit = capacity > z ? capacity - z : 1;
    uint64_t cut = unit;
    while (cut * 2 < total) cut *= 2;
    return cut;
}

PackedKdTree build_packed_kdtree(const RoadNetwork& net, const PartitionConfig& cfg,
                                 const std::vector<uint32_t>& record_bytes) {
    PackedKdTree tree;
    tree.page_size_bytes = cfg.page_size_bytes;
    tree.cluster_pages = cfg.cluster_pages;
    uint64_t group_bytes = static_cast<uint64_t>(cfg.page_size_bytes) * cfg.cluster_pages;
    if (group_bytes <= kGroupHeaderBytes) throw CapacityError("page group too small");
    tree.group_capacity = static_cast<uint32_t>(group_bytes - kGroupHeaderBytes);

    uint32_t z = 0;
    for (size_t i = 0; i < record_bytes.size(); ++i) {
        if (record_bytes[i] > tree.group_capacity)
            throw CapacityError("node record exceeds the page group capacity (node id " +
                                std::to_string(net.node_ids[i]) + ")");
        z = std::max(z, record_bytes[i]);
    }
    tree.max_record_bytes = z;

    Rect bounds;
    bounds.xmin = bounds.ymin = std::numeric_limits<double>::infinity();
    bounds.xmax = bounds.ymax = -std::numeric_limits<double>::infinity();
    for (const Coord& c : net.coords) {
        bounds.xmin = std::min(bounds.xmin, c.x);
        bounds.xmax = std::max(bounds.xmax, c.x);
        bounds.ymin = std::min(bounds.ymin, c.y);
        bounds.ymax = std::max(bounds.ymax, c.y);
    }
    tree.bounds = bounds;

    std::vector<Item> items(net.node_count());
    for (uint32_t i = 0; i < net.node_count(); ++i) items[i] = {i, record_bytes[i]};

    Builder builder{net, tree, tree.group_capacity, z};
    ChildRef root = builder.pack(items, /*axis=*/0, bounds);
    tree.root = root.index;
    tree.root_is_leaf = root.is_leaf;

    for (uint32_t r = 0; r < tree.leaves.size(); ++r) {
        tree.leaves[r].region_id = r;
        tree.leaves[r].first_page_in_fd = r * cfg.cluster_pages;
    }
    return tree;
}

uint32_t PackedKdTree::locate_region(Coord p) const {
    if (!bounds.contains(p))
        throw OutOfBoundsError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                               ") outside the partition bounds");
    if (root_is_leaf) return leaves[root].region_id;
    int32_t cur = root;
    while (true) {
        const Internal& n = internals[cur];
        bool right = coord_axis(p, n.axis) >= n.split;
        int32_t next = right ? n.right : n.left;
        bool leaf = right ? n.right_is_leaf : n.left_is_leaf;
        if (leaf) return leaves[next].region_id;
        cur = next;
    }
}

std::vector<uint32_t> PackedKdTree::node_regions(size_t node_count) const {
    std::vector<uint32_t> regions(node_count, kNoRegion);
    for (const Leaf& leaf : leaves)
        for (uint32_t m : leaf.members) regions[m] = leaf.region_id;
    return regions;
}

namespace {

struct Crossing {
    double t;
    Coord point;
    uint32_t less_region, greater_region;
};

uint32_t locate_down(const PackedKdTree& tree, int32_t index, bool is_leaf, Coord p) {
    while (!is_leaf) {
        const PackedKdTree::Internal& n = tree.internals[index];
        bool right = coord_axis(p, n.axis) >= n.split;
        is_leaf = right ? n.right_is_leaf : n.left_is_leaf;
        index = right ? n.right : n.left;
    }
    return tree.leaves[index].region_id;
}

constexpr double kParamEps = 1e-12;

void collect_crossings(const PackedKdTree& tree, int32_t index, bool is_leaf, Coord p0, Coord p1,
                       double t0, double t1, std::vector<Crossing>& out) {
    if (is_leaf) return;
    const PackedKdTree::Internal& n = tree.internals[index];
    double a0 = coord_axis(p0, n.axis);
    double a1 = coord_axis(p1, n.axis);
    double d = a1 - a0;
    auto descend_one_side = [&](double tm) {
        double v = a0 + tm * d;
        bool right = v >= n.split;
        collect_crossings(tree, right ? n.right : n.left, right ? n.right_is_leaf : n.left_is_leaf,
                          p0, p1, t0, t1, out);
    };
    if (d == 0.0) {
        descend_one_side((t0 + t1) / 2.0);
        return;
    }
    double tc = (n.split - a0) / d;
    if (tc <= t0 + kParamEps || tc >= t1 - kParamEps) {
        descend_one_side((t0 + t1) / 2.0);
        return;
    }
    Coord pc{p0.x + tc * (p1.x - p0.x), p0.y + tc * (p1.y - p0.y)};
    Crossing c;
    c.t = tc;
    c.point = pc;
    c.less_region = locate_down(tree, n.left, n.left_is_leaf, pc);
    c.greater_region = locate_down(tree, n.right, n.right_is_leaf, pc);
    out.push_back(c);
    if (d > 0) {
        collect_crossings(tree, n.left, n.left_is_leaf, p0, p1, t0, tc, out);
        collect_crossings(tree, n.right, n.right_is_leaf, p0, p1, tc, t1, out);
    } else {
        collect_crossings(tree, n.right, n.right_is_leaf, p0, p1, t0, tc, out);
        collect_crossings(tree, n.left, n.left_is_leaf, p0, p1, tc, t1, out);
    }
}

}  // namespace

AugmentedNetwork extract_border_nodes(const RoadNetwork& net, const PackedKdTree& tree) {
    AugmentedNetwork aug;
    aug.real_node_count = net.node_count();
    aug.net.directed = net.directed;
    aug.net.node_ids = net.node_ids;
    aug.net.coords = net.coords;

    NodeId next_id = net.node_ids.empty() ? 0 : net.node_ids.back() + 1;

    struct EdgeChain {
        std::vector<uint32_t> nodes;  // from, borders..., to
        std::vector<double> params;   // 0, t..., 1
    };
    std::vector<EdgeChain> chains(net.edge_count());

    for (EdgeId eid = 0; eid < net.edge_count(); ++eid) {
        const auto& e = net.edges[eid];
        Coord p0 = net.coords[e.from], p1 = net.coords[e.to];
        std::vector<Crossing> crossings;
        if (!tree.root_is_leaf)
            collect_crossings(tree, tree.root, false, p0, p1, 0.0, 1.0, crossings);
        std::sort(crossings.begin(), crossings.end(),
                  [](const Crossing& a, const Crossing& b) { return a.t < b.t; });

        EdgeChain& chain = chains[eid];
        chain.nodes.push_back(e.from);
        chain.params.push_back(0.0);
        for (size_t i = 0; i < crossings.size();) {
            size_t j = i;
            std::vector<uint32_t> regions;
            while (j < crossings.size() && crossings[j].t - crossings[i].t <= 1e-9) {
                regions.push_back(crossings[j].less_region);
                regions.push_back(crossings[j].greater_region);
                ++j;
            }
            std::sort(regions.begin(), regions.end());
            regions.erase(std::unique(regions.begin(), regions.end()), regions.end());

            BorderNode bn;
            bn.node_index = static_cast<uint32_t>(aug.net.node_ids.size());
            bn.host_edge = eid;
            bn.param = crossings[i].t;
            bn.position = crossings[i].point;
            bn.incident_regions = std::move(regions);
            aug.net.node_ids.push_back(next_id++);
            aug.net.coords.push_back(crossings[i].point);
            chain.nodes.push_back(bn.node_index);
            chain.params.push_back(bn.param);
            aug.borders.push_back(std::move(bn));
            i = j;
        }
        chain.nodes.push_back(e.to);
        chain.params.push_back(1.0);
    }

    aug.net.adjacency.assign(aug.net.node_ids.size(), {});
    for (EdgeId eid = 0; eid < net.edge_count(); ++eid) {
        const auto& e = net.edges[eid];
        const EdgeChain& chain = chains[eid];
        for (size_t k = 0; k + 1 < chain.nodes.size(); ++k) {
            double w = e.weight * (chain.params[k + 1] - chain.params[k]);
            uint32_t u = chain.nodes[k], v = chain.nodes[k + 1];
            EdgeId sub = static_cast<EdgeId>(aug.net.edges.size());
            aug.net.edges.push_back({u, v, w});
            aug.origin_edge.push_back(eid);
            aug.net.adjacency[u].push_back({v, w, sub});
            if (!net.directed && u != v) aug.net.adjacency[v].push_back({u, w, sub});
        }
    }

    aug.node_region = tree.node_regions(net.node_count());
    aug.node_region.resize(aug.net.node_ids.size(), kNoRegion);
    return aug;
}

}  // namespace pirpath
