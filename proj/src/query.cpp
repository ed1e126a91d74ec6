#include "pirpath/query.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "pirpath/bytes.hpp"

namespace pirpath {

namespace {

uint64_t fixed_round4_pages(const HeaderInfo& h) {
    uint64_t c = h.tree.cluster_pages;
    uint64_t set_pages = (h.plan.m + 2) * c;
    uint64_t sub_pages = (h.plan.h > h.plan.r ? h.plan.h - h.plan.r : 0) + 2 * c;
    return std::max(set_pages, sub_pages);
}

}  // namespace

QueryPlan derive_query_plan(const HeaderInfo& h) {
    const uint32_t c = h.tree.cluster_pages;
    QueryPlan p;
    switch (h.scheme) {
        case Scheme::CI:
            p.rounds.push_back({{{kFlFile, 1}}});
            p.rounds.push_back({{{kFiFile, static_cast<uint32_t>(h.max_index_span)}}});
            p.rounds.push_back({{{kFdFile, static_cast<uint32_t>((h.plan.m + 2) * c)}}});
            break;
        case Scheme::PI:
            p.rounds.push_back({{{kFlFile, 1}}});
            p.rounds.push_back({{{kFiFile, static_cast<uint32_t>(h.plan.h)},
                                 {kFdFile, 2 * c}}});
            break;
        case Scheme::HY:
            p.rounds.push_back({{{kFlFile, 1}}});
            p.rounds.push_back({{{kFiFile, static_cast<uint32_t>(h.plan.r)}}});
            p.rounds.push_back({{{kFiFile, static_cast<uint32_t>(fixed_round4_pages(h))}}});
            break;
        case Scheme::LM:
        case Scheme::AF:
            p.rounds.push_back({{{kFdFile, 2 * c}}});
            for (uint64_t k = 2; k < h.max_region_fetches; ++k)
                p.rounds.push_back({{{kFdFile, c}}});
            break;
    }
    return p;
}

// ---------------------------------------------------------------------------
// client-local graph over decoded records and subgraph edges

namespace {

struct LocalGraph {
    std::map<NodeId, std::vector<std::pair<NodeId, double>>> adj;
    std::map<NodeId, Coord> pos;  // record-backed nodes only

    void add_record(const DecodedNode& n) {
        pos[n.id] = n.position;
        auto& arcs = adj[n.id];
        for (const auto& a : n.arcs) arcs.push_back({a.target_id, a.weight});
    }
    void add_tuple(const EdgeTuple& e, bool directed) {
        adj[e.from].push_back({e.to, e.weight});
        if (!directed) adj[e.to].push_back({e.from, e.weight});
    }
};

struct LocalPath {
    bool reachable = false;
    double cost = kInfiniteCost;
    std::vector<NodeId> nodes;
};

LocalPath local_dijkstra(const LocalGraph& g, NodeId s, NodeId t) {
    std::map<NodeId, double> dist;
    std::map<NodeId, NodeId> pred;
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0, s});
    std::set<NodeId> done;
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done.count(u)) continue;
        done.insert(u);
        if (u == t) break;
        auto it = g.adj.find(u);
        if (it == g.adj.end()) continue;
        for (const auto& [v, w] : it->second) {
            double nd = d + w;
            auto dv = dist.find(v);
            if (dv == dist.end() || nd < dv->second) {
                dist[v] = nd;
                pred[v] = u;
                pq.push({nd, v});
            }
        }
    }
    LocalPath out;
    if (!done.count(t)) return out;
    out.reachable = true;
    out.cost = dist[t];
    for (NodeId u = t;; u = pred[u]) {
        out.nodes.push_back(u);
        if (u == s) break;
    }
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

NodeId snap_to_region(const LocalGraph& g, const PackedKdTree& tree, Coord p, uint32_t region) {
    NodeId best = 0;
    double best_d2 = -1;
    for (const auto& [id, c] : g.pos) {
        if (tree.locate_region(c) != region) continue;
        double dx = c.x - p.x, dy = c.y - p.y, d2 = dx * dx + dy * dy;
        if (best_d2 < 0 || d2 < best_d2) {
            best_d2 = d2;
            best = id;
        }
    }
    if (best_d2 < 0) throw std::logic_error("region has no nodes to snap to");
    return best;
}

std::vector<uint8_t> read_group(PirSession& session, uint32_t file_id, const HeaderInfo& h,
                                uint32_t region) {
    const auto& leaf = h.tree.leaves.at(region);
    std::vector<uint8_t> bytes;
    for (uint32_t k = 0; k < h.tree.cluster_pages; ++k) {
        auto page = session.read_page(file_id, uint64_t(leaf.first_page_in_fd) + k);
        bytes.insert(bytes.end(), page.begin(), page.end());
    }
    return bytes;
}

void read_dummies(PirSession& session, uint32_t file_id, uint64_t count, std::mt19937& rng) {
    std::uniform_int_distribution<uint64_t> pick(0, session.page_count(file_id) - 1);
    for (uint64_t k = 0; k < count; ++k) session.read_page(file_id, pick(rng));
}

/// Page span of the entry of `rank`, whose first page is `page`, computed
/// from the slot directory and the entry's own header fields. Entries that
/// overflow their page are always self-contained, so the length is fully
/// determined even when only the first page is at hand.
uint64_t peek_entry_span(const std::vector<uint8_t>& page, uint64_t rank, EntryFormat fmt,
                         uint32_t B) {
    ByteReader r(page);
    uint16_t count = r.u16();
    uint32_t first_rank = r.u32();
    uint64_t slot = rank - first_rank;
    if (slot >= count) throw DecodeError("rank not present in its index page");
    r.seek(kIndexPageHeaderBytes + slot * 2);
    uint16_t offset = r.u16();
    r.seek(offset);
    uint64_t len = 0;
    bool subgraph = fmt == EntryFormat::Subgraph;
    if (fmt == EntryFormat::Mixed) {
        subgraph = r.u8() != 0;
        len += 1;
    }
    r.u16();  // reference slot
    uint32_t adds = r.u32();
    if (subgraph) {
        len += 2 + 4 + uint64_t(adds) * 16;
    } else {
        uint32_t excls = r.u32();
        len += 2 + 4 + 4 + uint64_t(adds) * 4 + uint64_t(excls) * 4;
    }
    if (offset + len <= B) return 1;
    uint64_t rest = offset + len - B;
    return 1 + (rest + (B - 2) - 1) / (B - 2);
}

}  // namespace

// ---------------------------------------------------------------------------
// LM / AF navigation

std::vector<uint8_t> DirectPageSource::group(uint32_t region) {
    const auto& leaf = header_.tree.leaves.at(region);
    std::vector<uint8_t> bytes;
    for (uint32_t k = 0; k < header_.tree.cluster_pages; ++k) {
        auto page = data_.page(uint64_t(leaf.first_page_in_fd) + k);
        bytes.insert(bytes.end(), page.begin(), page.end());
    }
    return bytes;
}

NavOutcome navigate(const HeaderInfo& h, RegionPageSource& source, Coord s, Coord t) {
    const PackedKdTree& tree = h.tree;
    uint32_t rs = tree.locate_region(s), rt = tree.locate_region(t);
    source.init(rs, rt);

    std::map<NodeId, DecodedNode> recs;
    std::set<uint32_t> fetched;
    NavOutcome out;
    auto fetch = [&](uint32_t region) {
        if (fetched.count(region)) return;
        auto nodes = decode_region_group(source.group(region), h.layout);
        for (auto& n : nodes) recs.emplace(n.id, std::move(n));
        fetched.insert(region);
    };
    fetch(rs);
    fetch(rt);
    out.fetch_slots = 2;  // the opening round always transfers two groups

    LocalGraph snapper;
    for (const auto& [id, n] : recs) snapper.pos[id] = n.position;
    NodeId sid = snap_to_region(snapper, tree, s, rs);
    NodeId tid = snap_to_region(snapper, tree, t, rt);
    out.snapped_source = sid;
    out.snapped_target = tid;

    const uint16_t anchors = h.layout.anchor_count;
    const DecodedNode& trec = recs.at(tid);
    auto estimate = [&](const DecodedNode& u) {
        double best = 0;
        for (uint16_t a = 0; a < anchors; ++a) {
            double cu = u.anchor_costs[a], ct = trec.anchor_costs[a];
            if (cu >= kInfiniteCost || ct >= kInfiniteCost) continue;
            // only cost(u,a) - cost(t,a) <= cost(u,t) holds under asymmetry
            best = std::max(best, h.directed ? cu - ct : std::abs(cu - ct));
        }
        return best;
    };
    auto flag_set = [&](const DecodedArc& arc, uint32_t region) {
        return arc.flags[region / 8] & (1u << (region % 8));
    };

    // A* under landmark estimates; arc flags degrade it to pruned Dijkstra
    std::map<NodeId, double> g;
    std::map<NodeId, NodeId> pred;
    std::set<NodeId> done;
    using Item = std::pair<double, NodeId>;  // (f, node)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    g[sid] = 0;
    pq.push({h.scheme == Scheme::LM ? estimate(recs.at(sid)) : 0.0, sid});
    while (!pq.empty()) {
        auto [f, u] = pq.top();
        pq.pop();
        if (done.count(u)) continue;
        done.insert(u);
        if (u == tid) break;
        const DecodedNode& rec = recs.at(u);
        for (const auto& arc : rec.arcs) {
            if (h.scheme == Scheme::AF && !flag_set(arc, rt)) continue;
            if (!fetched.count(arc.target_region)) {
                fetch(arc.target_region);  // one new round per first contact
                ++out.fetch_slots;
            }
            double nd = g[u] + arc.weight;
            auto dv = g.find(arc.target_id);
            if (dv == g.end() || nd < dv->second) {
                g[arc.target_id] = nd;
                pred[arc.target_id] = u;
                double est =
                    h.scheme == Scheme::LM ? estimate(recs.at(arc.target_id)) : 0.0;
                pq.push({nd + est, arc.target_id});
            }
        }
    }
    if (!done.count(tid)) return out;
    out.reachable = true;
    out.cost = g[tid];
    for (NodeId u = tid;; u = pred[u]) {
        out.nodes.push_back(u);
        if (u == sid) break;
    }
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

// ---------------------------------------------------------------------------
// query driver

namespace {

/// Session-backed page source: opening fetch is one round of two groups (the
/// second padded with dummies when source and target share a region), every
/// later fetch is its own round.
class SessionPageSource : public RegionPageSource {
public:
    SessionPageSource(PirSession& session, const HeaderInfo& header, std::mt19937& rng)
        : session_(session), header_(header), rng_(rng) {}

    void init(uint32_t rs, uint32_t rt) override {
        session_.begin_round();
        opening_left_ = rs == rt ? 1 : 2;
        pad_opening_ = rs == rt;
    }
    std::vector<uint8_t> group(uint32_t region) override {
        if (opening_left_ == 0) session_.begin_round();
        auto bytes = read_group(session_, kFdFile, header_, region);
        if (opening_left_ > 0) {
            if (pad_opening_) read_dummies(session_, kFdFile, header_.tree.cluster_pages, rng_);
            --opening_left_;
        }
        return bytes;
    }

private:
    PirSession& session_;
    const HeaderInfo& header_;
    std::mt19937& rng_;
    uint32_t opening_left_ = 0;
    bool pad_opening_ = false;
};

struct IndexFetch {
    std::vector<std::vector<uint8_t>> entry_pages;  // starting at the entry's page
    uint64_t rank = 0;
    uint32_t target_page = 0;
};

uint32_t lookup_round(PirSession& session, const HeaderInfo& h, uint64_t rank) {
    session.begin_round();
    LookupLocation loc = lookup_location(rank, h.page_size_bytes);
    auto page = session.read_page(kFlFile, loc.page);
    return decode_lookup_entry(page, loc.slot);
}

/// Fetches `span` index pages starting at the look-up target, shifted left
/// when the target sits within the last span-1 pages of the index section.
IndexFetch fetch_index_pages(PirSession& session, const HeaderInfo& h, uint64_t rank,
                             uint32_t target, uint64_t span) {
    uint64_t section = h.files.index_pages;
    uint64_t start = std::min<uint64_t>(target, section - std::min<uint64_t>(span, section));
    IndexFetch out;
    out.rank = rank;
    out.target_page = target;
    std::vector<std::vector<uint8_t>> pages;
    for (uint64_t k = 0; k < span; ++k) pages.push_back(session.read_page(kFiFile, start + k));
    out.entry_pages.assign(pages.begin() + (target - start), pages.end());
    return out;
}

}  // namespace

QueryResult run_query(const Database& db, const CostModel& model, Coord source, Coord target,
                      std::mt19937& rng) {
    PirSession session(model, db.pir_files());
    auto header_bytes = session.download_plain(kFhFile);
    HeaderInfo h = parse_header(header_bytes);
    const PackedKdTree& tree = h.tree;
    const uint32_t c = tree.cluster_pages;

    QueryResult res;
    uint32_t rs = tree.locate_region(source), rt = tree.locate_region(target);
    res.source_region = rs;
    res.target_region = rt;

    if (h.scheme == Scheme::LM || h.scheme == Scheme::AF) {
        SessionPageSource src(session, h, rng);
        NavOutcome nav = navigate(h, src, source, target);
        if (nav.fetch_slots > h.max_region_fetches)
            throw std::logic_error("navigation exceeded the plan's region budget");
        for (uint32_t k = nav.fetch_slots; k < h.max_region_fetches; ++k) {
            session.begin_round();
            read_dummies(session, kFdFile, c, rng);
        }
        res.reachable = nav.reachable;
        res.cost = nav.cost;
        res.nodes = nav.nodes;
        res.snapped_source = nav.snapped_source;
        res.snapped_target = nav.snapped_target;
    } else {
        RegionPair key = normalize_pair(rs, rt, h.directed);
        uint64_t rank = pair_rank(key.first, key.second, tree.region_count(), h.directed);
        uint32_t target_page = lookup_round(session, h, rank);

        LocalGraph graph;
        auto fetch_regions = [&](uint32_t file_id, const std::vector<uint32_t>& regions) {
            for (uint32_t r : regions)
                for (const auto& n : decode_region_group(read_group(session, file_id, h, r),
                                                         h.layout))
                    graph.add_record(n);
        };
        auto region_list = [&](const std::vector<uint32_t>& members) {
            std::vector<uint32_t> regions{rs};
            if (rt != rs) regions.push_back(rt);
            for (uint32_t r : members)
                if (r != rs && r != rt) regions.push_back(r);
            return regions;
        };

        if (h.scheme == Scheme::CI) {
            session.begin_round();
            IndexFetch fi = fetch_index_pages(session, h, rank, target_page, h.max_index_span);
            DecodedEntry entry =
                decode_index_entry(fi.entry_pages, h.page_size_bytes, rank, EntryFormat::Set);

            session.begin_round();
            auto regions = region_list(entry.regions);
            fetch_regions(kFdFile, regions);
            read_dummies(session, kFdFile, (h.plan.m + 2 - regions.size()) * c, rng);
        } else if (h.scheme == Scheme::PI) {
            session.begin_round();
            IndexFetch fi = fetch_index_pages(session, h, rank, target_page, h.plan.h);
            DecodedEntry entry =
                decode_index_entry(fi.entry_pages, h.page_size_bytes, rank, EntryFormat::Subgraph);
            auto regions = region_list({});
            fetch_regions(kFdFile, regions);
            if (regions.size() < 2) read_dummies(session, kFdFile, c, rng);
            for (const auto& e : entry.edges) graph.add_tuple(e, h.directed);
        } else {  // HY: everything beyond the look-up comes from the combined file
            session.begin_round();
            IndexFetch fi = fetch_index_pages(session, h, rank, target_page, h.plan.r);
            uint64_t span =
                peek_entry_span(fi.entry_pages[0], rank, EntryFormat::Mixed, h.page_size_bytes);

            session.begin_round();
            uint64_t budget = fixed_round4_pages(h);
            if (span > h.plan.r) {  // subgraph overflow: read the remaining pages
                for (uint64_t k = h.plan.r; k < span; ++k)
                    fi.entry_pages.push_back(session.read_page(kFiFile, target_page + k));
                budget -= span - h.plan.r;
            }
            DecodedEntry entry =
                decode_index_entry(fi.entry_pages, h.page_size_bytes, rank, EntryFormat::Mixed);
            auto regions = region_list(entry.is_subgraph ? std::vector<uint32_t>{}
                                                         : entry.regions);
            fetch_regions(kFiFile, regions);  // data groups live in the combined file
            read_dummies(session, kFiFile, budget - regions.size() * c, rng);
            for (const auto& e : entry.edges) graph.add_tuple(e, h.directed);
        }

        res.snapped_source = snap_to_region(graph, tree, source, rs);
        res.snapped_target = snap_to_region(graph, tree, target, rt);
        LocalPath path = local_dijkstra(graph, res.snapped_source, res.snapped_target);
        res.reachable = path.reachable;
        res.cost = path.cost;
        res.nodes = std::move(path.nodes);
    }

    res.trace = session.trace();
    res.time = session.response_time();
    QueryPlan plan = derive_query_plan(h);
    if (res.trace.rounds != plan.rounds)
        throw std::logic_error("query trace deviates from the public plan");
    return res;
}

}  // namespace pirpath
