#include "pirpath/database.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pirpath {

namespace {

namespace fs = std::filesystem;

RecordLayout make_layout(const BuildConfig& cfg) {
    RecordLayout layout;
    if (cfg.scheme == Scheme::LM) {
        layout.neighbor_region = true;
        layout.anchor_count = static_cast<uint16_t>(cfg.anchor_count);
    } else if (cfg.scheme == Scheme::AF) {
        layout.neighbor_region = true;
        layout.flag_bytes = 1;  // grown by the fixed point below
    }
    return layout;
}

PackedKdTree build_tree(const RoadNetwork& net, const BuildConfig& cfg,
                        const RecordLayout& layout) {
    PartitionConfig pcfg;
    pcfg.page_size_bytes = cfg.page_size_bytes;
    pcfg.cluster_pages = cfg.cluster_pages;
    return build_packed_kdtree(net, pcfg, record_sizes(net, layout));
}

/// Flag width feeds record sizes, record sizes feed the partition, and the
/// partition's region count feeds the flag width back. Widen-only iteration;
/// a surplus byte is tolerated (padded), a shortfall is not.
PackedKdTree settle_arcflag_layout(const RoadNetwork& net, const BuildConfig& cfg,
                                   RecordLayout& layout) {
    PackedKdTree tree = build_tree(net, cfg, layout);
    for (int iter = 0; iter < 8; ++iter) {
        uint16_t need = static_cast<uint16_t>(arcflag_bytes(tree.region_count()));
        if (need <= layout.flag_bytes) return tree;
        layout.flag_bytes = need;
        tree = build_tree(net, cfg, layout);
    }
    return tree;
}

/// Pads each arc's flag bytes up to the layout width.
std::vector<std::vector<uint8_t>> pad_arcflags(const RoadNetwork& net,
                                               std::vector<std::vector<uint8_t>> flags,
                                               uint32_t from_bytes, uint32_t to_bytes) {
    if (from_bytes == to_bytes) return flags;
    for (size_t u = 0; u < flags.size(); ++u) {
        std::vector<uint8_t> widened(net.adjacency[u].size() * to_bytes, 0);
        for (size_t a = 0; a < net.adjacency[u].size(); ++a)
            std::copy_n(flags[u].begin() + a * from_bytes, from_bytes,
                        widened.begin() + a * to_bytes);
        flags[u] = std::move(widened);
    }
    return flags;
}

void guard_capacity(const CostModel& model, const PagedFile& f) {
    try {
        check_capacity(model, f.bytes.size());
    } catch (const CapacityError& e) {
        throw BuildError("file '" + f.name + "': " + e.what());
    }
}

void guard_entry_spans(const NetworkIndexFile& index, const std::vector<RegionPair>& keys,
                       uint32_t page_size, uint64_t max_file_bytes) {
    for (size_t rank = 0; rank < index.spans.size(); ++rank) {
        uint64_t bytes = uint64_t(index.spans[rank].pages) * page_size;
        if (bytes > max_file_bytes)
            throw BuildError("index entry for regions (" + std::to_string(keys[rank].first) +
                             "," + std::to_string(keys[rank].second) + ") spans " +
                             std::to_string(bytes) + " bytes, past the server size cap");
    }
}

/// Spot check that the retained region sets really cover global shortest
/// paths on a seeded node-pair sample.
void covering_check(const RoadNetwork& net, const std::vector<uint32_t>& node_region,
                    const std::map<RegionPair, RegionSet>& sets,
                    const std::map<RegionPair, bool>* replaced, const BuildConfig& cfg) {
    if (net.node_count() < 2 || cfg.covering_check_pairs == 0) return;
    std::mt19937 rng(static_cast<uint32_t>(cfg.seed) ^ 0xc0ffee11u);
    std::uniform_int_distribution<uint32_t> pick(0, static_cast<uint32_t>(net.node_count()) - 1);
    bool directed = net.directed;
    for (uint64_t k = 0; k < cfg.covering_check_pairs; ++k) {
        uint32_t s = pick(rng), t = pick(rng);
        uint32_t i = node_region[s], j = node_region[t];
        RegionPair key = normalize_pair(i, j, directed);
        if (replaced && replaced->at(key)) continue;  // subgraph-answered under HY
        const auto& members = sets.at(key).members;
        double local = restricted_cost(net, node_region, i, j, members, s, t);
        auto global = dijkstra(net, s, t);
        double want = global ? global->total_cost : kInfiniteCost;
        bool both_inf = local >= kInfiniteCost && want >= kInfiniteCost;
        if (!both_inf && std::abs(local - want) > 1e-9 * std::max(1.0, std::abs(want)))
            throw BuildError("covering violated for regions (" + std::to_string(key.first) + "," +
                             std::to_string(key.second) + "): restricted cost " +
                             std::to_string(local) + " vs global " + std::to_string(want));
    }
}

uint64_t derive_region_fetches(const RoadNetwork& net, const HeaderInfo& header,
                               const PagedFile& data, const BuildConfig& cfg, bool& sampled) {
    size_t n = net.node_count();
    switch (cfg.plan_mode) {
        case PlanMode::Exact:
            if (n > cfg.exact_plan_node_limit)
                throw BuildError("exact plan derivation refused above " +
                                 std::to_string(cfg.exact_plan_node_limit) + " nodes (got " +
                                 std::to_string(n) + ")");
            sampled = false;
            break;
        case PlanMode::Sampled:
            sampled = true;
            break;
        case PlanMode::Auto:
            sampled = uint64_t(n) * n > cfg.plan_sample_pairs;
            break;
    }

    DirectPageSource source(header, data);
    uint64_t worst = 2;
    auto probe = [&](uint32_t s, uint32_t t) {
        NavOutcome nav = navigate(header, source, net.coords[s], net.coords[t]);
        worst = std::max<uint64_t>(worst, nav.fetch_slots);
    };
    if (!sampled) {
        for (uint32_t s = 0; s < n; ++s)
            for (uint32_t t = 0; t < n; ++t)
                if (s != t) probe(s, t);
    } else {
        std::mt19937 rng(static_cast<uint32_t>(cfg.seed) ^ 0x9e3779b9u);
        std::uniform_int_distribution<uint32_t> pick(0, static_cast<uint32_t>(n) - 1);
        for (uint64_t k = 0; k < cfg.plan_sample_pairs; ++k) probe(pick(rng), pick(rng));
        worst = static_cast<uint64_t>(std::ceil(double(worst) * cfg.plan_safety));
    }
    uint64_t cap = std::max<uint64_t>(header.tree.region_count(), 2);
    return std::min(std::max<uint64_t>(worst, 2), cap);
}

std::string cardinality_histogram(const std::map<RegionPair, RegionSet>& sets,
                                  const std::map<RegionPair, bool>* replaced) {
    std::map<size_t, uint64_t> hist;
    for (const auto& [key, set] : sets) {
        if (replaced && replaced->at(key)) continue;
        ++hist[set.members.size()];
    }
    std::ostringstream out;
    for (const auto& [card, count] : hist) out << " " << card << ":" << count;
    return out.str();
}

}  // namespace

Database build_database(const RoadNetwork& net, const BuildConfig& cfg) {
    if (net.node_count() == 0) throw BuildError("cannot build a database over an empty network");
    CostModel model = cfg.cost;
    model.page_size_bytes = cfg.page_size_bytes;
    const uint32_t B = cfg.page_size_bytes;

    RecordLayout layout = make_layout(cfg);
    PackedKdTree tree = cfg.scheme == Scheme::AF ? settle_arcflag_layout(net, cfg, layout)
                                                 : build_tree(net, cfg, layout);
    std::vector<uint32_t> node_region = tree.node_regions(net.node_count());

    // scheme-specific extras feeding the region data records
    Landmarks landmarks;
    std::vector<std::vector<uint8_t>> flags;
    RecordExtras extras;
    if (layout.neighbor_region) extras.node_region = &node_region;
    if (cfg.scheme == Scheme::LM) {
        landmarks = compute_landmarks(net, cfg.anchor_count);
        extras.anchor_costs = &landmarks.costs;
    } else if (cfg.scheme == Scheme::AF) {
        flags = pad_arcflags(net, compute_arcflags(net, node_region, tree.region_count()),
                             arcflag_bytes(tree.region_count()), layout.flag_bytes);
        extras.arc_flags = &flags;
    }

    PagedFile data = build_region_data_file(net, tree, layout, extras);

    HeaderInfo info;
    info.scheme = cfg.scheme;
    info.directed = net.directed;
    info.page_size_bytes = B;
    info.tree = tree;
    info.layout = layout;
    info.files.data_pages = data.page_count();

    Database db;
    std::ostringstream note;  // scheme-specific manifest lines

    if (cfg.scheme == Scheme::LM || cfg.scheme == Scheme::AF) {
        bool sampled = false;
        info.max_region_fetches = derive_region_fetches(net, info, data, cfg, sampled);
        note << "plan derivation: " << (sampled ? "sampled" : "exact");
        if (sampled)
            note << " (pairs=" << cfg.plan_sample_pairs << " safety=" << cfg.plan_safety << ")";
        note << "\n";
        db.lookup = PagedFile{"lookup", B, {}};
        db.index = PagedFile{"index", B, {}};
        db.data = std::move(data);
    } else {
        AugmentedNetwork aug = extract_border_nodes(net, tree);
        std::vector<RegionPair> keys = region_pair_keys(tree.region_count(), net.directed);

        std::map<RegionPair, RegionSet> sets;
        std::map<RegionPair, PassageSubgraph> graphs;
        std::map<RegionPair, bool> replaced;
        std::vector<IndexPayload> payloads(keys.size());
        EntryFormat format = EntryFormat::Set;
        uint64_t m = 0;

        if (cfg.scheme == Scheme::CI) {
            sets = compute_region_sets(aug, tree);
            m = max_set_cardinality(sets);
            for (size_t k = 0; k < keys.size(); ++k)
                payloads[k] = {false, sets.at(keys[k]).members};
            info.plan.m = m;
        } else if (cfg.scheme == Scheme::PI) {
            graphs = compute_passage_subgraphs(aug, tree);
            format = EntryFormat::Subgraph;
            for (size_t k = 0; k < keys.size(); ++k)
                payloads[k] = {true, graphs.at(keys[k]).edges};
        } else {  // HY
            sets = compute_region_sets(aug, tree);
            graphs = compute_passage_subgraphs(aug, tree);
            auto choices = hy_replace(sets, graphs, cfg.hy_threshold);
            format = EntryFormat::Mixed;
            for (size_t k = 0; k < keys.size(); ++k) {
                const HybridChoice& c = choices.at(keys[k]);
                replaced[keys[k]] = c.use_subgraph;
                if (c.use_subgraph)
                    payloads[k] = {true, c.graph.edges};
                else {
                    payloads[k] = {false, c.set.members};
                    m = std::max<uint64_t>(m, c.set.members.size());
                }
            }
            info.plan.m = m;
        }

        NetworkIndexFile index =
            build_network_index_file(net, payloads, format, B, m, cfg.compression);
        guard_entry_spans(index, keys, B, model.max_file_bytes);
        info.max_index_span = index.max_span;

        if (cfg.scheme == Scheme::PI) {
            info.plan.h = index.max_span;
        } else if (cfg.scheme == Scheme::HY) {
            uint64_t h = 0, r = 0;
            for (size_t k = 0; k < keys.size(); ++k) {
                if (payloads[k].is_subgraph)
                    h = std::max<uint64_t>(h, index.spans[k].pages);
                else
                    r = std::max<uint64_t>(r, index.spans[k].pages);
            }
            info.plan.h = h;
            info.plan.r = std::max<uint64_t>(r, 1);
        }

        if (cfg.scheme != Scheme::PI) {
            covering_check(net, node_region, sets,
                           cfg.scheme == Scheme::HY ? &replaced : nullptr, cfg);
            note << "set cardinality histogram:"
                 << cardinality_histogram(sets, cfg.scheme == Scheme::HY ? &replaced : nullptr)
                 << "\n";
        }

        db.lookup = build_lookup_file(index.spans, B);
        db.lookup.name = "lookup";
        info.files.lookup_pages = db.lookup.page_count();
        info.files.index_pages = index.file.page_count();

        if (cfg.scheme == Scheme::HY) {
            db.index = build_combined_file(index.file, data);
            db.index.name = "combined";
            info.files.combined = true;
            // data groups now live past the index section of the combined file
            for (auto& leaf : info.tree.leaves)
                leaf.first_page_in_fd += static_cast<uint32_t>(info.files.index_pages);
            db.data = PagedFile{"data", B, {}};
        } else {
            db.index = std::move(index.file);
            db.index.name = "index";
            db.data = std::move(data);
        }
    }

    db.header_file = PagedFile{"header", B, build_header(info)};
    db.header = parse_header(db.header_file.bytes);

    guard_capacity(model, db.header_file);
    guard_capacity(model, db.lookup);
    guard_capacity(model, db.index);
    guard_capacity(model, db.data);

    std::ostringstream man;
    man << "scheme=" << scheme_name(cfg.scheme) << "\n"
        << "directed=" << (net.directed ? "true" : "false") << "\n"
        << "nodes=" << net.node_count() << " edges=" << net.edge_count() << "\n"
        << "regions=" << tree.region_count() << " cluster_pages=" << tree.cluster_pages
        << " page_size=" << B << "\n"
        << "plan m=" << info.plan.m << " h=" << info.plan.h << " r=" << info.plan.r
        << " max_index_span=" << info.max_index_span
        << " max_region_fetches=" << info.max_region_fetches << "\n"
        << "pages header=" << db.header_file.page_count() << " lookup=" << db.lookup.page_count()
        << " index=" << db.index.page_count() << " data=" << db.data.page_count()
        << " combined=" << (info.files.combined ? 1 : 0) << "\n"
        << note.str();
    db.manifest = man.str();
    return db;
}

// ---------------------------------------------------------------------------

namespace {

void write_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw BuildError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw BuildError("short write to " + path.string());
}

std::vector<uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw BuildError("cannot open " + path.string());
    std::vector<uint8_t> bytes(static_cast<size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw BuildError("short read from " + path.string());
    return bytes;
}

}  // namespace

void save_database(const Database& db, const std::string& dir) {
    fs::create_directories(dir);
    fs::path base(dir);
    write_bytes(base / "header.bin", db.header_file.bytes);
    if (!db.lookup.bytes.empty()) write_bytes(base / "lookup.bin", db.lookup.bytes);
    if (!db.index.bytes.empty())
        write_bytes(base / (db.header.files.combined ? "combined.bin" : "index.bin"),
                    db.index.bytes);
    if (!db.data.bytes.empty()) write_bytes(base / "data.bin", db.data.bytes);
    std::ofstream man(base / "manifest.txt", std::ios::trunc);
    man << db.manifest;
}

Database load_database(const std::string& dir) {
    fs::path base(dir);
    Database db;
    db.header_file = PagedFile{"header", 4096, read_bytes(base / "header.bin")};
    db.header = parse_header(db.header_file.bytes);
    const uint32_t B = db.header.page_size_bytes;
    db.header_file.page_size_bytes = B;
    db.lookup = PagedFile{"lookup", B, {}};
    db.index = PagedFile{"index", B, {}};
    db.data = PagedFile{"data", B, {}};
    if (db.header.files.lookup_pages > 0) db.lookup.bytes = read_bytes(base / "lookup.bin");
    if (db.header.files.combined) {
        db.index.name = "combined";
        db.index.bytes = read_bytes(base / "combined.bin");
    } else if (db.header.files.index_pages > 0) {
        db.index.bytes = read_bytes(base / "index.bin");
    }
    if (!db.header.files.combined && db.header.files.data_pages > 0)
        db.data.bytes = read_bytes(base / "data.bin");
    if (fs::exists(base / "manifest.txt")) {
        std::ifstream man(base / "manifest.txt");
        std::ostringstream buf;
        buf << man.rdbuf();
        db.manifest = buf.str();
    }
    return db;
}

}  // namespace pirpath
