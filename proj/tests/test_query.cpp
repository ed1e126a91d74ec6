#include <filesystem>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "pirpath/database.hpp"

using namespace pirpath;

namespace {

BuildConfig t16_config(Scheme scheme) {
    BuildConfig cfg;
    cfg.scheme = scheme;
    cfg.page_size_bytes = 300;  // splits T16 into four column regions
    cfg.anchor_count = 3;
    return cfg;
}

CostModel query_model(const BuildConfig& cfg) {
    CostModel m = cfg.cost;
    m.page_size_bytes = cfg.page_size_bytes;
    return m;
}

/// Independent snapping oracle: nearest node of the query's region, ties to
/// the smaller id.
NodeId expected_snap(const RoadNetwork& net, const PackedKdTree& tree, Coord p) {
    uint32_t region = tree.locate_region(p);
    NodeId best = 0;
    double best_d2 = -1;
    for (size_t u = 0; u < net.node_count(); ++u) {
        if (tree.locate_region(net.coords[u]) != region) continue;
        double dx = net.coords[u].x - p.x, dy = net.coords[u].y - p.y;
        double d2 = dx * dx + dy * dy;
        if (best_d2 < 0 || d2 < best_d2) {
            best_d2 = d2;
            best = net.id_of(static_cast<uint32_t>(u));
        }
    }
    return best;
}

/// Runs every ordered node pair as a query and checks costs against the
/// all-pairs oracle, endpoints against the snapping oracle, and that every
/// query leaves the same observable trace.
void check_all_pairs(const RoadNetwork& net, const BuildConfig& cfg) {
    Database db = build_database(net, cfg);
    CostModel model = query_model(cfg);
    auto oracle = fixtures::all_pairs_oracle(net);
    std::mt19937 rng(7);
    AccessTrace first;
    bool have_first = false;
    for (uint32_t s = 0; s < net.node_count(); ++s) {
        for (uint32_t t = 0; t < net.node_count(); ++t) {
            QueryResult res = run_query(db, model, net.coords[s], net.coords[t], rng);
            CHECK(res.snapped_source == net.id_of(s));
            CHECK(res.snapped_target == net.id_of(t));
            if (oracle[s][t] < kInfiniteCost) {
                REQUIRE(res.reachable);
                CHECK(fixtures::close(res.cost, oracle[s][t]));
                REQUIRE(!res.nodes.empty());
                CHECK(res.nodes.front() == net.id_of(s));
                CHECK(res.nodes.back() == net.id_of(t));
            } else {
                CHECK(!res.reachable);
            }
            if (!have_first) {
                first = res.trace;
                have_first = true;
            } else {
                CHECK(res.trace == first);
            }
        }
    }
}

/// T16 with asymmetric arcs: forward along the grid costs 1, backward 2.
RoadNetwork t16_directed() {
    std::vector<std::pair<NodeId, Coord>> nodes;
    std::vector<fixtures::EdgeSpec> edges;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            nodes.push_back({static_cast<NodeId>(y * 4 + x), {double(x), double(y)}});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            NodeId id = y * 4 + x;
            if (x + 1 < 4) {
                edges.push_back({id, id + 1, 1.0});
                edges.push_back({id + 1, id, 2.0});
            }
            if (y + 1 < 4) {
                edges.push_back({id, id + 4, 1.0});
                edges.push_back({id + 4, id, 2.0});
            }
        }
    return fixtures::make_network(nodes, edges, true);
}

}  // namespace

TEST_CASE("query: every scheme answers all T16 pairs exactly, with uniform traces") {
    RoadNetwork net = fixtures::t16();
    for (Scheme s : {Scheme::CI, Scheme::PI, Scheme::HY, Scheme::LM, Scheme::AF}) {
        CAPTURE(scheme_name(s));
        check_all_pairs(net, t16_config(s));
    }
}

TEST_CASE("query: hybrid is exact at both threshold extremes and in between") {
    RoadNetwork net = fixtures::t16();
    for (uint64_t thr : {uint64_t(0), uint64_t(1), uint64_t(100)}) {
        CAPTURE(thr);
        BuildConfig cfg = t16_config(Scheme::HY);
        cfg.hy_threshold = thr;
        check_all_pairs(net, cfg);
    }
}

TEST_CASE("query: directed networks are answered exactly by every scheme") {
    RoadNetwork net = t16_directed();
    for (Scheme s : {Scheme::CI, Scheme::PI, Scheme::HY, Scheme::LM, Scheme::AF}) {
        CAPTURE(scheme_name(s));
        check_all_pairs(net, t16_config(s));
    }
}

TEST_CASE("query: passage-index plan with one-page entries costs four page accesses") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg;
    cfg.scheme = Scheme::PI;
    cfg.page_size_bytes = 512;
    Database db = build_database(net, cfg);
    REQUIRE(db.header.tree.region_count() > 1);
    REQUIRE(db.header.plan.h == 1);  // every subgraph entry fits one page

    QueryPlan plan = derive_query_plan(db.header);
    REQUIRE(plan.rounds.size() == 2);
    CHECK(plan.rounds[0].segments == std::vector<TraceSegment>{{kFlFile, 1}});
    CHECK(plan.rounds[1].segments == std::vector<TraceSegment>{{kFiFile, 1}, {kFdFile, 2}});

    std::mt19937 rng(3);
    QueryResult res = run_query(db, query_model(cfg), {0, 0}, {3, 3}, rng);
    CHECK(res.trace.total_pages() == 4);
}

TEST_CASE("query: clustered regions scale the data fetch by the cluster size") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg;
    cfg.scheme = Scheme::PI;
    cfg.page_size_bytes = 128;
    cfg.cluster_pages = 3;
    Database db = build_database(net, cfg);
    QueryPlan plan = derive_query_plan(db.header);
    REQUIRE(plan.rounds.size() == 2);
    REQUIRE(plan.rounds[1].segments.size() == 2);
    CHECK(plan.rounds[1].segments[1] == TraceSegment{kFdFile, 6});
    check_all_pairs(net, cfg);
}

TEST_CASE("query: concise-index data round fetches m + 2 region groups") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::CI);
    Database db = build_database(net, cfg);
    uint64_t m = db.header.plan.m;
    CHECK(m >= 1);
    QueryPlan plan = derive_query_plan(db.header);
    REQUIRE(plan.rounds.size() == 3);
    CHECK(plan.rounds[2].segments ==
          std::vector<TraceSegment>{{kFdFile, static_cast<uint32_t>(m + 2)}});
}

TEST_CASE("query: hybrid set- and subgraph-answered queries are indistinguishable") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::HY);
    cfg.hy_threshold = 1;  // the two-hop region pairs get subgraphs, the rest keep sets
    Database db = build_database(net, cfg);
    CHECK(db.header.files.combined);

    std::mt19937 rng(11);
    CostModel model = query_model(cfg);
    // same-region pair: set-answered; opposite corners: subgraph-answered
    QueryResult near = run_query(db, model, {0, 0}, {0, 3}, rng);
    QueryResult far = run_query(db, model, {0, 0}, {3, 3}, rng);
    CHECK(near.trace == far.trace);
    CHECK(fixtures::close(near.cost, 3.0));
    CHECK(fixtures::close(far.cost, 6.0));
    // the trace names only two files: the look-up and the combined file
    for (const auto& round : far.trace.rounds)
        for (const auto& seg : round.segments)
            CHECK((seg.file_id == kFlFile || seg.file_id == kFiFile));
}

TEST_CASE("query: off-node coordinates snap to the nearest node of their region") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::CI);
    Database db = build_database(net, cfg);
    std::mt19937 rng(5);
    Coord qs{0.1, 0.9}, qt{2.9, 2.1};
    NodeId want_s = expected_snap(net, db.header.tree, qs);
    NodeId want_t = expected_snap(net, db.header.tree, qt);
    QueryResult res = run_query(db, query_model(cfg), qs, qt, rng);
    CHECK(res.snapped_source == want_s);
    CHECK(res.snapped_target == want_t);
    auto oracle = fixtures::all_pairs_oracle(net);
    CHECK(fixtures::close(res.cost, oracle[*net.index_of(want_s)][*net.index_of(want_t)]));
}

TEST_CASE("query: disconnected targets are reported unreachable") {
    // two components: 0-1 and 2-3
    RoadNetwork net = fixtures::make_network(
        {{0, {0, 0}}, {1, {1, 0}}, {2, {5, 0}}, {3, {6, 0}}},
        {{0, 1, 1.0}, {2, 3, 1.0}}, false);
    for (Scheme s : {Scheme::CI, Scheme::LM}) {
        CAPTURE(scheme_name(s));
        BuildConfig cfg;
        cfg.scheme = s;
        cfg.anchor_count = 2;
        Database db = build_database(net, cfg);
        std::mt19937 rng(9);
        QueryResult res = run_query(db, query_model(cfg), {0, 0}, {6, 0}, rng);
        CHECK(!res.reachable);
        QueryResult ok = run_query(db, query_model(cfg), {0, 0}, {1, 0}, rng);
        CHECK(ok.reachable);
        CHECK(fixtures::close(ok.cost, 1.0));
    }
}

TEST_CASE("query: a single-region database still answers through the full plan") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg;  // 4 KByte pages: everything fits one region
    cfg.scheme = Scheme::CI;
    Database db = build_database(net, cfg);
    REQUIRE(db.header.tree.region_count() == 1);
    check_all_pairs(net, cfg);
}

TEST_CASE("query: databases survive a save/load round trip unchanged") {
    RoadNetwork net = fixtures::t16();
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pirpath_query_roundtrip";
    fs::remove_all(dir);
    for (Scheme s : {Scheme::CI, Scheme::HY, Scheme::AF}) {
        CAPTURE(scheme_name(s));
        BuildConfig cfg = t16_config(s);
        Database db = build_database(net, cfg);
        save_database(db, (dir / scheme_name(s)).string());
        Database back = load_database((dir / scheme_name(s)).string());
        CHECK(back.header_file.bytes == db.header_file.bytes);
        CHECK(back.lookup.bytes == db.lookup.bytes);
        CHECK(back.index.bytes == db.index.bytes);
        CHECK(back.data.bytes == db.data.bytes);
        CHECK(back.manifest == db.manifest);

        std::mt19937 r1(21), r2(21);
        CostModel model = query_model(cfg);
        QueryResult a = run_query(db, model, {0, 0}, {3, 2}, r1);
        QueryResult b = run_query(back, model, {0, 0}, {3, 2}, r2);
        CHECK(a.cost == b.cost);
        CHECK(a.nodes == b.nodes);
        CHECK(a.trace == b.trace);
    }
    fs::remove_all(dir);
}

TEST_CASE("query: rebuilding from the same inputs is byte-identical") {
    RoadNetwork net = fixtures::t16();
    for (Scheme s : {Scheme::CI, Scheme::PI, Scheme::HY, Scheme::LM, Scheme::AF}) {
        CAPTURE(scheme_name(s));
        BuildConfig cfg = t16_config(s);
        Database a = build_database(net, cfg);
        Database b = build_database(net, cfg);
        CHECK(a.header_file.bytes == b.header_file.bytes);
        CHECK(a.lookup.bytes == b.lookup.bytes);
        CHECK(a.index.bytes == b.index.bytes);
        CHECK(a.data.bytes == b.data.bytes);
        CHECK(a.manifest == b.manifest);
    }
}

TEST_CASE("query: response time accounts for every round and transferred byte") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::CI);
    Database db = build_database(net, cfg);
    std::mt19937 rng(13);
    CostModel model = query_model(cfg);
    QueryResult res = run_query(db, model, {0, 0}, {3, 3}, rng);
    std::vector<uint64_t> pages;
    for (const PagedFile* f : db.pir_files()) pages.push_back(f->page_count());
    ResponseTime redo = simulate_response_time(res.trace, model, pages);
    CHECK(fixtures::close(res.time.pir_s, redo.pir_s, 1e-12));
    CHECK(fixtures::close(res.time.comm_s, redo.comm_s, 1e-12));
    CHECK(res.time.total() > 0.0);
}
