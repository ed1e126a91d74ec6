#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pirpath/bench.hpp"
#include "pirpath/synth.hpp"

using namespace pirpath;

namespace {

BuildConfig t16_config(Scheme scheme) {
    BuildConfig cfg;
    cfg.scheme = scheme;
    cfg.page_size_bytes = 300;
    cfg.anchor_count = 3;
    return cfg;
}

CostModel query_model(const BuildConfig& cfg) {
    CostModel m = cfg.cost;
    m.page_size_bytes = cfg.page_size_bytes;
    return m;
}

AccessTrace sample_trace() {
    AccessTrace t;
    t.header_bytes = 512;
    t.rounds.push_back({{{1, 1}}});
    t.rounds.push_back({{{2, 3}, {3, 2}}});
    return t;
}

}  // namespace

TEST_CASE("audit: identical traces pass the uniformity check") {
    std::vector<AccessTrace> traces(5, sample_trace());
    TraceCheck check = verify_uniform_traces(traces);
    CHECK(check.pass);
    CHECK(verify_uniform_traces({}).pass);
    CHECK(verify_uniform_traces({sample_trace()}).pass);
}

TEST_CASE("audit: a forged extra page fails at the divergent round") {
    std::vector<AccessTrace> traces(4, sample_trace());
    traces[2].rounds[1].segments[0].pages += 1;  // one extra page in round 2
    TraceCheck check = verify_uniform_traces(traces);
    REQUIRE(!check.pass);
    CHECK(check.divergent_trace == 2);
    CHECK(check.divergent_round == 2);
}

TEST_CASE("audit: traces of different shapes fail") {
    std::vector<AccessTrace> traces(2, sample_trace());
    traces[1].rounds.pop_back();  // a different scheme's plan
    CHECK(!verify_uniform_traces(traces).pass);

    traces = {sample_trace(), sample_trace()};
    traces[1].header_bytes += 1;
    CHECK(!verify_uniform_traces(traces).pass);
}

TEST_CASE("bench: exhaustive T16 workloads pass for every scheme") {
    RoadNetwork net = fixtures::t16();
    WorkloadSpec spec;
    spec.exhaustive = true;
    for (Scheme s : {Scheme::CI, Scheme::PI, Scheme::HY, Scheme::LM, Scheme::AF}) {
        CAPTURE(scheme_name(s));
        BuildConfig cfg = t16_config(s);
        Database db = build_database(net, cfg);
        BenchRow row = run_workload(db, net, query_model(cfg), spec);
        CHECK(row.queries == 16 * 15);
        CHECK(row.scheme == scheme_name(s));
        CHECK(fixtures::close(row.total_s, row.pir_s + row.comm_s + row.client_s, 1e-12));
        CHECK(row.total_s > 0.0);
        CHECK(row.fd_utilization > 0.0);
        CHECK(row.fd_utilization <= 1.0);
        uint64_t planned = 0;
        for (const auto& r : derive_query_plan(db.header).rounds)
            for (const auto& seg : r.segments) planned += seg.pages;
        CHECK(row.lookup_pages + row.index_pages + row.data_pages == planned);
    }
}

TEST_CASE("bench: an empty workload yields an empty but valid row") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::CI);
    Database db = build_database(net, cfg);
    WorkloadSpec spec;
    spec.pair_count = 0;
    BenchRow row = run_workload(db, net, query_model(cfg), spec);
    CHECK(row.queries == 0);
    CHECK(row.total_s == 0.0);
}

TEST_CASE("bench: a wrong oracle network is reported as a named hard failure") {
    RoadNetwork net = fixtures::t16();
    BuildConfig cfg = t16_config(Scheme::CI);
    Database db = build_database(net, cfg);
    // same topology, different weights: the oracle disagrees with the answers
    std::vector<std::pair<NodeId, Coord>> nodes;
    std::vector<fixtures::EdgeSpec> edges;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            nodes.push_back({static_cast<NodeId>(y * 4 + x), {double(x), double(y)}});
    for (const auto& e : net.edges)
        edges.push_back({net.id_of(e.from), net.id_of(e.to), 5.0});
    RoadNetwork heavier = fixtures::make_network(nodes, edges, false);
    WorkloadSpec spec;
    spec.pair_count = 10;
    CHECK_THROWS_AS(run_workload(db, heavier, query_model(cfg), spec), BenchError);
}

TEST_CASE("bench: seeded runs emit byte-identical CSV") {
    RoadNetwork net = fixtures::t16();
    WorkloadSpec spec;
    spec.pair_count = 40;
    spec.seed = 99;
    auto emit = [&] {
        BenchReport report;
        for (Scheme s : {Scheme::CI, Scheme::PI}) {
            BuildConfig cfg = t16_config(s);
            Database db = build_database(net, cfg);
            report.rows.push_back(run_workload(db, net, query_model(cfg), spec));
        }
        return report_csv(report);
    };
    std::string a = emit(), b = emit();
    CHECK(a == b);
    CHECK(a.find(kBenchCsvVersion) != std::string::npos);
    CHECK(a.find("ci,") != std::string::npos);
    CHECK(a.find("pi,") != std::string::npos);
}

TEST_CASE("sweep: lowering the hybrid threshold trades fetch pages for index bytes") {
    RoadNetwork net = fixtures::t16();
    std::vector<SweepPoint> grid;
    for (uint64_t thr : {uint64_t(100), uint64_t(2), uint64_t(1), uint64_t(0)}) {
        BuildConfig cfg = t16_config(Scheme::HY);
        cfg.hy_threshold = thr;
        grid.push_back({"thr=" + std::to_string(thr), cfg});
    }
    WorkloadSpec spec;
    spec.pair_count = 30;
    BenchReport report = sweep_parameter(net, grid, spec);
    REQUIRE(report.rows.size() == 4);
    for (size_t i = 1; i < report.rows.size(); ++i) {
        REQUIRE(report.rows[i].ok);
        uint64_t prev = report.rows[i - 1].lookup_pages + report.rows[i - 1].index_pages +
                        report.rows[i - 1].data_pages;
        uint64_t cur = report.rows[i].lookup_pages + report.rows[i].index_pages +
                       report.rows[i].data_pages;
        CHECK(cur <= prev);  // fewer pages fetched per query
        CHECK(report.rows[i].index_bytes >= report.rows[i - 1].index_bytes);  // more storage
    }
}

TEST_CASE("sweep: growing the cluster size shrinks the network index") {
    RoadNetwork net = fixtures::t16();
    std::vector<SweepPoint> grid;
    for (uint32_t cluster : {1u, 2u, 3u}) {
        BuildConfig cfg;
        cfg.scheme = Scheme::PI;
        cfg.page_size_bytes = 256;
        cfg.cluster_pages = cluster;
        grid.push_back({"cluster=" + std::to_string(cluster), cfg});
    }
    WorkloadSpec spec;
    spec.pair_count = 20;
    BenchReport report = sweep_parameter(net, grid, spec);
    REQUIRE(report.rows.size() == 3);
    for (size_t i = 1; i < report.rows.size(); ++i) {
        REQUIRE(report.rows[i].ok);
        CHECK(report.rows[i].index_bytes <= report.rows[i - 1].index_bytes);
    }
}

TEST_CASE("sweep: capacity-refused builds become Nil rows, not aborts") {
    RoadNetwork net = fixtures::t16();
    BuildConfig tiny = t16_config(Scheme::CI);
    tiny.cost.max_file_bytes = 600;  // the index cannot fit
    BuildConfig fine = t16_config(Scheme::CI);
    WorkloadSpec spec;
    spec.pair_count = 5;
    BenchReport report =
        sweep_parameter(net, {{"capped", tiny}, {"default", fine}}, spec);
    REQUIRE(report.rows.size() == 2);
    CHECK(!report.rows[0].ok);
    CHECK(!report.rows[0].note.empty());
    CHECK(report.rows[1].ok);
    std::string csv = report_csv(report);
    CHECK(csv.find(",Nil,") != std::string::npos);

    CHECK_THROWS_AS(sweep_parameter(net, {}, spec), BenchError);
}

TEST_CASE("audit: textual traces survive a parse round trip") {
    AccessTrace a = sample_trace();
    AccessTrace b = sample_trace();
    b.rounds[0].segments[0].pages = 7;
    std::ostringstream text;
    text << a.to_text() << "pir=1.0 comm=2.0 total=3.0\n\n" << b.to_text();
    std::istringstream in(text.str());
    auto back = parse_trace_text(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
}

TEST_CASE("synth: generation is seeded, connected and irregular") {
    SynthConfig cfg;
    cfg.grid_width = 12;
    cfg.grid_height = 10;
    cfg.seed = 42;
    RoadNetwork net = generate_network(cfg);
    CHECK(net.node_count() == 120);
    // thinning removed edges but kept the graph connected
    uint64_t full_grid = 11 * 10 + 12 * 9;
    CHECK(net.edge_count() < full_grid);
    auto tree = dijkstra_tree(net, 0);
    for (size_t u = 0; u < net.node_count(); ++u) CHECK(tree.dist[u] < kInfiniteCost);

    RoadNetwork again = generate_network(cfg);
    CHECK(again.edge_count() == net.edge_count());
    CHECK(again.coords[7].x == net.coords[7].x);

    SynthConfig other = cfg;
    other.seed = 43;
    CHECK(generate_network(other).coords[7].x != net.coords[7].x);
}

TEST_CASE("synth: written network files parse back to the same network") {
    SynthConfig cfg;
    cfg.grid_width = 6;
    cfg.grid_height = 5;
    cfg.directed = true;
    cfg.seed = 3;
    RoadNetwork net = generate_network(cfg);
    CHECK(net.directed);
    std::string dir = "/tmp/pirpath_synth_test";
    std::filesystem::create_directories(dir);
    write_network_files(net, dir + "/n.co", dir + "/n.gr");
    RoadNetwork back = parse_network_files(dir + "/n.co", dir + "/n.gr");
    CHECK(back.node_count() == net.node_count());
    CHECK(back.edge_count() == net.edge_count());
    for (size_t e = 0; e < net.edges.size(); ++e) {
        CHECK(back.edges[e].from == net.edges[e].from);
        CHECK(back.edges[e].to == net.edges[e].to);
        CHECK(back.edges[e].weight == doctest::Approx(net.edges[e].weight).epsilon(1e-15));
    }
    std::filesystem::remove_all(dir);
}
