// Command-line front end: generate networks, build databases, run private
// queries, benchmark, audit traces, sweep parameters and inspect files.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pirpath/bench.hpp"
#include "pirpath/synth.hpp"

using namespace pirpath;
using nlohmann::json;

namespace {

struct CostFlags {
    std::string config_path;
    double rtt = -1, bandwidth = -1, seek = -1, disk = -1, scp_io = -1, scp_crypto = -1;
    double calibration_a = -1, calibration_b = -1;
    int64_t scp_memory = -1, max_file_bytes = -1;
};

void add_cost_flags(CLI::App* cmd, CostFlags& f) {
    cmd->add_option("--cost-config", f.config_path, "JSON file with cost model overrides");
    cmd->add_option("--rtt", f.rtt, "round-trip time, seconds");
    cmd->add_option("--bandwidth", f.bandwidth, "client link, bytes/second");
    cmd->add_option("--seek", f.seek, "disk seek time, seconds");
    cmd->add_option("--disk-rate", f.disk, "disk transfer rate, bytes/second");
    cmd->add_option("--scp-io-rate", f.scp_io, "coprocessor I/O rate, bytes/second");
    cmd->add_option("--scp-crypto-rate", f.scp_crypto, "coprocessor crypto rate, bytes/second");
    cmd->add_option("--calibration-a", f.calibration_a, "fixed per-page PIR cost, seconds");
    cmd->add_option("--calibration-b", f.calibration_b, "per-page (log2 N)^2 coefficient");
    cmd->add_option("--scp-memory", f.scp_memory, "coprocessor memory, bytes");
    cmd->add_option("--max-file-bytes", f.max_file_bytes, "server per-file size cap, bytes");
}

CostModel resolve_cost(const CostFlags& f) {
    CostModel m;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw CLI::ValidationError("--cost-config", "cannot open " + f.config_path);
        json cfg = json::parse(in);
        if (cfg.contains("rtt_s")) m.rtt_s = cfg["rtt_s"];
        if (cfg.contains("bandwidth_bps")) m.bandwidth_bps = cfg["bandwidth_bps"];
        if (cfg.contains("seek_s")) m.seek_s = cfg["seek_s"];
        if (cfg.contains("disk_rate_bps")) m.disk_rate_bps = cfg["disk_rate_bps"];
        if (cfg.contains("scp_io_rate_bps")) m.scp_io_rate_bps = cfg["scp_io_rate_bps"];
        if (cfg.contains("scp_crypto_rate_bps")) m.scp_crypto_rate_bps = cfg["scp_crypto_rate_bps"];
        if (cfg.contains("calibration_a_s")) m.calibration_a_s = cfg["calibration_a_s"];
        if (cfg.contains("calibration_b_s")) m.calibration_b_s = cfg["calibration_b_s"];
        if (cfg.contains("scp_memory_bytes")) m.scp_memory_bytes = cfg["scp_memory_bytes"];
        if (cfg.contains("max_file_bytes")) m.max_file_bytes = cfg["max_file_bytes"];
    }
    if (f.rtt >= 0) m.rtt_s = f.rtt;
    if (f.bandwidth >= 0) m.bandwidth_bps = f.bandwidth;
    if (f.seek >= 0) m.seek_s = f.seek;
    if (f.disk >= 0) m.disk_rate_bps = f.disk;
    if (f.scp_io >= 0) m.scp_io_rate_bps = f.scp_io;
    if (f.scp_crypto >= 0) m.scp_crypto_rate_bps = f.scp_crypto;
    if (f.calibration_a >= 0) m.calibration_a_s = f.calibration_a;
    if (f.calibration_b >= 0) m.calibration_b_s = f.calibration_b;
    if (f.scp_memory >= 0) m.scp_memory_bytes = static_cast<uint64_t>(f.scp_memory);
    if (f.max_file_bytes >= 0) m.max_file_bytes = static_cast<uint64_t>(f.max_file_bytes);
    return m;
}

Coord parse_coord(const std::string& text) {
    Coord c;
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> c.x >> comma >> c.y) || comma != ',')
        throw CLI::ValidationError("coordinate", "expected <x>,<y>, got '" + text + "'");
    return c;
}

BuildConfig grid_point_config(const json& point, const CostModel& cost) {
    BuildConfig cfg;
    cfg.cost = cost;
    cfg.scheme = scheme_from_name(point.at("scheme"));
    if (point.contains("page_size")) cfg.page_size_bytes = point["page_size"];
    if (point.contains("cluster_pages")) cfg.cluster_pages = point["cluster_pages"];
    if (point.contains("hy_threshold")) cfg.hy_threshold = point["hy_threshold"];
    if (point.contains("anchors")) cfg.anchor_count = point["anchors"];
    if (point.contains("compression")) cfg.compression = point["compression"];
    if (point.contains("seed")) cfg.seed = point["seed"];
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"private shortest-path databases over a simulated PIR server"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a synthetic road network");
    SynthConfig syn;
    std::string gen_coords = "network.co", gen_edges = "network.gr";
    gen->add_option("--width", syn.grid_width, "grid width");
    gen->add_option("--height", syn.grid_height, "grid height");
    gen->add_option("--jitter", syn.jitter, "coordinate noise amplitude");
    gen->add_option("--delete-fraction", syn.delete_fraction, "edges to thin out");
    gen->add_flag("--directed", syn.directed, "emit asymmetric directed arcs");
    gen->add_option("--seed", syn.seed, "generator seed");
    gen->add_option("--out-coords", gen_coords, "coordinates output file");
    gen->add_option("--out-edges", gen_edges, "edge output file");

    // ---- build ----
    auto* build = app.add_subcommand("build", "build a database from network files");
    std::string b_coords, b_edges, b_out = "db", b_scheme = "ci", b_plan_mode = "auto";
    BuildConfig bcfg;
    CostFlags b_cost;
    build->add_option("--coords", b_coords, "coordinates file")->required();
    build->add_option("--edges", b_edges, "edge file")->required();
    build->add_option("--out", b_out, "output directory");
    build->add_option("--scheme", b_scheme, "ci | pi | hy | lm | af");
    build->add_option("--page-size", bcfg.page_size_bytes, "page size, bytes");
    build->add_option("--cluster-pages", bcfg.cluster_pages, "pages per region group");
    build->add_option("--hy-threshold", bcfg.hy_threshold, "hybrid replacement threshold");
    build->add_option("--anchors", bcfg.anchor_count, "landmark anchor count");
    build->add_flag("!--no-compression", bcfg.compression, "disable index delta compression");
    build->add_option("--plan-mode", b_plan_mode, "auto | exact | sampled");
    build->add_option("--plan-sample-pairs", bcfg.plan_sample_pairs, "pairs for sampled plans");
    build->add_option("--seed", bcfg.seed, "build seed");
    add_cost_flags(build, b_cost);

    // ---- query ----
    auto* query = app.add_subcommand("query", "answer one private query");
    std::string q_db, q_scheme, q_source, q_target, q_trace;
    CostFlags q_cost;
    query->add_option("--db", q_db, "database directory")->required();
    query->add_option("--scheme", q_scheme, "expected scheme (checked against the database)");
    query->add_option("--source", q_source, "source coordinate <x>,<y>")->required();
    query->add_option("--target", q_target, "target coordinate <x>,<y>")->required();
    query->add_option("--trace", q_trace, "write the adversary-view trace to this file");
    uint64_t q_seed = 1;
    query->add_option("--seed", q_seed, "dummy-page seed");
    add_cost_flags(query, q_cost);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "run a seeded query workload");
    std::string n_db, n_coords, n_edges, n_out = "report.csv";
    WorkloadSpec n_spec;
    CostFlags n_cost;
    bench->add_option("--db", n_db, "database directory")->required();
    bench->add_option("--coords", n_coords, "coordinates file (oracle)")->required();
    bench->add_option("--edges", n_edges, "edge file (oracle)")->required();
    bench->add_option("--pairs", n_spec.pair_count, "number of query pairs");
    bench->add_option("--seed", n_spec.seed, "workload seed");
    bench->add_flag("--exhaustive", n_spec.exhaustive, "all ordered node pairs");
    bench->add_flag("--measure-client", n_spec.measure_client,
                    "include measured client time (CSV no longer reproducible)");
    bench->add_option("--out", n_out, "CSV output file");
    add_cost_flags(bench, n_cost);

    // ---- audit ----
    auto* audit = app.add_subcommand("audit", "verify stored traces are uniform");
    std::string a_traces;
    audit->add_option("--traces", a_traces, "trace text file")->required();

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "benchmark a grid of build configurations");
    std::string s_grid, s_coords, s_edges, s_out = "sweep.csv";
    WorkloadSpec s_spec;
    s_spec.pair_count = 100;
    CostFlags s_cost;
    sweep->add_option("--grid", s_grid, "JSON grid file: [{label, scheme, ...}, ...]")
        ->required();
    sweep->add_option("--coords", s_coords, "coordinates file")->required();
    sweep->add_option("--edges", s_edges, "edge file")->required();
    sweep->add_option("--pairs", s_spec.pair_count, "query pairs per grid point");
    sweep->add_option("--seed", s_spec.seed, "workload seed");
    sweep->add_option("--out", s_out, "CSV output file");
    add_cost_flags(sweep, s_cost);

    // ---- describe ----
    auto* describe = app.add_subcommand("describe", "dump database file structure as text");
    std::string d_db, d_file = "header";
    describe->add_option("--db", d_db, "database directory")->required();
    describe->add_option("--file", d_file, "header | lookup | index | data");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            RoadNetwork net = generate_network(syn);
            write_network_files(net, gen_coords, gen_edges);
            std::cout << "generated " << net.node_count() << " nodes, " << net.edge_count()
                      << " edges -> " << gen_coords << ", " << gen_edges << "\n";
        } else if (*build) {
            bcfg.scheme = scheme_from_name(b_scheme);
            if (b_plan_mode == "exact")
                bcfg.plan_mode = PlanMode::Exact;
            else if (b_plan_mode == "sampled")
                bcfg.plan_mode = PlanMode::Sampled;
            else if (b_plan_mode != "auto")
                throw CLI::ValidationError("--plan-mode", "unknown mode " + b_plan_mode);
            bcfg.cost = resolve_cost(b_cost);
            RoadNetwork net = parse_network_files(b_coords, b_edges);
            Database db = build_database(net, bcfg);
            save_database(db, b_out);
            std::cout << db.manifest;
            std::cout << "saved to " << b_out << "\n";
        } else if (*query) {
            Database db = load_database(q_db);
            if (!q_scheme.empty() && scheme_from_name(q_scheme) != db.header.scheme)
                throw std::runtime_error("database is " + scheme_name(db.header.scheme) +
                                         ", not " + q_scheme);
            CostModel model = resolve_cost(q_cost);
            model.page_size_bytes = db.header.page_size_bytes;
            std::mt19937 rng(static_cast<uint32_t>(q_seed));
            QueryResult res =
                run_query(db, model, parse_coord(q_source), parse_coord(q_target), rng);
            std::cout << "snapped " << res.snapped_source << " (region " << res.source_region
                      << ") -> " << res.snapped_target << " (region " << res.target_region
                      << ")\n";
            if (res.reachable) {
                std::cout << "cost " << res.cost << "\npath";
                for (NodeId id : res.nodes) std::cout << " " << id;
                std::cout << "\n";
            } else {
                std::cout << "unreachable\n";
            }
            std::ostringstream summary;
            summary.precision(6);
            summary << "pir=" << res.time.pir_s << " comm=" << res.time.comm_s
                    << " total=" << res.time.total() << "\n";
            std::cout << summary.str();
            if (!q_trace.empty()) write_text(q_trace, res.trace.to_text() + summary.str());
        } else if (*bench) {
            Database db = load_database(n_db);
            RoadNetwork net = parse_network_files(n_coords, n_edges);
            CostModel model = resolve_cost(n_cost);
            model.page_size_bytes = db.header.page_size_bytes;
            BenchReport report;
            report.rows.push_back(run_workload(db, net, model, n_spec));
            write_text(n_out, report_csv(report));
            const BenchRow& r = report.rows.front();
            std::cout << r.scheme << ": " << r.queries << " queries, mean pir=" << r.pir_s
                      << "s comm=" << r.comm_s << "s total=" << r.total_s << "s -> " << n_out
                      << "\n";
        } else if (*audit) {
            std::ifstream in(a_traces);
            if (!in) throw std::runtime_error("cannot open " + a_traces);
            auto traces = parse_trace_text(in);
            TraceCheck check = verify_uniform_traces(traces);
            if (check.pass) {
                std::cout << "pass: " << traces.size() << " traces, all identical\n";
            } else {
                std::cout << "fail: " << check.detail << "\n";
                return 1;
            }
        } else if (*sweep) {
            std::ifstream in(s_grid);
            if (!in) throw std::runtime_error("cannot open " + s_grid);
            json grid_json = json::parse(in);
            CostModel model = resolve_cost(s_cost);
            std::vector<SweepPoint> grid;
            for (const json& point : grid_json)
                grid.push_back({point.at("label"), grid_point_config(point, model)});
            RoadNetwork net = parse_network_files(s_coords, s_edges);
            BenchReport report = sweep_parameter(net, grid, s_spec);
            write_text(s_out, report_csv(report));
            std::cout << report.rows.size() << " grid points -> " << s_out << "\n";
        } else if (*describe) {
            Database db = load_database(d_db);
            if (d_file == "header") {
                std::cout << describe_header(db.header);
            } else if (d_file == "lookup") {
                std::cout << describe_paged_file(db.lookup);
            } else if (d_file == "index") {
                std::cout << describe_paged_file(db.index);
            } else if (d_file == "data") {
                std::cout << describe_paged_file(db.header.files.combined ? db.index : db.data);
            } else {
                throw std::runtime_error("unknown file " + d_file);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
