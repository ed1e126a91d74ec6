#include "pirpath/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

namespace pirpath {

TraceCheck verify_uniform_traces(const std::vector<AccessTrace>& traces) {
    TraceCheck out;
    if (traces.size() < 2) return out;
    const AccessTrace& ref = traces.front();
    for (size_t i = 1; i < traces.size(); ++i) {
        const AccessTrace& t = traces[i];
        if (t.header_bytes != ref.header_bytes || t.rounds.size() != ref.rounds.size()) {
            out.pass = false;
            out.divergent_trace = i;
            out.detail = "trace " + std::to_string(i) + " differs in shape (header bytes or round count)";
            return out;
        }
        for (size_t r = 0; r < ref.rounds.size(); ++r) {
            if (t.rounds[r] == ref.rounds[r]) continue;
            out.pass = false;
            out.divergent_trace = i;
            out.divergent_round = r + 1;
            out.detail = "trace " + std::to_string(i) + " diverges at round " +
                         std::to_string(r + 1);
            return out;
        }
    }
    return out;
}

double fd_utilization(const Database& db) {
    const HeaderInfo& h = db.header;
    if (h.files.data_pages == 0) return 0.0;
    const PagedFile& file = h.files.combined ? db.index : db.data;
    const uint32_t group_pages = h.tree.cluster_pages;
    uint64_t used = 0;
    for (const auto& leaf : h.tree.leaves) {
        std::vector<uint8_t> group;
        for (uint32_t k = 0; k < group_pages; ++k) {
            auto page = file.page(uint64_t(leaf.first_page_in_fd) + k);
            group.insert(group.end(), page.begin(), page.end());
        }
        used += kGroupHeaderBytes;
        for (const auto& node : decode_region_group(group, h.layout))
            used += h.layout.record_bytes(static_cast<uint32_t>(node.arcs.size()));
    }
    return double(used) / (double(h.files.data_pages) * h.page_size_bytes);
}

namespace {

std::vector<std::pair<uint32_t, uint32_t>> workload_pairs(const RoadNetwork& net,
                                                          const WorkloadSpec& spec) {
    const uint32_t n = static_cast<uint32_t>(net.node_count());
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    if (spec.exhaustive) {
        for (uint32_t s = 0; s < n; ++s)
            for (uint32_t t = 0; t < n; ++t)
                if (s != t) pairs.push_back({s, t});
        return pairs;
    }
    std::mt19937 rng(static_cast<uint32_t>(spec.seed));
    std::uniform_int_distribution<uint32_t> pick(0, n - 1);
    while (pairs.size() < spec.pair_count) {
        uint32_t s = pick(rng), t = pick(rng);
        if (n > 1 && s == t) continue;
        pairs.push_back({s, t});
    }
    return pairs;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

BenchRow run_workload(const Database& db, const RoadNetwork& net, const CostModel& model,
                      const WorkloadSpec& spec) {
    BenchRow row;
    row.scheme = scheme_name(db.header.scheme);
    row.label = row.scheme;
    row.header_bytes = db.header_file.bytes.size();
    row.lookup_bytes = db.lookup.bytes.size();
    row.index_bytes = db.index.bytes.size();
    row.data_bytes = db.data.bytes.size();
    row.fd_utilization = fd_utilization(db);

    auto pairs = workload_pairs(net, spec);
    row.queries = pairs.size();
    if (pairs.empty()) return row;

    std::mt19937 dummy_rng(static_cast<uint32_t>(spec.seed) ^ 0x5bd1e995u);
    std::vector<AccessTrace> traces;
    traces.reserve(pairs.size());
    double pir = 0, comm = 0, client = 0;
    for (const auto& [s, t] : pairs) {
        auto started = std::chrono::steady_clock::now();
        QueryResult res = run_query(db, model, net.coords[s], net.coords[t], dummy_rng);
        if (spec.measure_client) {
            std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
            client += took.count();
        }
        auto want = dijkstra(net, s, t);
        bool both_unreachable = !want && !res.reachable;
        if (!both_unreachable) {
            double w = want ? want->total_cost : kInfiniteCost;
            if (!res.reachable || std::abs(res.cost - w) > 1e-9 * std::max(1.0, std::abs(w)))
                throw BenchError("cost mismatch for pair (" + std::to_string(net.id_of(s)) +
                                 "," + std::to_string(net.id_of(t)) + "): got " +
                                 std::to_string(res.cost) + ", oracle " + std::to_string(w));
        }
        pir += res.time.pir_s;
        comm += res.time.comm_s;
        traces.push_back(res.trace);
    }

    TraceCheck check = verify_uniform_traces(traces);
    if (!check.pass) throw BenchError("oblivious-trace check failed: " + check.detail);

    double n = double(pairs.size());
    row.pir_s = pir / n;
    row.comm_s = comm / n;
    row.client_s = client / n;
    row.total_s = row.pir_s + row.comm_s + row.client_s;
    std::map<uint32_t, uint64_t> pages;
    for (const auto& round : traces.front().rounds)
        for (const auto& seg : round.segments) pages[seg.file_id] += seg.pages;
    row.lookup_pages = pages[kFlFile];
    row.index_pages = pages[kFiFile];
    row.data_pages = pages[kFdFile];
    return row;
}

std::string report_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "# " << kBenchCsvVersion << "\n"
        << "label,scheme,queries,pir_s,comm_s,client_s,total_s,"
        << "lookup_pages,index_pages,data_pages,"
        << "header_bytes,lookup_bytes,index_bytes,data_bytes,fd_utilization,status,note\n";
    for (const BenchRow& r : report.rows) {
        if (!r.ok) {
            out << r.label << "," << r.scheme << ",,,,,,,,,,,,,,Nil," << r.note << "\n";
            continue;
        }
        out << r.label << "," << r.scheme << "," << r.queries << "," << fmt(r.pir_s) << ","
            << fmt(r.comm_s) << "," << fmt(r.client_s) << "," << fmt(r.total_s) << ","
            << r.lookup_pages << "," << r.index_pages << "," << r.data_pages << ","
            << r.header_bytes << "," << r.lookup_bytes << "," << r.index_bytes << ","
            << r.data_bytes << "," << fmt(r.fd_utilization) << ",ok," << r.note << "\n";
    }
    return out.str();
}

BenchReport sweep_parameter(const RoadNetwork& net, const std::vector<SweepPoint>& grid,
                            const WorkloadSpec& spec) {
    if (grid.empty()) throw BenchError("sweep grid is empty");
    BenchReport report;
    for (const SweepPoint& point : grid) {
        try {
            Database db = build_database(net, point.config);
            CostModel model = point.config.cost;
            model.page_size_bytes = point.config.page_size_bytes;
            BenchRow row = run_workload(db, net, model, spec);
            row.label = point.label;
            report.rows.push_back(std::move(row));
        } catch (const BuildError& e) {
            report.rows.push_back(
                {point.label, scheme_name(point.config.scheme), 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                 0, 0, false, e.what()});
        } catch (const CapacityError& e) {
            report.rows.push_back(
                {point.label, scheme_name(point.config.scheme), 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                 0, 0, false, e.what()});
        }
    }
    return report;
}

std::vector<AccessTrace> parse_trace_text(std::istream& in) {
    std::vector<AccessTrace> traces;
    std::string line;
    while (std::getline(in, line)) {
        unsigned long long bytes = 0, round = 0, file = 0, pages = 0;
        if (std::sscanf(line.c_str(), "header bytes=%llu", &bytes) == 1) {
            traces.emplace_back();
            traces.back().header_bytes = bytes;
        } else if (std::sscanf(line.c_str(), "round=%llu file=%llu pages=%llu", &round, &file,
                               &pages) == 3) {
            if (traces.empty()) throw BenchError("trace text: round line before any header line");
            auto& rounds = traces.back().rounds;
            while (rounds.size() < round) rounds.emplace_back();
            rounds[round - 1].segments.push_back(
                {static_cast<uint32_t>(file), static_cast<uint32_t>(pages)});
        }
        // anything else (summary lines, blanks) is ignored
    }
    return traces;
}

}  // namespace pirpath
