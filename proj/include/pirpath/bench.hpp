#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pirpath/database.hpp"

namespace pirpath {

class BenchError : public std::exception {
public:
    BenchError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

struct WorkloadSpec {
    uint64_t pair_count = 1000;
    uint64_t seed = 1;
    bool exhaustive = false;      // all ordered node pairs instead of sampling
    bool measure_client = false;  // wall-clock client time; breaks CSV reproducibility
};

struct TraceCheck {
    bool pass = true;
    size_t divergent_trace = 0;  // first trace that differs from trace 0
    size_t divergent_round = 0;  // 1-based; 0 = header size or round count differs
    std::string detail;
};

/// All traces must be identical to count as oblivious; reports the first
/// divergence otherwise.
TraceCheck verify_uniform_traces(const std::vector<AccessTrace>& traces);

struct BenchRow {
    std::string label;   // sweep point label; scheme name for plain runs
    std::string scheme;
    uint64_t queries = 0;
    double pir_s = 0, comm_s = 0, client_s = 0, total_s = 0;  // per-query means
    uint64_t lookup_pages = 0, index_pages = 0, data_pages = 0;  // PIR pages per query
    uint64_t header_bytes = 0, lookup_bytes = 0, index_bytes = 0, data_bytes = 0;
    double fd_utilization = 0;  // payload fraction of the region data section
    bool ok = true;             // false = capacity-refused sweep point ("Nil")
    std::string note;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

constexpr const char* kBenchCsvVersion = "pirpath-bench-v1";

/// Runs the workload, verifying every cost against a fresh global Dijkstra
/// and the traces against each other; any mismatch throws.
BenchRow run_workload(const Database& db, const RoadNetwork& net, const CostModel& model,
                      const WorkloadSpec& spec);

std::string report_csv(const BenchReport& report);

/// One labelled build per grid point; capacity-refused builds become Nil rows
/// instead of aborting the sweep.
struct SweepPoint {
    std::string label;
    BuildConfig config;
};

BenchReport sweep_parameter(const RoadNetwork& net, const std::vector<SweepPoint>& grid,
                            const WorkloadSpec& spec);

/// Reads traces back from their textual export; unknown lines are ignored.
std::vector<AccessTrace> parse_trace_text(std::istream& in);

/// Payload fraction of the region data section, recomputed from the pages.
double fd_utilization(const Database& db);

}  // namespace pirpath
