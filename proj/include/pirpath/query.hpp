#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pirpath/storage.hpp"

namespace pirpath {

// PIR-visible file identities, fixed across schemes. HY serves index and
// data from the combined file under kFiFile; LM/AF have no lookup or index.
constexpr uint32_t kFhFile = 0;
constexpr uint32_t kFlFile = 1;
constexpr uint32_t kFiFile = 2;
constexpr uint32_t kFdFile = 3;

/// A complete build: the parsed header plus the paged files a server hosts.
struct Database {
    HeaderInfo header;
    PagedFile header_file;  // serialized header, downloaded in full
    PagedFile lookup;       // empty for LM/AF
    PagedFile index;        // the combined file under HY; empty for LM/AF
    PagedFile data;         // empty under HY (folded into the combined file)
    std::string manifest;

    std::vector<const PagedFile*> pir_files() const {
        return {&header_file, &lookup, &index, &data};
    }
};

/// The public, query-independent retrieval sequence. The full header
/// download always precedes these rounds.
struct QueryPlan {
    std::vector<TraceRound> rounds;
    bool operator==(const QueryPlan&) const = default;
};

QueryPlan derive_query_plan(const HeaderInfo& header);

struct QueryResult {
    bool reachable = false;
    double cost = kInfiniteCost;
    std::vector<NodeId> nodes;  // external ids, source first
    NodeId snapped_source = 0;
    NodeId snapped_target = 0;
    uint32_t source_region = 0;
    uint32_t target_region = 0;
    AccessTrace trace;
    ResponseTime time;
};

/// Executes one private query; the trace is asserted against the plan before
/// returning. The generator drives dummy page choices only.
QueryResult run_query(const Database& db, const CostModel& model, Coord source, Coord target,
                      std::mt19937& rng);

// ---------------------------------------------------------------------------
// Incremental navigation (LM / AF) shared between online querying and
// offline plan derivation: the same search against a different page source.

/// Supplies region page groups. init() performs the fixed two-group opening
/// fetch; fetch_group() is one fetch per region discovered mid-search.
class RegionPageSource {
public:
    virtual ~RegionPageSource() = default;
    virtual void init(uint32_t source_region, uint32_t target_region) = 0;
    virtual std::vector<uint8_t> group(uint32_t region) = 0;
};

/// Plain file-backed source, used for offline plan derivation.
class DirectPageSource : public RegionPageSource {
public:
    DirectPageSource(const HeaderInfo& header, const PagedFile& data)
        : header_(header), data_(data) {}
    void init(uint32_t, uint32_t) override {}
    std::vector<uint8_t> group(uint32_t region) override;

private:
    const HeaderInfo& header_;
    const PagedFile& data_;
};

struct NavOutcome {
    bool reachable = false;
    double cost = kInfiniteCost;
    std::vector<NodeId> nodes;
    NodeId snapped_source = 0;
    NodeId snapped_target = 0;
    /// Region-group fetch slots consumed, counting the fixed opening round as
    /// two (a lone-region opening is padded to two).
    uint32_t fetch_slots = 2;
};

/// A* over landmark estimates (LM) or Dijkstra over arc-flag pruning (AF),
/// fetching a region's pages on first contact.
NavOutcome navigate(const HeaderInfo& header, RegionPageSource& source, Coord s, Coord t);

}  // namespace pirpath
