#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pirpath/pir.hpp"
#include "pirpath/precompute.hpp"
#include "pirpath/records.hpp"

namespace pirpath {

class BuildError : public std::exception {
public:
    BuildError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

class DecodeError : public std::exception {
public:
    DecodeError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

enum class Scheme : uint8_t { CI = 0, PI = 1, HY = 2, LM = 3, AF = 4 };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Region data file: one page group per region, record count then records.

PagedFile build_region_data_file(const RoadNetwork& net, const PackedKdTree& tree,
                                 const RecordLayout& layout, const RecordExtras& extras);

std::vector<DecodedNode> decode_region_group(std::span<const uint8_t> group,
                                             const RecordLayout& layout);

// ---------------------------------------------------------------------------
// Network index file: one entry per region pair, ascending rank. Pages carry
// a slot directory (entry count, first key rank, entry offsets); an entry
// smaller than a page never straddles pages, larger entries start a fresh
// page and continue onto marker-led continuation pages.

constexpr uint16_t kSelfContained = 0xFFFF;
constexpr uint16_t kContinuationMarker = 0xFFFF;
constexpr uint32_t kIndexPageHeaderBytes = 2 + 4;  // entry count + first key rank

/// One (i,j) payload in rank order: region ids for a set entry, original edge
/// ids for a subgraph entry.
struct IndexPayload {
    bool is_subgraph = false;
    std::vector<uint32_t> elements;  // ascending
};

enum class EntryFormat : uint8_t { Set = 0, Subgraph = 1, Mixed = 2 };

/// Delta form of one entry against an earlier entry in the same page.
struct DeltaRecord {
    uint16_t reference_slot = kSelfContained;
    std::vector<uint32_t> additions;   // ascending
    std::vector<uint32_t> exclusions;  // ascending; set entries only
};

/// Delta against the in-page candidate sharing the most elements; exclusions
/// (smallest id first) keep the inflated cardinality within m.
DeltaRecord compress_set_delta(const std::vector<uint32_t>& members,
                               const std::vector<std::vector<uint32_t>>& page_entries, uint64_t m);

/// Subgraph variant: additions only, reference never shrinks.
DeltaRecord compress_subgraph_delta(const std::vector<uint32_t>& edges,
                                    const std::vector<std::vector<uint32_t>>& page_entries);

struct IndexSpan {
    uint32_t first_page = 0;
    uint32_t pages = 1;
    bool operator==(const IndexSpan&) const = default;
};

struct NetworkIndexFile {
    PagedFile file;
    std::vector<IndexSpan> spans;  // by rank
    uint64_t max_span = 1;
};

NetworkIndexFile build_network_index_file(const RoadNetwork& net,
                                          const std::vector<IndexPayload>& payloads,
                                          EntryFormat format, uint32_t page_size_bytes, uint64_t m,
                                          bool compression);

struct EdgeTuple {
    NodeId from;
    NodeId to;
    double weight;
    bool operator==(const EdgeTuple&) const = default;
    auto operator<=>(const EdgeTuple&) const = default;
};

/// An index entry inflated back to logical content: a superset of the stored
/// set or subgraph (delta references may drag along extra genuine elements).
struct DecodedEntry {
    bool is_subgraph = false;
    std::vector<uint32_t> regions;  // set entries, ascending
    std::vector<EdgeTuple> edges;   // subgraph entries, ascending
};

/// pages[0] must be the page holding the entry of `rank` (per the look-up
/// file); continuation pages, if any, must follow in order.
DecodedEntry decode_index_entry(const std::vector<std::vector<uint8_t>>& pages,
                                uint32_t page_size_bytes, uint64_t rank, EntryFormat format);

// ---------------------------------------------------------------------------
// Look-up file: dense 4-byte first-page entries, addressed by rank.

constexpr uint32_t kLookupEntryBytes = 4;

PagedFile build_lookup_file(const std::vector<IndexSpan>& spans, uint32_t page_size_bytes);

struct LookupLocation {
    uint64_t page;
    uint32_t slot;  // entry index within the page
};

inline LookupLocation lookup_location(uint64_t rank, uint32_t page_size_bytes) {
    uint64_t per_page = page_size_bytes / kLookupEntryBytes;
    return {rank / per_page, static_cast<uint32_t>(rank % per_page)};
}

uint32_t decode_lookup_entry(std::span<const uint8_t> page, uint32_t slot);

// ---------------------------------------------------------------------------
// Header: everything the client downloads up front — the tree, the query
// plan, the record layout and per-file metadata.

struct FileMeta {
    uint64_t lookup_pages = 0;
    uint64_t index_pages = 0;
    uint64_t data_pages = 0;
    bool combined = false;  // index and data concatenated into one file
};

struct HeaderInfo {
    Scheme scheme = Scheme::CI;
    bool directed = false;
    uint32_t page_size_bytes = 4096;
    PackedKdTree tree;  // leaf members omitted on disk
    RecordLayout layout;
    PlanConstants plan;
    uint64_t max_index_span = 1;     // pages fetched from F_i per query
    uint64_t max_region_fetches = 1; // LM/AF: region groups fetched per query
    FileMeta files;
};

std::vector<uint8_t> build_header(const HeaderInfo& info);
HeaderInfo parse_header(std::span<const uint8_t> bytes);

// ---------------------------------------------------------------------------

/// HY only: index pages then data pages in a single file, so the adversary
/// cannot tell set-answered from subgraph-answered queries apart.
PagedFile build_combined_file(const PagedFile& index, const PagedFile& data);

/// Human-readable structure dump for the describe command.
std::string describe_paged_file(const PagedFile& file);
std::string describe_header(const HeaderInfo& info);

}  // namespace pirpath
