#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pirpath/kdtree.hpp"  // CapacityError

namespace pirpath {

/// Hardware-assisted PIR cost model. Rates follow the reference setup: a
/// secure coprocessor in front of a disk-resident database, pages retrieved
/// obliviously at a per-page cost that grows with (log2 N)^2, and a modest
/// client link. The log coefficient is calibrated so one page retrieval from
/// a 1 GByte file of 4 KByte pages costs exactly one second.
struct CostModel {
    uint32_t page_size_bytes = 4096;
    double seek_s = 0.011;
    double disk_rate_bps = 125e6;        // sustained disk transfer
    double scp_io_rate_bps = 80e6;       // coprocessor I/O
    double scp_crypto_rate_bps = 10e6;   // coprocessor crypto throughput
    double bandwidth_bps = 48.0 * 1024;  // client link, 48 KByte/s
    double rtt_s = 0.7;                  // per interaction round
    uint64_t scp_memory_bytes = 32ull << 20;
    double working_set_factor = 10.0;    // c in c * sqrt(N) * pageSize
    uint64_t max_file_bytes = 2'684'354'560;  // 2.5 GByte, inclusive

    // explicit calibration overrides for a + b * (log2 N)^2; negative = derive
    // from the device rates and the 1 GByte reference point
    double calibration_a_s = -1.0;
    double calibration_b_s = -1.0;

    /// Fixed per-page cost: seek plus one page through disk, coprocessor I/O
    /// and crypto.
    double per_page_fixed_s() const;
    /// Coefficient of (log2 N)^2, calibrated at the 1 GByte reference point.
    double per_page_log_coeff_s() const;
    /// Server-side cost of one oblivious page retrieval from an N-page file.
    double page_time_s(uint64_t page_count) const;
};

/// Rejects files the simulated server cannot host: larger than the size cap
/// or with a PIR working set (c * sqrt(N) pages) beyond coprocessor memory.
void check_capacity(const CostModel& model, uint64_t file_bytes);

/// A page-addressable database file held by the PIR server.
struct PagedFile {
    std::string name;
    uint32_t page_size_bytes = 4096;
    std::vector<uint8_t> bytes;

    uint64_t page_count() const {
        return (bytes.size() + page_size_bytes - 1) / page_size_bytes;
    }
    /// Page contents, zero-padded to the page size past end of file.
    std::vector<uint8_t> page(uint64_t index) const;
};

/// One trace entry: how many pages were retrieved from which file. Page
/// indices are deliberately absent; the adversary observing the exchange
/// learns only these counts.
struct TraceSegment {
    uint32_t file_id;
    uint32_t pages;
    bool operator==(const TraceSegment&) const = default;
};

struct TraceRound {
    std::vector<TraceSegment> segments;
    bool operator==(const TraceRound&) const = default;
};

/// Everything an observer of the client-server exchange sees: the plain
/// header download size and, per round, per-file page counts.
struct AccessTrace {
    uint64_t header_bytes = 0;
    std::vector<TraceRound> rounds;
    bool operator==(const AccessTrace&) const = default;

    uint64_t total_pages() const;
    std::string to_text() const;
};

/// Simulated response-time split: oblivious-retrieval time at the server and
/// link time (one round trip per round plus transfer of header and pages).
/// Client-side computation is measured, never modeled.
struct ResponseTime {
    double pir_s = 0.0;
    double comm_s = 0.0;
    double total() const { return pir_s + comm_s; }
};

/// file_pages[id] is the page count of the file retrieved from.
ResponseTime simulate_response_time(const AccessTrace& trace, const CostModel& model,
                                    const std::vector<uint64_t>& file_pages);

/// A client-server PIR exchange against a set of registered files. Records
/// the externally visible trace and accumulates simulated response time.
class PirSession {
public:
    PirSession(const CostModel& model, std::vector<const PagedFile*> files);

    /// Plain (non-private) download of a whole file, ahead of any PIR round.
    std::span<const uint8_t> download_plain(uint32_t file_id);

    void begin_round();
    /// Oblivious retrieval of one page inside the current round.
    std::vector<uint8_t> read_page(uint32_t file_id, uint64_t page_index);

    const AccessTrace& trace() const { return trace_; }
    ResponseTime response_time() const;
    double elapsed_s() const { return response_time().total(); }

    uint64_t page_count(uint32_t file_id) const { return files_[file_id]->page_count(); }

private:
    const CostModel model_;
    std::vector<const PagedFile*> files_;
    AccessTrace trace_;
    double server_time_s_ = 0.0;
    bool round_open_ = false;
};

}  // namespace pirpath
