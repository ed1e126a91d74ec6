#include "pirpath/pir.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace pirpath {

namespace {
constexpr double kReferencePages = 262144.0;  // 1 GByte of 4 KByte pages
constexpr double kReferenceTime = 1.0;
}  // namespace

double CostModel::per_page_fixed_s() const {
    if (calibration_a_s >= 0.0) return calibration_a_s;
    double page = static_cast<double>(page_size_bytes);
    return seek_s + page / disk_rate_bps + page / scp_io_rate_bps + page / scp_crypto_rate_bps;
}

double CostModel::per_page_log_coeff_s() const {
    if (calibration_b_s >= 0.0) return calibration_b_s;
    double lg = std::log2(kReferencePages);
    return (kReferenceTime - per_page_fixed_s()) / (lg * lg);
}

double CostModel::page_time_s(uint64_t page_count) const {
    if (page_count <= 1) return per_page_fixed_s();
    double lg = std::log2(static_cast<double>(page_count));
    return per_page_fixed_s() + per_page_log_coeff_s() * lg * lg;
}

void check_capacity(const CostModel& model, uint64_t file_bytes) {
    if (file_bytes > model.max_file_bytes)
        throw CapacityError("file of " + std::to_string(file_bytes) +
                            " bytes exceeds the server size cap of " +
                            std::to_string(model.max_file_bytes) + " bytes");
    uint64_t pages = (file_bytes + model.page_size_bytes - 1) / model.page_size_bytes;
    double working_set = model.working_set_factor * std::sqrt(static_cast<double>(pages)) *
                         static_cast<double>(model.page_size_bytes);
    if (working_set > static_cast<double>(model.scp_memory_bytes))
        throw CapacityError("PIR working set of " + std::to_string(working_set) +
                            " bytes exceeds coprocessor memory of " +
                            std::to_string(model.scp_memory_bytes) + " bytes");
}

std::vector<uint8_t> PagedFile::page(uint64_t index) const {
    if (index >= page_count()) throw std::out_of_range("page index past end of " + name);
    std::vector<uint8_t> out(page_size_bytes, 0);
    size_t start = index * page_size_bytes;
    size_t n = std::min<size_t>(page_size_bytes, bytes.size() - start);
    std::memcpy(out.data(), bytes.data() + start, n);
    return out;
}

uint64_t AccessTrace::total_pages() const {
    uint64_t n = 0;
    for (const auto& round : rounds)
        for (const auto& seg : round.segments) n += seg.pages;
    return n;
}

std::string AccessTrace::to_text() const {
    std::ostringstream out;
    out << "header bytes=" << header_bytes << "\n";
    for (size_t r = 0; r < rounds.size(); ++r)
        for (const auto& seg : rounds[r].segments)
            out << "round=" << (r + 1) << " file=" << seg.file_id << " pages=" << seg.pages
                << "\n";
    return out.str();
}

PirSession::PirSession(const CostModel& model, std::vector<const PagedFile*> files)
    : model_(model), files_(std::move(files)) {
    for (const PagedFile* f : files_) check_capacity(model_, f->bytes.size());
}

std::span<const uint8_t> PirSession::download_plain(uint32_t file_id) {
    trace_.header_bytes += files_[file_id]->bytes.size();
    return files_[file_id]->bytes;
}

void PirSession::begin_round() {
    trace_.rounds.emplace_back();
    round_open_ = true;
}

std::vector<uint8_t> PirSession::read_page(uint32_t file_id, uint64_t page_index) {
    if (!round_open_) throw std::logic_error("read_page outside a round");
    auto& segments = trace_.rounds.back().segments;
    if (!segments.empty() && segments.back().file_id == file_id)
        ++segments.back().pages;
    else
        segments.push_back({file_id, 1});
    server_time_s_ += model_.page_time_s(files_[file_id]->page_count());
    return files_[file_id]->page(page_index);
}

ResponseTime simulate_response_time(const AccessTrace& trace, const CostModel& model,
                                    const std::vector<uint64_t>& file_pages) {
    ResponseTime t;
    for (const auto& round : trace.rounds)
        for (const auto& seg : round.segments)
            t.pir_s += seg.pages * model.page_time_s(file_pages.at(seg.file_id));
    uint64_t transferred = trace.header_bytes + trace.total_pages() * model.page_size_bytes;
    t.comm_s = model.rtt_s * static_cast<double>(trace.rounds.size()) +
               static_cast<double>(transferred) / model.bandwidth_bps;
    return t;
}

ResponseTime PirSession::response_time() const {
    ResponseTime t;
    t.pir_s = server_time_s_;
    uint64_t transferred = trace_.header_bytes + trace_.total_pages() * model_.page_size_bytes;
    t.comm_s = model_.rtt_s * static_cast<double>(trace_.rounds.size()) +
               static_cast<double>(transferred) / model_.bandwidth_bps;
    return t;
}

}  // namespace pirpath
