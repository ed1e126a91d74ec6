#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "pirpath/pir.hpp"

using namespace pirpath;

TEST_CASE("cost model: retrieval from a 1 GByte file costs exactly one second") {
    CostModel m;
    // 1 GByte / 4 KByte pages = 262,144 pages, log2 = 18
    CHECK(fixtures::close(m.page_time_s(262144), 1.0, 1e-12));
}

TEST_CASE("cost model: fixed per-page cost is seek plus three transfers of one page") {
    CostModel m;
    double expected = 0.011 + 4096.0 / 125e6 + 4096.0 / 80e6 + 4096.0 / 10e6;
    CHECK(fixtures::close(m.per_page_fixed_s(), expected, 1e-12));
    CHECK(m.per_page_fixed_s() > 0.0114);
    CHECK(m.per_page_fixed_s() < 0.0115);
}

TEST_CASE("cost model: per-page cost grows monotonically with file size") {
    CostModel m;
    double prev = 0.0;
    for (uint64_t n : {uint64_t(1), uint64_t(2), uint64_t(64), uint64_t(4096), uint64_t(262144),
                       uint64_t(1) << 22}) {
        double t = m.page_time_s(n);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("capacity: the 2.5 GByte size cap is inclusive") {
    CostModel m;
    CHECK_NOTHROW(check_capacity(m, m.max_file_bytes));
    CHECK_THROWS_AS(check_capacity(m, m.max_file_bytes + 1), CapacityError);
    CHECK_NOTHROW(check_capacity(m, 0));
}

TEST_CASE("capacity: PIR working set must fit in coprocessor memory") {
    CostModel m;
    m.scp_memory_bytes = 1 << 20;  // 1 MByte
    // c * sqrt(N) * page > 1 MByte  <=>  sqrt(N) > 25.6  <=>  N >= 656
    CHECK_NOTHROW(check_capacity(m, uint64_t(655) * m.page_size_bytes));
    CHECK_THROWS_AS(check_capacity(m, uint64_t(656) * m.page_size_bytes), CapacityError);
}

TEST_CASE("paged file: pages round-trip and the tail page is zero-padded") {
    PagedFile f;
    f.name = "data";
    f.page_size_bytes = 8;
    f.bytes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(f.page_count() == 2);
    CHECK(f.page(0) == std::vector<uint8_t>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(f.page(1) == std::vector<uint8_t>{9, 10, 0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(f.page(2), std::out_of_range);
}

namespace {

PagedFile make_file(const std::string& name, uint32_t page_size, uint64_t pages) {
    PagedFile f;
    f.name = name;
    f.page_size_bytes = page_size;
    f.bytes.resize(pages * page_size);
    for (size_t i = 0; i < f.bytes.size(); ++i) f.bytes[i] = uint8_t((i * 131 + pages) & 0xFF);
    return f;
}

}  // namespace

TEST_CASE("session: reads return exact page bytes and are recorded without indices") {
    CostModel m;
    m.page_size_bytes = 64;
    PagedFile header = make_file("h", 64, 2);
    PagedFile data = make_file("d", 64, 16);
    PagedFile index = make_file("i", 64, 8);
    PirSession s(m, {&header, &index, &data});

    auto h = s.download_plain(0);
    CHECK(h.size() == 128);

    s.begin_round();
    CHECK(s.read_page(1, 3) == index.page(3));
    s.begin_round();
    CHECK(s.read_page(2, 0) == data.page(0));
    CHECK(s.read_page(2, 15) == data.page(15));
    CHECK(s.read_page(2, 15) == data.page(15));  // repeated reads allowed
    CHECK(s.read_page(1, 7) == index.page(7));

    const AccessTrace& t = s.trace();
    CHECK(t.header_bytes == 128);
    REQUIRE(t.rounds.size() == 2);
    CHECK(t.rounds[0].segments == std::vector<TraceSegment>{{1, 1}});
    // consecutive reads from one file merge into a single segment
    CHECK(t.rounds[1].segments == std::vector<TraceSegment>{{2, 3}, {1, 1}});
    CHECK(t.total_pages() == 5);

    // the textual trace never mentions page indices
    std::string text = t.to_text();
    CHECK(text == "header bytes=128\n"
                  "round=1 file=1 pages=1\n"
                  "round=2 file=2 pages=3\n"
                  "round=2 file=1 pages=1\n");
}

TEST_CASE("session: identical access patterns produce identical traces") {
    CostModel m;
    m.page_size_bytes = 32;
    PagedFile a = make_file("a", 32, 8);
    PagedFile b = make_file("b", 32, 8);

    auto run = [&](uint64_t i1, uint64_t i2) {
        PirSession s(m, {&a, &b});
        s.download_plain(0);
        s.begin_round();
        s.read_page(1, i1);
        s.read_page(1, i2);
        return s.trace();
    };
    CHECK(run(0, 1) == run(7, 3));  // different pages, same observable trace
}

TEST_CASE("session: simulated time matches the model computed independently") {
    CostModel m;  // default 4 KByte pages
    PagedFile header = make_file("h", 4096, 1);
    PagedFile data = make_file("d", 4096, 1024);
    PirSession s(m, {&header, &data});
    s.download_plain(0);
    s.begin_round();
    s.read_page(1, 5);
    s.begin_round();
    s.read_page(1, 9);
    s.read_page(1, 2);

    double a = 0.011 + 4096.0 / 125e6 + 4096.0 / 80e6 + 4096.0 / 10e6;
    double b = (1.0 - a) / (18.0 * 18.0);
    double per_page = a + b * 100.0;  // log2(1024) = 10
    double comm = 0.7 * 2                           // one round trip per round
                  + (4096.0 + 3 * 4096.0) / 49152;  // header and pages over the link
    ResponseTime rt = s.response_time();
    CHECK(fixtures::close(rt.comm_s, comm, 1e-12));
    CHECK(fixtures::close(rt.pir_s, 3 * per_page, 1e-12));
    CHECK(fixtures::close(s.elapsed_s(), comm + 3 * per_page, 1e-12));

    // the free-standing computation from the recorded trace agrees
    ResponseTime redo = simulate_response_time(s.trace(), m, {1, 1024});
    CHECK(fixtures::close(redo.pir_s, rt.pir_s, 1e-12));
    CHECK(fixtures::close(redo.comm_s, rt.comm_s, 1e-12));
}

TEST_CASE("response time: one round, one page, 4 KByte header") {
    CostModel m;
    AccessTrace t;
    t.header_bytes = 4096;
    t.rounds.push_back({{{1, 1}}});
    ResponseTime rt = simulate_response_time(t, m, {1, 262144});
    CHECK(fixtures::close(rt.comm_s, 0.7 + 8192.0 / 49152.0, 1e-12));
    CHECK(fixtures::close(rt.pir_s, 1.0, 1e-12));

    ResponseTime empty = simulate_response_time(AccessTrace{}, m, {});
    CHECK(empty.total() == 0.0);
}

TEST_CASE("cost model: explicit calibration constants override the derived ones") {
    CostModel m;
    m.calibration_a_s = 0.5;
    m.calibration_b_s = 0.001;
    CHECK(m.per_page_fixed_s() == 0.5);
    CHECK(fixtures::close(m.page_time_s(1 << 10), 0.5 + 0.001 * 100.0, 1e-12));
}

TEST_CASE("session: reading outside a round is an error") {
    CostModel m;
    m.page_size_bytes = 32;
    PagedFile a = make_file("a", 32, 4);
    PirSession s(m, {&a});
    CHECK_THROWS_AS(s.read_page(0, 0), std::logic_error);
}

TEST_CASE("session: registering an oversized file is rejected") {
    CostModel m;
    m.page_size_bytes = 32;
    m.max_file_bytes = 128;
    PagedFile a = make_file("a", 32, 5);  // 160 bytes
    CHECK_THROWS_AS(PirSession(m, {&a}), CapacityError);
}
