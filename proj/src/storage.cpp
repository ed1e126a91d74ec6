#include "pirpath/storage.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pirpath/bytes.hpp"

namespace pirpath {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::CI: return "ci";
        case Scheme::PI: return "pi";
        case Scheme::HY: return "hy";
        case Scheme::LM: return "lm";
        case Scheme::AF: return "af";
    }
    throw BuildError("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::CI, Scheme::PI, Scheme::HY, Scheme::LM, Scheme::AF})
        if (scheme_name(s) == name) return s;
    throw BuildError("unknown scheme name: " + name);
}

namespace {

void pad_to_pages(PagedFile& f) {
    size_t rem = f.bytes.size() % f.page_size_bytes;
    if (rem) f.bytes.resize(f.bytes.size() + (f.page_size_bytes - rem), 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// region data

PagedFile build_region_data_file(const RoadNetwork& net, const PackedKdTree& tree,
                                 const RecordLayout& layout, const RecordExtras& extras) {
    const uint32_t B = tree.page_size_bytes;
    const uint64_t group_bytes = uint64_t(tree.cluster_pages) * B;
    PagedFile f;
    f.name = "data";
    f.page_size_bytes = B;
    f.bytes.assign(tree.region_count() * group_bytes, 0);

    for (const auto& leaf : tree.leaves) {
        std::vector<uint8_t> group;
        ByteWriter w(group);
        w.u16(static_cast<uint16_t>(leaf.members.size()));
        for (uint32_t node : leaf.members) encode_record(net, node, layout, extras, group);
        if (group.size() > group_bytes)
            throw BuildError("region " + std::to_string(leaf.region_id) +
                             " overflows its page group");
        std::copy(group.begin(), group.end(),
                  f.bytes.begin() + uint64_t(leaf.first_page_in_fd) * B);
    }
    return f;
}

std::vector<DecodedNode> decode_region_group(std::span<const uint8_t> group,
                                             const RecordLayout& layout) {
    ByteReader r(group);
    uint16_t count = r.u16();
    std::vector<DecodedNode> nodes;
    nodes.reserve(count);
    for (uint16_t i = 0; i < count; ++i) nodes.push_back(decode_record(r, layout));
    return nodes;
}

// ---------------------------------------------------------------------------
// delta compression

namespace {

size_t overlap_count(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    size_t n = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            ++i;
        else if (b[j] < a[i])
            ++j;
        else
            ++n, ++i, ++j;
    }
    return n;
}

std::vector<uint32_t> difference(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

uint16_t best_reference(const std::vector<uint32_t>& entry,
                        const std::vector<std::vector<uint32_t>>& page_entries) {
    size_t best = 0;
    uint16_t slot = kSelfContained;
    for (size_t s = 0; s < page_entries.size(); ++s) {
        size_t n = overlap_count(entry, page_entries[s]);
        if (n > best) {
            best = n;
            slot = static_cast<uint16_t>(s);
        }
    }
    return slot;
}

}  // namespace

DeltaRecord compress_set_delta(const std::vector<uint32_t>& members,
                               const std::vector<std::vector<uint32_t>>& page_entries,
                               uint64_t m) {
    DeltaRecord d;
    d.reference_slot = best_reference(members, page_entries);
    if (d.reference_slot == kSelfContained) {
        d.additions = members;
        return d;
    }
    const auto& ref = page_entries[d.reference_slot];
    d.additions = difference(members, ref);
    // drop just enough of the reference's surplus to stay within m
    uint64_t inflated = ref.size() + d.additions.size();
    if (inflated > m) {
        std::vector<uint32_t> surplus = difference(ref, members);
        uint64_t need = inflated - m;
        if (need > surplus.size()) {  // |members| > m; cannot hold the bound
            d.reference_slot = kSelfContained;
            d.additions = members;
            d.exclusions.clear();
            return d;
        }
        d.exclusions.assign(surplus.begin(), surplus.begin() + need);
    }
    return d;
}

DeltaRecord compress_subgraph_delta(const std::vector<uint32_t>& edges,
                                    const std::vector<std::vector<uint32_t>>& page_entries) {
    DeltaRecord d;
    d.reference_slot = best_reference(edges, page_entries);
    d.additions = d.reference_slot == kSelfContained
                      ? edges
                      : difference(edges, page_entries[d.reference_slot]);
    return d;
}

// ---------------------------------------------------------------------------
// network index

namespace {

std::vector<uint8_t> encode_entry(const RoadNetwork& net, bool is_subgraph,
                                  const DeltaRecord& d, EntryFormat format) {
    std::vector<uint8_t> out;
    ByteWriter w(out);
    if (format == EntryFormat::Mixed) w.u8(is_subgraph ? 1 : 0);
    w.u16(d.reference_slot);
    w.u32(static_cast<uint32_t>(d.additions.size()));
    if (is_subgraph) {
        for (uint32_t e : d.additions) {
            const auto& edge = net.edges[e];
            w.u32(net.id_of(edge.from));
            w.u32(net.id_of(edge.to));
            w.f64(edge.weight);
        }
    } else {
        w.u32(static_cast<uint32_t>(d.exclusions.size()));
        for (uint32_t r : d.additions) w.u32(r);
        for (uint32_t r : d.exclusions) w.u32(r);
    }
    return out;
}

struct PageState {
    uint64_t first_rank = 0;
    std::vector<std::vector<uint8_t>> entries;
    std::vector<std::vector<uint32_t>> inflated;  // per slot; {} for kind mismatches later
    std::vector<bool> kinds;
    size_t used = 0;

    size_t size_with(size_t extra_entry) const {
        return kIndexPageHeaderBytes + 2 * (entries.size() + 1) + used + extra_entry;
    }
};

void flush_page(PagedFile& f, PageState& page, uint32_t B) {
    if (page.entries.empty()) return;
    std::vector<uint8_t> bytes;
    ByteWriter w(bytes);
    w.u16(static_cast<uint16_t>(page.entries.size()));
    w.u32(static_cast<uint32_t>(page.first_rank));
    uint16_t off = static_cast<uint16_t>(kIndexPageHeaderBytes + 2 * page.entries.size());
    for (const auto& e : page.entries) {
        w.u16(off);
        off = static_cast<uint16_t>(off + e.size());
    }
    for (const auto& e : page.entries) w.bytes(e.data(), e.size());
    bytes.resize(B, 0);
    f.bytes.insert(f.bytes.end(), bytes.begin(), bytes.end());
    page = PageState{};
}

}  // namespace

NetworkIndexFile build_network_index_file(const RoadNetwork& net,
                                          const std::vector<IndexPayload>& payloads,
                                          EntryFormat format, uint32_t page_size_bytes, uint64_t m,
                                          bool compression) {
    const uint32_t B = page_size_bytes;
    NetworkIndexFile out;
    out.file.name = "index";
    out.file.page_size_bytes = B;
    out.spans.reserve(payloads.size());

    PageState page;
    for (uint64_t rank = 0; rank < payloads.size(); ++rank) {
        const IndexPayload& p = payloads[rank];
        DeltaRecord self;
        self.additions = p.elements;
        std::vector<uint8_t> self_bytes = encode_entry(net, p.is_subgraph, self, format);

        std::vector<uint8_t> chosen = self_bytes;
        DeltaRecord delta = self;
        if (compression && !page.entries.empty()) {
            std::vector<std::vector<uint32_t>> candidates(page.entries.size());
            for (size_t s = 0; s < page.entries.size(); ++s)
                if (page.kinds[s] == p.is_subgraph) candidates[s] = page.inflated[s];
            DeltaRecord d = p.is_subgraph ? compress_subgraph_delta(p.elements, candidates)
                                          : compress_set_delta(p.elements, candidates, m);
            std::vector<uint8_t> d_bytes = encode_entry(net, p.is_subgraph, d, format);
            if (d_bytes.size() < self_bytes.size()) {
                chosen = std::move(d_bytes);
                delta = std::move(d);
            }
        }

        uint32_t current = static_cast<uint32_t>(out.file.bytes.size() / B);
        if (!page.entries.empty() && page.size_with(chosen.size()) <= B) {
            // joins the open page
        } else if (kIndexPageHeaderBytes + 2 + self_bytes.size() <= B) {
            flush_page(out.file, page, B);
            current = static_cast<uint32_t>(out.file.bytes.size() / B);
            page.first_rank = rank;
            chosen = self_bytes;  // fresh page: nothing to reference
            delta = self;
        } else {
            // multi-page entry: fresh pages, raw continuation after a marker
            flush_page(out.file, page, B);
            current = static_cast<uint32_t>(out.file.bytes.size() / B);
            std::vector<uint8_t> first;
            ByteWriter w(first);
            w.u16(1);
            w.u32(static_cast<uint32_t>(rank));
            w.u16(kIndexPageHeaderBytes + 2);
            size_t take = std::min<size_t>(B - first.size(), self_bytes.size());
            w.bytes(self_bytes.data(), take);
            first.resize(B, 0);
            out.file.bytes.insert(out.file.bytes.end(), first.begin(), first.end());
            uint32_t pages = 1;
            for (size_t pos = take; pos < self_bytes.size(); pos += B - 2, ++pages) {
                std::vector<uint8_t> cont;
                ByteWriter cw(cont);
                cw.u16(kContinuationMarker);
                size_t n = std::min<size_t>(B - 2, self_bytes.size() - pos);
                cw.bytes(self_bytes.data() + pos, n);
                cont.resize(B, 0);
                out.file.bytes.insert(out.file.bytes.end(), cont.begin(), cont.end());
            }
            out.spans.push_back({current, pages});
            out.max_span = std::max<uint64_t>(out.max_span, pages);
            continue;
        }

        if (page.entries.empty()) page.first_rank = rank;
        page.used += chosen.size();
        page.entries.push_back(std::move(chosen));
        // inflated logical content for later references on this page
        std::vector<uint32_t> inflated;
        if (delta.reference_slot == kSelfContained) {
            inflated = p.elements;
        } else {
            inflated = page.inflated[delta.reference_slot];
            std::vector<uint32_t> merged;
            std::set_union(inflated.begin(), inflated.end(), delta.additions.begin(),
                           delta.additions.end(), std::back_inserter(merged));
            inflated = difference(merged, delta.exclusions);
        }
        page.inflated.push_back(std::move(inflated));
        page.kinds.push_back(p.is_subgraph);
        out.spans.push_back({current, 1});
    }
    flush_page(out.file, page, B);
    if (out.file.bytes.empty()) out.file.bytes.assign(B, 0);
    return out;
}

// ---------------------------------------------------------------------------
// index entry decoding

namespace {

/// Reader over a run of index pages that steps over the 2-byte continuation
/// marker when an oversized entry runs past a page boundary.
class PageCursor {
public:
    PageCursor(const std::vector<std::vector<uint8_t>>& pages, uint32_t B, size_t offset)
        : pages_(pages), B_(B), page_(0), off_(offset) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return scalar<uint16_t>(); }
    uint32_t u32() { return scalar<uint32_t>(); }
    double f64() { return scalar<double>(); }

private:
    std::vector<uint8_t> take(size_t n) {
        std::vector<uint8_t> out;
        while (out.size() < n) {
            if (off_ == B_) {
                ++page_;
                if (page_ >= pages_.size()) throw DecodeError("index entry truncated");
                ByteReader r(pages_[page_]);
                if (r.u16() != kContinuationMarker)
                    throw DecodeError("index entry runs into a non-continuation page");
                off_ = 2;
            }
            size_t take_now = std::min<size_t>(n - out.size(), B_ - off_);
            const auto& p = pages_[page_];
            out.insert(out.end(), p.begin() + off_, p.begin() + off_ + take_now);
            off_ += take_now;
        }
        return out;
    }
    template <typename T>
    T scalar() {
        T v;
        auto b = take(sizeof(T));
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }

    const std::vector<std::vector<uint8_t>>& pages_;
    uint32_t B_;
    size_t page_;
    size_t off_;
};

}  // namespace

DecodedEntry decode_index_entry(const std::vector<std::vector<uint8_t>>& pages,
                                uint32_t page_size_bytes, uint64_t rank, EntryFormat format) {
    if (pages.empty()) throw DecodeError("no pages given");
    ByteReader header(pages[0]);
    uint16_t count = header.u16();
    if (count == kContinuationMarker) throw DecodeError("entry starts on a continuation page");
    uint32_t first_rank = header.u32();
    if (rank < first_rank || rank >= first_rank + count)
        throw DecodeError("rank " + std::to_string(rank) + " is not on this page");
    std::vector<uint16_t> offsets(count);
    for (auto& o : offsets) o = header.u16();

    auto decode_slot = [&](auto&& self, uint32_t slot) -> DecodedEntry {
        if (slot >= count) throw DecodeError("slot out of range");
        PageCursor c(pages, page_size_bytes, offsets[slot]);
        DecodedEntry e;
        switch (format) {
            case EntryFormat::Set: e.is_subgraph = false; break;
            case EntryFormat::Subgraph: e.is_subgraph = true; break;
            case EntryFormat::Mixed: e.is_subgraph = c.u8() != 0; break;
        }
        uint16_t ref = c.u16();
        if (e.is_subgraph) {
            uint32_t adds = c.u32();
            for (uint32_t i = 0; i < adds; ++i) {
                EdgeTuple t;
                t.from = c.u32();
                t.to = c.u32();
                t.weight = c.f64();
                e.edges.push_back(t);
            }
            std::sort(e.edges.begin(), e.edges.end());
        } else {
            uint32_t adds = c.u32();
            uint32_t excls = c.u32();
            for (uint32_t i = 0; i < adds; ++i) e.regions.push_back(c.u32());
            std::vector<uint32_t> drop(excls);
            for (auto& r : drop) r = c.u32();
            std::sort(e.regions.begin(), e.regions.end());
            if (ref != kSelfContained) {
                if (ref >= slot) throw DecodeError("reference chain is not backward");
                DecodedEntry base = self(self, ref);
                if (base.is_subgraph) throw DecodeError("set entry references a subgraph");
                std::vector<uint32_t> merged;
                std::set_union(base.regions.begin(), base.regions.end(), e.regions.begin(),
                               e.regions.end(), std::back_inserter(merged));
                e.regions = difference(merged, drop);
            }
            return e;
        }
        if (ref != kSelfContained) {
            if (ref >= slot) throw DecodeError("reference chain is not backward");
            DecodedEntry base = self(self, ref);
            if (!base.is_subgraph) throw DecodeError("subgraph entry references a set");
            std::vector<EdgeTuple> merged;
            std::set_union(base.edges.begin(), base.edges.end(), e.edges.begin(), e.edges.end(),
                           std::back_inserter(merged));
            e.edges = std::move(merged);
        }
        return e;
    };
    return decode_slot(decode_slot, static_cast<uint32_t>(rank - first_rank));
}

// ---------------------------------------------------------------------------
// look-up file

PagedFile build_lookup_file(const std::vector<IndexSpan>& spans, uint32_t page_size_bytes) {
    PagedFile f;
    f.name = "lookup";
    f.page_size_bytes = page_size_bytes;
    ByteWriter w(f.bytes);
    for (const auto& s : spans) w.u32(s.first_page);
    pad_to_pages(f);
    return f;
}

uint32_t decode_lookup_entry(std::span<const uint8_t> page, uint32_t slot) {
    ByteReader r(page);
    r.seek(uint64_t(slot) * kLookupEntryBytes);
    return r.u32();
}

// ---------------------------------------------------------------------------
// header

namespace {
constexpr uint32_t kHeaderMagic = 0x44485450;  // "PTHD"
constexpr uint16_t kHeaderVersion = 1;
}  // namespace

std::vector<uint8_t> build_header(const HeaderInfo& info) {
    std::vector<uint8_t> out;
    ByteWriter w(out);
    w.u32(kHeaderMagic);
    w.u16(kHeaderVersion);
    w.u8(static_cast<uint8_t>(info.scheme));
    w.u8(info.directed ? 1 : 0);
    w.u32(info.page_size_bytes);

    const PackedKdTree& t = info.tree;
    w.u32(t.cluster_pages);
    w.u32(t.max_record_bytes);
    w.f64(t.bounds.xmin);
    w.f64(t.bounds.ymin);
    w.f64(t.bounds.xmax);
    w.f64(t.bounds.ymax);
    w.u32(static_cast<uint32_t>(t.root));
    w.u8(t.root_is_leaf ? 1 : 0);
    w.u32(static_cast<uint32_t>(t.internals.size()));
    for (const auto& n : t.internals) {
        w.u8(n.axis);
        w.u8(uint8_t((n.left_is_leaf ? 1 : 0) | (n.right_is_leaf ? 2 : 0)));
        w.f64(n.split);
        w.u32(static_cast<uint32_t>(n.left));
        w.u32(static_cast<uint32_t>(n.right));
    }
    w.u32(t.region_count());
    for (const auto& leaf : t.leaves) {
        w.f64(leaf.rect.xmin);
        w.f64(leaf.rect.ymin);
        w.f64(leaf.rect.xmax);
        w.f64(leaf.rect.ymax);
        w.u32(leaf.first_page_in_fd);
    }

    w.u8(info.layout.neighbor_region ? 1 : 0);
    w.u16(info.layout.anchor_count);
    w.u16(info.layout.flag_bytes);

    w.u64(info.plan.m);
    w.u64(info.plan.h);
    w.u64(info.plan.r);
    w.u64(info.max_index_span);
    w.u64(info.max_region_fetches);

    w.u64(info.files.lookup_pages);
    w.u64(info.files.index_pages);
    w.u64(info.files.data_pages);
    w.u8(info.files.combined ? 1 : 0);
    return out;
}

HeaderInfo parse_header(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.u32() != kHeaderMagic) throw DecodeError("bad header magic");
    if (r.u16() != kHeaderVersion) throw DecodeError("unsupported header version");
    HeaderInfo info;
    info.scheme = static_cast<Scheme>(r.u8());
    info.directed = r.u8() != 0;
    info.page_size_bytes = r.u32();

    PackedKdTree& t = info.tree;
    t.page_size_bytes = info.page_size_bytes;
    t.cluster_pages = r.u32();
    t.max_record_bytes = r.u32();
    t.group_capacity = t.cluster_pages * t.page_size_bytes - kGroupHeaderBytes;
    t.bounds.xmin = r.f64();
    t.bounds.ymin = r.f64();
    t.bounds.xmax = r.f64();
    t.bounds.ymax = r.f64();
    t.root = static_cast<int32_t>(r.u32());
    t.root_is_leaf = r.u8() != 0;
    uint32_t internals = r.u32();
    t.internals.resize(internals);
    for (auto& n : t.internals) {
        n.axis = r.u8();
        uint8_t flags = r.u8();
        n.left_is_leaf = flags & 1;
        n.right_is_leaf = flags & 2;
        n.split = r.f64();
        n.left = static_cast<int32_t>(r.u32());
        n.right = static_cast<int32_t>(r.u32());
    }
    uint32_t regions = r.u32();
    t.leaves.resize(regions);
    for (uint32_t i = 0; i < regions; ++i) {
        auto& leaf = t.leaves[i];
        leaf.region_id = i;
        leaf.rect.xmin = r.f64();
        leaf.rect.ymin = r.f64();
        leaf.rect.xmax = r.f64();
        leaf.rect.ymax = r.f64();
        leaf.first_page_in_fd = r.u32();
    }

    info.layout.neighbor_region = r.u8() != 0;
    info.layout.anchor_count = r.u16();
    info.layout.flag_bytes = r.u16();

    info.plan.m = r.u64();
    info.plan.h = r.u64();
    info.plan.r = r.u64();
    info.max_index_span = r.u64();
    info.max_region_fetches = r.u64();

    info.files.lookup_pages = r.u64();
    info.files.index_pages = r.u64();
    info.files.data_pages = r.u64();
    info.files.combined = r.u8() != 0;
    return info;
}

// ---------------------------------------------------------------------------

PagedFile build_combined_file(const PagedFile& index, const PagedFile& data) {
    if (index.page_size_bytes != data.page_size_bytes)
        throw BuildError("page size mismatch between index and data files");
    PagedFile f;
    f.name = "combined";
    f.page_size_bytes = index.page_size_bytes;
    f.bytes = index.bytes;
    pad_to_pages(f);
    f.bytes.insert(f.bytes.end(), data.bytes.begin(), data.bytes.end());
    pad_to_pages(f);
    return f;
}

std::string describe_paged_file(const PagedFile& file) {
    std::ostringstream out;
    out << "file " << file.name << ": " << file.page_count() << " pages of "
        << file.page_size_bytes << " bytes (" << file.bytes.size() << " bytes)\n";
    return out.str();
}

std::string describe_header(const HeaderInfo& info) {
    std::ostringstream out;
    out << "scheme " << scheme_name(info.scheme) << (info.directed ? " directed" : " undirected")
        << ", page size " << info.page_size_bytes << ", cluster pages "
        << info.tree.cluster_pages << "\n";
    out << "regions " << info.tree.region_count() << ", internal nodes "
        << info.tree.internals.size() << ", max record " << info.tree.max_record_bytes
        << " bytes\n";
    out << "plan m=" << info.plan.m << " h=" << info.plan.h << " r=" << info.plan.r
        << " index-span=" << info.max_index_span
        << " region-fetches=" << info.max_region_fetches << "\n";
    out << "pages: lookup=" << info.files.lookup_pages << " index=" << info.files.index_pages
        << " data=" << info.files.data_pages << (info.files.combined ? " (combined)" : "")
        << "\n";
    out << "record layout: neighbor-region=" << (info.layout.neighbor_region ? "yes" : "no")
        << " anchors=" << info.layout.anchor_count << " flag-bytes=" << info.layout.flag_bytes
        << "\n";
    return out.str();
}

}  // namespace pirpath
