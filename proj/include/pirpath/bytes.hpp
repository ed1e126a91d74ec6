#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace pirpath {

// Little-endian scalar packing used by every on-disk structure.

class ByteWriter {
public:
    explicit ByteWriter(std::vector<uint8_t>& out) : out_(out) {}

    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void bytes(const uint8_t* p, size_t n) { out_.insert(out_.end(), p, p + n); }
    size_t size() const { return out_.size(); }

private:
    void raw(const void* p, size_t n) {
        size_t off = out_.size();
        out_.resize(off + n);
        std::memcpy(out_.data() + off, p, n);
    }
    std::vector<uint8_t>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return scalar<uint16_t>(); }
    uint32_t u32() { return scalar<uint32_t>(); }
    uint64_t u64() { return scalar<uint64_t>(); }
    double f64() { return scalar<double>(); }
    std::span<const uint8_t> take(size_t n) {
        if (pos_ + n > data_.size()) throw std::runtime_error("byte reader: truncated data");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    size_t remaining() const { return data_.size() - pos_; }
    size_t pos() const { return pos_; }
    void seek(size_t p) { pos_ = p; }

private:
    template <typename T>
    T scalar() {
        T v;
        std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
        return v;
    }
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace pirpath
