#ifndef SVP_BYTES_HPP
#define SVP_BYTES_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svp/errors.hpp"

namespace svp {

// Little-endian field writer for the wire and settings formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

    void str8(std::string_view s)
    {
        if (s.size() > 0xFF) throw DomainError("string longer than 255 bytes");
        u8(static_cast<std::uint8_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const std::vector<std::uint8_t>& data() const& { return buf_; }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
    void put(std::uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }

    std::string str8()
    {
        const std::size_t n = u8();
        need(n);
        std::string s(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return s;
    }

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n) throw ParseError("unexpected end of data", pos_);
    }

    std::uint64_t get(int n)
    {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace svp

#endif // SVP_BYTES_HPP
