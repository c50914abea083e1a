#ifndef SVP_PROTOCOL_HPP
#define SVP_PROTOCOL_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svp/crc16.hpp"
#include "svp/errors.hpp"

namespace svp {

// Frame: [0xA5][opcode][len u16 LE][payload][crc u16 LE], CRC over opcode..payload.

inline constexpr std::uint8_t kFrameSync = 0xA5;
inline constexpr std::size_t kFrameOverhead = 6;
inline constexpr std::size_t kMaxPayload = 1024;

enum class Opcode : std::uint8_t {
    // host -> device
    SetMode = 0x01,
    ReadRecord = 0x02,
    ReadMem = 0x03,
    FormatMem = 0x04,
    WriteSettings = 0x05,
    ReadSettings = 0x06,
    Status = 0x07,
    // device -> host
    Ack = 0x80,
    Nak = 0x81,
    Record = 0x82,
    Settings = 0x83,
    StatusReport = 0x84,
    Telemetry = 0x85,
};

enum class NakCode : std::uint8_t {
    UnknownOpcode = 0x01,
    WrongMode = 0x02,
    BadPayload = 0x03,
    NoData = 0x04,
    InvalidSettings = 0x05,
};

struct Frame {
    std::uint8_t opcode = 0;
    std::vector<std::uint8_t> payload;

    Frame() = default;
    Frame(std::uint8_t op, std::vector<std::uint8_t> data = {}) : opcode(op), payload(std::move(data)) {}
    Frame(Opcode op, std::vector<std::uint8_t> data = {}) : Frame(static_cast<std::uint8_t>(op), std::move(data)) {}

    bool is(Opcode op) const { return opcode == static_cast<std::uint8_t>(op); }

    friend bool operator==(const Frame&, const Frame&) = default;
};

inline std::vector<std::uint8_t> encode_frame(const Frame& f)
{
    if (f.payload.size() > kMaxPayload) throw DomainError("frame payload exceeds " + std::to_string(kMaxPayload) + " bytes");
    std::vector<std::uint8_t> out;
    out.reserve(f.payload.size() + kFrameOverhead);
    out.push_back(kFrameSync);
    out.push_back(f.opcode);
    out.push_back(static_cast<std::uint8_t>(f.payload.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(f.payload.size() >> 8));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    const auto crc = crc16_ccitt_false(std::span(out).subspan(1));
    out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
    out.push_back(static_cast<std::uint8_t>(crc >> 8));
    return out;
}

inline void append_frame(std::vector<std::uint8_t>& out, const Frame& f)
{
    const auto bytes = encode_frame(f);
    out.insert(out.end(), bytes.begin(), bytes.end());
}

/// Decodes exactly one frame occupying all of `bytes`.
inline Frame decode_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kFrameOverhead) throw ParseError("frame shorter than header and CRC", bytes.size());
    if (bytes[0] != kFrameSync) throw ParseError("missing sync byte", 0);
    const std::size_t len = bytes[2] | (std::size_t{bytes[3]} << 8);
    if (len > kMaxPayload) throw ParseError("payload length exceeds limit", 2);
    if (bytes.size() != len + kFrameOverhead) throw ParseError("frame length mismatch", bytes.size());
    const auto crc = static_cast<std::uint16_t>(bytes[4 + len] | (bytes[5 + len] << 8));
    if (crc != crc16_ccitt_false(bytes.subspan(1, 3 + len))) throw ParseError("CRC mismatch", 4 + len);
    return Frame(bytes[1], std::vector<std::uint8_t>(bytes.begin() + 4, bytes.begin() + 4 + static_cast<std::ptrdiff_t>(len)));
}

/// Incremental byte-stream decoder. Bytes before a sync are skipped; a frame
/// with a bad CRC is dropped whole and counted.
class FrameParser {
public:
    void push(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    /// Next complete frame, or nullopt when more bytes are needed.
    std::optional<Frame> next()
    {
        while (true) {
            while (!buf_.empty() && buf_.front() != kFrameSync) {
                buf_.pop_front();
                ++skipped_;
            }
            if (buf_.size() < 4) return std::nullopt;
            const std::size_t len = buf_[2] | (std::size_t{buf_[3]} << 8);
            if (len > kMaxPayload) {
                buf_.pop_front();
                ++skipped_;
                continue;
            }
            if (buf_.size() < len + kFrameOverhead) return std::nullopt;

            std::vector<std::uint8_t> raw(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(len + kFrameOverhead));
            buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(len + kFrameOverhead));
            try {
                return decode_frame(raw);
            } catch (const ParseError&) {
                ++crc_errors_;
            }
        }
    }

    std::vector<Frame> drain()
    {
        std::vector<Frame> out;
        while (auto f = next()) out.push_back(std::move(*f));
        return out;
    }

    std::uint32_t crc_errors() const noexcept { return crc_errors_; }
    std::uint64_t skipped_bytes() const noexcept { return skipped_; }
    std::size_t pending_bytes() const noexcept { return buf_.size(); }

private:
    std::deque<std::uint8_t> buf_;
    std::uint32_t crc_errors_ = 0;
    std::uint64_t skipped_ = 0;
};

} // namespace svp

#endif // SVP_PROTOCOL_HPP
