#ifndef SVP_RECORD_HPP
#define SVP_RECORD_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "svp/bytes.hpp"

namespace svp {

/// Validity bitmask carried by every record.
enum class RecordFlag : std::uint16_t {
    SoundSpeedRange = 1u << 0,
    TemperatureRange = 1u << 1,
    PressureRange = 1u << 2,
    MeasurementInvalid = 1u << 3,
    ThresholdAdapted = 1u << 4,
};

constexpr std::uint16_t operator|(RecordFlag a, RecordFlag b)
{
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(a) | static_cast<std::uint16_t>(b));
}

constexpr std::uint16_t operator|(std::uint16_t a, RecordFlag b)
{
    return static_cast<std::uint16_t>(a | static_cast<std::uint16_t>(b));
}

constexpr bool has_flag(std::uint16_t flags, RecordFlag f) { return (flags & static_cast<std::uint16_t>(f)) != 0; }

constexpr void set_flag(std::uint16_t& flags, RecordFlag f) { flags |= static_cast<std::uint16_t>(f); }

/// One work-cycle result.
struct DeviceRecord {
    std::uint32_t sequence = 0;
    std::uint64_t tick = 0;        // cycles since power-on
    double timestamp = 0.0;        // s since power-on
    double sound_speed = std::numeric_limits<double>::quiet_NaN();  // m/s
    double attenuation = std::numeric_limits<double>::quiet_NaN();  // Np/m
    double u_near = std::numeric_limits<double>::quiet_NaN();       // mV, transmission-corrected
    double u_far = std::numeric_limits<double>::quiet_NaN();        // mV
    double first_wave_ratio = std::numeric_limits<double>::quiet_NaN();
    double temperature = 0.0;      // degC
    double pressure = 0.0;         // kPa
    std::uint16_t flags = 0;

    friend bool operator==(const DeviceRecord&, const DeviceRecord&) = default;
};

inline constexpr std::size_t kRecordPayloadSize = 4 + 8 + 8 * 8 + 2;

inline std::vector<std::uint8_t> encode_record(const DeviceRecord& r)
{
    ByteWriter w;
    w.u32(r.sequence);
    w.u64(r.tick);
    w.f64(r.timestamp);
    w.f64(r.sound_speed);
    w.f64(r.attenuation);
    w.f64(r.u_near);
    w.f64(r.u_far);
    w.f64(r.first_wave_ratio);
    w.f64(r.temperature);
    w.f64(r.pressure);
    w.u16(r.flags);
    return std::move(w).take();
}

inline DeviceRecord decode_record(std::span<const std::uint8_t> payload)
{
    if (payload.size() != kRecordPayloadSize)
        throw ParseError("record payload must be " + std::to_string(kRecordPayloadSize) + " bytes", payload.size());
    ByteReader r(payload);
    DeviceRecord rec;
    rec.sequence = r.u32();
    rec.tick = r.u64();
    rec.timestamp = r.f64();
    rec.sound_speed = r.f64();
    rec.attenuation = r.f64();
    rec.u_near = r.f64();
    rec.u_far = r.f64();
    rec.first_wave_ratio = r.f64();
    rec.temperature = r.f64();
    rec.pressure = r.f64();
    rec.flags = r.u16();
    return rec;
}

} // namespace svp

#endif // SVP_RECORD_HPP
