#ifndef SVP_SETTINGS_HPP
#define SVP_SETTINGS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "svp/acoustics.hpp"
#include "svp/bytes.hpp"
#include "svp/crc16.hpp"
#include "svp/tdc.hpp"

namespace svp {

struct DeviceSettings {
    ComparatorConfig comparator;
    AmplitudeCalibration amplitude_cal;
    SensorGeometry geometry;
    double cycle_rate = 18.0;  // Hz
    ValidationBounds bounds;
    TdcOptions tdc;

    friend bool operator==(const DeviceSettings&, const DeviceSettings&) = default;
};

inline void check_settings(const DeviceSettings& s)
{
    check_comparator(s.comparator);
    check_calibration(s.amplitude_cal);
    check_geometry(s.geometry);
    check_tdc_options(s.tdc);
    if (s.geometry.reflector_material.name.size() > 0xFF) throw DomainError("reflector name longer than 255 bytes");
    if (s.tdc.matched_crossing > 0xFF) throw DomainError("matched_crossing must fit in one byte");
    if (!(s.cycle_rate > 0.0) || !std::isfinite(s.cycle_rate)) throw DomainError("cycle_rate must be positive");
    const auto& b = s.bounds;
    if (!(b.sound_speed_min < b.sound_speed_max && b.temperature_min < b.temperature_max &&
          b.pressure_min < b.pressure_max))
        throw DomainError("validation bounds need min < max");
}

inline constexpr std::uint8_t kSettingsSchemaVersion = 1;

// Settings block v1, little-endian, fixed field order:
//   u8 version, u8 threshold, f64 AMC_H, f64 AMC_L, f64 V_CAL,
//   f64 base_length, f64 first_reflector_offset, f64 carrier_frequency,
//   f64 first_reflector_transmission, str8 reflector name, f64 reflector density,
//   f64 reflector sound speed, f64 cycle_rate, 6 x f64 bounds (c, T, P min/max),
//   f64 lsb, u8 interpolation, u8 matched_crossing, f64 cfd_fraction,
//   f64 receive_bandwidth_ratio, f64 echo_gap_periods, f64 lookback_periods
inline std::vector<std::uint8_t> encode_settings(const DeviceSettings& s)
{
    ByteWriter w;
    w.u8(kSettingsSchemaVersion);
    w.u8(static_cast<std::uint8_t>(s.comparator.threshold));
    w.f64(s.amplitude_cal.amc_high);
    w.f64(s.amplitude_cal.amc_low);
    w.f64(s.amplitude_cal.v_cal);
    w.f64(s.geometry.base_length);
    w.f64(s.geometry.first_reflector_offset);
    w.f64(s.geometry.carrier_frequency);
    w.f64(s.geometry.first_reflector_transmission);
    w.str8(s.geometry.reflector_material.name);
    w.f64(s.geometry.reflector_material.density);
    w.f64(s.geometry.reflector_material.sound_speed);
    w.f64(s.cycle_rate);
    w.f64(s.bounds.sound_speed_min);
    w.f64(s.bounds.sound_speed_max);
    w.f64(s.bounds.temperature_min);
    w.f64(s.bounds.temperature_max);
    w.f64(s.bounds.pressure_min);
    w.f64(s.bounds.pressure_max);
    w.f64(s.tdc.lsb);
    w.u8(static_cast<std::uint8_t>(s.tdc.interpolation));
    w.u8(static_cast<std::uint8_t>(s.tdc.matched_crossing));
    w.f64(s.tdc.cfd_fraction);
    w.f64(s.tdc.receive_bandwidth_ratio);
    w.f64(s.tdc.echo_gap_periods);
    w.f64(s.tdc.lookback_periods);
    return std::move(w).take();
}

/// Parses and validates a settings block; throws ParseError or DomainError.
inline DeviceSettings decode_settings(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    const auto version = r.u8();
    if (version != kSettingsSchemaVersion) throw ParseError("unsupported settings version " + std::to_string(version), 0);
    DeviceSettings s;
    s.comparator.threshold = r.u8();
    s.amplitude_cal.amc_high = r.f64();
    s.amplitude_cal.amc_low = r.f64();
    s.amplitude_cal.v_cal = r.f64();
    s.geometry.base_length = r.f64();
    s.geometry.first_reflector_offset = r.f64();
    s.geometry.carrier_frequency = r.f64();
    s.geometry.first_reflector_transmission = r.f64();
    s.geometry.reflector_material.name = r.str8();
    s.geometry.reflector_material.density = r.f64();
    s.geometry.reflector_material.sound_speed = r.f64();
    s.cycle_rate = r.f64();
    s.bounds.sound_speed_min = r.f64();
    s.bounds.sound_speed_max = r.f64();
    s.bounds.temperature_min = r.f64();
    s.bounds.temperature_max = r.f64();
    s.bounds.pressure_min = r.f64();
    s.bounds.pressure_max = r.f64();
    s.tdc.lsb = r.f64();
    const auto interp = r.u8();
    if (interp > 1) throw ParseError("unknown interpolation mode", r.offset() - 1);
    s.tdc.interpolation = static_cast<Interpolation>(interp);
    s.tdc.matched_crossing = r.u8();
    s.tdc.cfd_fraction = r.f64();
    s.tdc.receive_bandwidth_ratio = r.f64();
    s.tdc.echo_gap_periods = r.f64();
    s.tdc.lookback_periods = r.f64();
    if (r.remaining() != 0) throw ParseError("trailing bytes after settings block", r.offset());
    check_settings(s);
    return s;
}

/// Non-volatile settings area: the settings block followed by its CRC-16 (LE).
struct SettingsStore {
    std::vector<std::uint8_t> bytes;

    static SettingsStore from(const DeviceSettings& s)
    {
        SettingsStore store;
        store.bytes = encode_settings(s);
        const auto crc = crc16_ccitt_false(store.bytes);
        store.bytes.push_back(static_cast<std::uint8_t>(crc & 0xFF));
        store.bytes.push_back(static_cast<std::uint8_t>(crc >> 8));
        return store;
    }
};

struct SettingsLoad {
    DeviceSettings settings;
    bool corrupt = false;
};

/// Empty store yields defaults; a bad CRC or invalid block yields defaults and `corrupt`.
inline SettingsLoad load_settings(const SettingsStore& store)
{
    if (store.bytes.empty()) return {};
    if (store.bytes.size() < 2) return {DeviceSettings{}, true};
    const auto body = std::span(store.bytes).first(store.bytes.size() - 2);
    const auto crc = static_cast<std::uint16_t>(store.bytes[store.bytes.size() - 2] | (store.bytes.back() << 8));
    if (crc != crc16_ccitt_false(body)) return {DeviceSettings{}, true};
    try {
        return {decode_settings(body), false};
    } catch (const std::exception&) {
        return {DeviceSettings{}, true};
    }
}

} // namespace svp

#endif // SVP_SETTINGS_HPP
