#ifndef SVP_CONSTANTS_HPP
#define SVP_CONSTANTS_HPP

#include <string>
#include <string_view>

#include "svp/acoustics.hpp"
#include "svp/kv_config.hpp"

namespace svp {

/// Calibration and range constants normally loaded from `data/constants.conf`.
struct InstrumentConstants {
    PureWaterEquation pure_water;
    ValidationBounds bounds;
    // Span of commercial time-of-flight sound speed sensors.
    double sensor_sound_speed_min = 1400.0;
    double sensor_sound_speed_max = 1600.0;
};

inline InstrumentConstants constants_from_config(const KeyValueConfig& cfg)
{
    InstrumentConstants k;
    for (std::size_t i = 0; i < k.pure_water.coefficients.size(); ++i)
        k.pure_water.coefficients[i] = cfg.number("pure_water.c" + std::to_string(i));
    k.pure_water.min_temperature = cfg.number("pure_water.min_temperature");
    k.pure_water.max_temperature = cfg.number("pure_water.max_temperature");

    k.bounds.sound_speed_min = cfg.number("bounds.sound_speed_min");
    k.bounds.sound_speed_max = cfg.number("bounds.sound_speed_max");
    k.bounds.temperature_min = cfg.number("bounds.temperature_min");
    k.bounds.temperature_max = cfg.number("bounds.temperature_max");
    k.bounds.pressure_min = cfg.number("bounds.pressure_min");
    k.bounds.pressure_max = cfg.number("bounds.pressure_max");

    k.sensor_sound_speed_min = cfg.number("sensor.sound_speed_min", k.sensor_sound_speed_min);
    k.sensor_sound_speed_max = cfg.number("sensor.sound_speed_max", k.sensor_sound_speed_max);

    if (!(k.pure_water.min_temperature < k.pure_water.max_temperature) ||
        !(k.bounds.sound_speed_min < k.bounds.sound_speed_max) ||
        !(k.bounds.temperature_min < k.bounds.temperature_max) ||
        !(k.bounds.pressure_min < k.bounds.pressure_max))
        throw ParseError("constants: every range needs min < max", 0);
    return k;
}

inline InstrumentConstants parse_constants(std::string_view text)
{
    return constants_from_config(KeyValueConfig::parse(text));
}

inline InstrumentConstants load_constants(const std::string& path)
{
    return constants_from_config(KeyValueConfig::load(path));
}

} // namespace svp

#endif // SVP_CONSTANTS_HPP
