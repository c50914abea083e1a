#ifndef SVP_ACOUSTICS_HPP
#define SVP_ACOUSTICS_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "svp/errors.hpp"
#include "svp/record.hpp"

namespace svp {

/// Water state around the sensor. `sound_speed` is absent when it is the
/// quantity being measured.
struct MediumState {
    double temperature = 20.0;  // degC
    double pressure = 101.325;  // kPa, absolute
    double density = 998.2;     // kg/m^3
    std::optional<double> sound_speed;  // m/s
};

struct ReflectorMaterial {
    std::string name = "stainless steel";
    double density = 7900.0;     // kg/m^3
    double sound_speed = 5790.0; // m/s

    friend bool operator==(const ReflectorMaterial&, const ReflectorMaterial&) = default;
};

/// Two-reflector sensor. All lengths are one-way.
struct SensorGeometry {
    double base_length = 0.06;             // m, reflector 1 -> reflector 2
    double first_reflector_offset = 0.01;  // m, emitter -> reflector 1
    double carrier_frequency = 2.0e6;      // Hz
    double first_reflector_transmission = 0.5;
    ReflectorMaterial reflector_material;

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Instrument measurement ranges; out-of-range values are flagged, not rejected.
struct ValidationBounds {
    double sound_speed_min = 1375.0;
    double sound_speed_max = 1900.0;
    double temperature_min = -2.0;
    double temperature_max = 35.0;
    double pressure_min = 0.0;
    double pressure_max = 20000.0;

    friend bool operator==(const ValidationBounds&, const ValidationBounds&) = default;
};

/// Pure-water sound speed polynomial c(T) = sum c_i T^i at atmospheric pressure.
struct PureWaterEquation {
    std::array<double, 6> coefficients{1402.38754, 5.03711129, -5.80852166e-2,
                                       3.34198834e-4, -1.47800417e-6, 3.14643091e-9};
    double min_temperature = 0.0;
    double max_temperature = 95.0;
};

inline void check_medium(const MediumState& m)
{
    if (!(m.density > 0.0)) throw DomainError("medium density must be positive");
    if (m.sound_speed && !(*m.sound_speed > 0.0)) throw DomainError("medium sound speed must be positive");
}

inline void check_geometry(const SensorGeometry& g)
{
    if (!(g.base_length > 0.0)) throw DomainError("base_length must be positive");
    if (!(g.first_reflector_offset >= 0.0)) throw DomainError("first_reflector_offset must be non-negative");
    if (!(g.carrier_frequency > 0.0)) throw DomainError("carrier_frequency must be positive");
    if (!(g.first_reflector_transmission > 0.0 && g.first_reflector_transmission <= 1.0))
        throw DomainError("first_reflector_transmission must be in (0, 1]");
    if (!(g.reflector_material.density > 0.0 && g.reflector_material.sound_speed > 0.0))
        throw DomainError("reflector density and sound speed must be positive");
}

/// z = rho * c, Pa*s/m.
inline double acoustic_impedance(double density, double sound_speed)
{
    if (!(density > 0.0) || !(sound_speed > 0.0)) throw DomainError("impedance needs positive density and sound speed");
    return density * sound_speed;
}

/// Signed pressure reflection coefficient (z_water - z_reflector) / (z_water + z_reflector).
/// Negative when the reflector is acoustically harder than the water.
inline double reflection_coefficient(double z_water, double z_reflector)
{
    if (!(z_water > 0.0) || !(z_reflector > 0.0)) throw DomainError("impedances must be positive");
    return (z_water - z_reflector) / (z_water + z_reflector);
}

inline double reflection_magnitude(double z_water, double z_reflector)
{
    return std::abs(reflection_coefficient(z_water, z_reflector));
}

inline double reflection_magnitude(const MediumState& water, const ReflectorMaterial& reflector)
{
    if (!water.sound_speed) throw DomainError("medium sound speed required for reflection coefficient");
    return reflection_magnitude(acoustic_impedance(water.density, *water.sound_speed),
                                acoustic_impedance(reflector.density, reflector.sound_speed));
}

/// Round-trip echo difference over the base: c = 2L / dt.
inline double sound_speed_from_tof(double delta_t, double base_length)
{
    if (!(delta_t > 0.0)) throw DomainError("time of flight must be positive");
    if (!(base_length > 0.0)) throw DomainError("base_length must be positive");
    return 2.0 * base_length / delta_t;
}

/// Attenuation in Np/m over the round-trip path 2L between the reflectors.
/// `u_near` must already carry the first-reflector transmission correction.
/// Positive when the far echo is weaker.
inline double attenuation_coefficient(double u_near, double u_far, double base_length)
{
    if (!(u_near > 0.0) || !(u_far > 0.0)) throw DomainError("echo amplitudes must be positive");
    if (!(base_length > 0.0)) throw DomainError("base_length must be positive");
    return std::log(u_near / u_far) / (2.0 * base_length);
}

/// Scales the reflector-1 echo onto the reflector-2 echo's interface losses:
/// the far echo crosses the semitransparent reflector twice.
inline double corrected_near_amplitude(double u_first, double transmission)
{
    if (!(transmission > 0.0 && transmission <= 1.0)) throw DomainError("transmission must be in (0, 1]");
    return u_first * transmission * transmission;
}

inline constexpr double kDecibelPerNeper = 20.0 / std::numbers::ln10;

inline double nepers_to_decibels(double alpha_np) { return alpha_np * kDecibelPerNeper; }

inline double pure_water_sound_speed(double temperature, const PureWaterEquation& eq = {})
{
    if (!(temperature >= eq.min_temperature && temperature <= eq.max_temperature))
        throw DomainError("temperature " + std::to_string(temperature) + " C outside pure-water equation range");
    double c = 0.0;
    for (auto it = eq.coefficients.rbegin(); it != eq.coefficients.rend(); ++it) c = c * temperature + *it;
    return c;
}

struct ValidityReport {
    std::uint16_t flags = 0;

    bool all_valid() const noexcept { return (flags & (RecordFlag::SoundSpeedRange | RecordFlag::TemperatureRange |
                                                       RecordFlag::PressureRange)) == 0; }
    bool sound_speed_out() const noexcept { return has_flag(flags, RecordFlag::SoundSpeedRange); }
    bool temperature_out() const noexcept { return has_flag(flags, RecordFlag::TemperatureRange); }
    bool pressure_out() const noexcept { return has_flag(flags, RecordFlag::PressureRange); }
};

/// Range check against the instrument bounds. NaN counts as out of range.
inline ValidityReport validate_record(const DeviceRecord& r, const ValidationBounds& b = {})
{
    const auto inside = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    ValidityReport rep;
    if (!inside(r.sound_speed, b.sound_speed_min, b.sound_speed_max)) set_flag(rep.flags, RecordFlag::SoundSpeedRange);
    if (!inside(r.temperature, b.temperature_min, b.temperature_max)) set_flag(rep.flags, RecordFlag::TemperatureRange);
    if (!inside(r.pressure, b.pressure_min, b.pressure_max)) set_flag(rep.flags, RecordFlag::PressureRange);
    return rep;
}

} // namespace svp

#endif // SVP_ACOUSTICS_HPP
