#ifndef SVP_SYNTH_HPP
#define SVP_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "svp/acoustics.hpp"
#include "svp/waveform.hpp"

namespace svp {

struct SynthesisScenario {
    SensorGeometry geometry;
    MediumState medium{.sound_speed = 1500.0};
    double true_attenuation = 0.0;  // Np/m
    double emit_amplitude = 60.0;   // mV
    int burst_cycles = 10;
    double noise_rms = 0.0;         // mV
    std::uint64_t seed = 1;
    double sample_rate = 100.0e6;   // Hz
    double tail = 10.0e-6;          // s recorded after the second echo ends
};

/// Exact parameters of the synthesized echoes; the closed-loop oracle.
struct GroundTruth {
    double t1 = 0.0;  // s, echo 1 burst start
    double t2 = 0.0;  // s, echo 2 burst start
    double a1 = 0.0;  // mV, echo 1 envelope peak
    double a2 = 0.0;  // mV, echo 2 envelope peak
    double sound_speed = 0.0;
    double attenuation = 0.0;
    double burst_duration = 0.0;  // s
    double reflection_magnitude = 0.0;

    double peak_time1() const { return t1 + burst_duration / 2.0; }
    double peak_time2() const { return t2 + burst_duration / 2.0; }
};

struct Synthesis {
    Waveform waveform;
    GroundTruth truth;
};

/// Noise rms that puts `amplitude` at `snr_db` (20 log10 of peak over rms).
inline double noise_rms_for_snr(double amplitude, double snr_db) { return amplitude / std::pow(10.0, snr_db / 20.0); }

inline void check_scenario(const SynthesisScenario& s)
{
    check_geometry(s.geometry);
    check_medium(s.medium);
    if (!s.medium.sound_speed) throw ScenarioError("scenario medium needs a sound speed");
    if (s.burst_cycles < 1) throw ScenarioError("burst_cycles must be >= 1");
    if (!(s.noise_rms >= 0.0)) throw ScenarioError("noise_rms must be >= 0");
    if (!(s.emit_amplitude > 0.0)) throw ScenarioError("emit_amplitude must be positive");
    if (!(s.true_attenuation >= 0.0) || !std::isfinite(s.true_attenuation))
        throw ScenarioError("true_attenuation must be finite and >= 0");
    if (!(s.sample_rate >= 20.0 * s.geometry.carrier_frequency))
        throw ScenarioError("sample_rate below 20 samples per carrier period");
    if (!(s.tail >= 0.0)) throw ScenarioError("tail must be >= 0");
}

/// Raised-cosine windowed burst with a carrier crest at the envelope centre.
inline double burst_value(double tau, double duration, double frequency)
{
    if (tau < 0.0 || tau > duration) return 0.0;
    const double envelope = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * tau / duration));
    return envelope * std::cos(2.0 * std::numbers::pi * frequency * (tau - duration / 2.0));
}

/// Received signal of the two-reflector sensor: two tone bursts plus white
/// Gaussian noise. Interface losses enter through |k| and the double pass of
/// the semitransparent first reflector; no geometric spreading.
inline Synthesis synthesize(const SynthesisScenario& s)
{
    check_scenario(s);
    const auto& g = s.geometry;
    const double c = *s.medium.sound_speed;
    const double f = g.carrier_frequency;

    GroundTruth truth;
    truth.sound_speed = c;
    truth.attenuation = s.true_attenuation;
    truth.burst_duration = s.burst_cycles / f;
    truth.t1 = 2.0 * g.first_reflector_offset / c;
    truth.t2 = 2.0 * (g.first_reflector_offset + g.base_length) / c;
    if (truth.t2 - truth.t1 < truth.burst_duration) throw ScenarioError("echoes overlap in time");

    truth.reflection_magnitude = reflection_magnitude(s.medium, g.reflector_material);
    const double alpha = s.true_attenuation;
    const double tr = g.first_reflector_transmission;
    truth.a1 = s.emit_amplitude * truth.reflection_magnitude * std::exp(-alpha * 2.0 * g.first_reflector_offset);
    truth.a2 = s.emit_amplitude * tr * tr * truth.reflection_magnitude *
               std::exp(-alpha * 2.0 * (g.first_reflector_offset + g.base_length));

    Waveform w;
    w.sample_rate = s.sample_rate;
    w.t0 = 0.0;
    const auto n = static_cast<std::size_t>(std::ceil((truth.t2 + truth.burst_duration + s.tail) * s.sample_rate)) + 1;
    w.samples.assign(n, 0.0);

    const auto add_echo = [&](double start, double amplitude) {
        const std::size_t first = w.index_at_or_after(start);
        const std::size_t last = std::min(n, w.index_at_or_after(start + truth.burst_duration) + 1);
        for (std::size_t i = first; i < last; ++i)
            w.samples[i] += amplitude * burst_value(w.time_at(i) - start, truth.burst_duration, f);
    };
    add_echo(truth.t1, truth.a1);
    add_echo(truth.t2, truth.a2);

    if (s.noise_rms > 0.0) {
        std::mt19937_64 rng(s.seed);
        std::normal_distribution<double> noise(0.0, s.noise_rms);
        for (double& v : w.samples) v += noise(rng);
    }
    return {std::move(w), truth};
}

} // namespace svp

#endif // SVP_SYNTH_HPP
