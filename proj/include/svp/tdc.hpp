#ifndef SVP_TDC_HPP
#define SVP_TDC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "svp/acoustics.hpp"
#include "svp/errors.hpp"
#include "svp/receive_filter.hpp"
#include "svp/waveform.hpp"

namespace svp {

/// Receiver comparator level, programmable in 1 mV steps over 0..35 mV.
struct ComparatorConfig {
    static constexpr int kMaxThreshold = 35;

    int threshold = 3;  // mV

    friend bool operator==(const ComparatorConfig&, const ComparatorConfig&) = default;
};

inline void check_comparator(const ComparatorConfig& cfg)
{
    if (cfg.threshold < 0 || cfg.threshold > ComparatorConfig::kMaxThreshold)
        throw DomainError("comparator threshold must be 0..35 mV");
}

enum class Edge : std::uint8_t { Rising, Falling };

enum class Interpolation : std::uint8_t { Linear = 0, Cubic = 1 };

struct TdcOptions {
    double lsb = 90.0e-12;  // s
    Interpolation interpolation = Interpolation::Linear;
    // Timing mark: this many rising zero crossings after the constant-fraction reference.
    int matched_crossing = 2;
    double cfd_fraction = 0.45;
    // Receive band-pass width as a multiple of the carrier; 0 disables the filter.
    double receive_bandwidth_ratio = 1.0;
    // A silence longer than this many carrier periods separates two echoes.
    double echo_gap_periods = 3.0;
    double lookback_periods = 10.0;

    friend bool operator==(const TdcOptions&, const TdcOptions&) = default;
};

inline void check_tdc_options(const TdcOptions& o)
{
    if (!(o.lsb > 0.0)) throw DomainError("TDC LSB must be positive");
    if (o.matched_crossing < 1) throw DomainError("matched_crossing must be >= 1");
    if (!(o.cfd_fraction > 0.0 && o.cfd_fraction < 1.0)) throw DomainError("cfd_fraction must be in (0, 1)");
    if (!(o.receive_bandwidth_ratio >= 0.0 && o.receive_bandwidth_ratio < 2.0))
        throw DomainError("receive_bandwidth_ratio must be in [0, 2)");
    if (!(o.echo_gap_periods > 1.0)) throw DomainError("echo_gap_periods must exceed one period");
    if (!(o.lookback_periods >= 1.0)) throw DomainError("lookback_periods must be >= 1");
}

/// A quantized comparator transition; `time == ticks * lsb`.
struct Crossing {
    std::int64_t ticks = 0;
    double time = 0.0;
    Edge edge = Edge::Rising;
};

struct TdcMeasurement {
    double first_halfwave_width = 0.0;      // s
    double reference_halfwave_width = 0.0;  // s
    double first_wave_ratio = 0.0;
    std::vector<double> echo_times;         // s: trigger rise/fall, reference rise/fall
    double quantization = 0.0;              // s
};

/// Two-point peak-detector calibration. Times in ns, voltage in mV.
struct AmplitudeCalibration {
    double amc_high = 200.0;
    double amc_low = 100.0;
    double v_cal = 350.0;  // V_REF / 2

    friend bool operator==(const AmplitudeCalibration&, const AmplitudeCalibration&) = default;
};

inline void check_calibration(const AmplitudeCalibration& cal)
{
    if (cal.amc_high == cal.amc_low) throw CalibrationError("AMC_H equals AMC_L");
    if (!(cal.amc_high > cal.amc_low && cal.amc_low > 0.0)) throw CalibrationError("need AMC_H > AMC_L > 0");
    if (!(cal.v_cal > 0.0) || !std::isfinite(cal.v_cal)) throw CalibrationError("V_CAL must be positive");
}

/// mV per ns of discharge time.
inline double amc_gradient(const AmplitudeCalibration& cal)
{
    check_calibration(cal);
    return cal.v_cal / (cal.amc_high - cal.amc_low);
}

inline double amc_offset(const AmplitudeCalibration& cal)
{
    return (2.0 * cal.amc_low - cal.amc_high) * amc_gradient(cal);
}

/// V = AMC_Gradient * AM - AMC_Offset, for both the up and down channels.
inline double amplitude_from_time(double am_ns, const AmplitudeCalibration& cal)
{
    return amc_gradient(cal) * am_ns - amc_offset(cal);
}

struct AmplitudeMeasurement {
    double am_up = 0.0;    // ns
    double am_down = 0.0;  // ns
    double v_up = 0.0;     // mV, positive peak
    double v_down = 0.0;   // mV, negative peak magnitude

    double peak() const { return std::max(v_up, v_down); }
};

struct EchoWindow {
    double begin = 0.0;  // s
    double end = 0.0;    // s, exclusive
};

/// Hold-capacitor level the discharge timer stops at, as a fraction of the peak.
inline constexpr double kDischargeLevel = 0.7;

namespace detail {

inline double cubic_root_in_bracket(const std::vector<double>& y, std::size_t i, double level)
{
    const double ym1 = y[i - 1], y0 = y[i], y1 = y[i + 1], y2 = y[i + 2];
    const auto p = [&](double u) {
        return -ym1 * u * (u - 1.0) * (u - 2.0) / 6.0 + y0 * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 -
               y1 * (u + 1.0) * u * (u - 2.0) / 2.0 + y2 * (u + 1.0) * u * (u - 1.0) / 6.0 - level;
    };
    double lo = 0.0, hi = 1.0;
    const bool rising = y1 > y0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool above = p(mid) > 0.0;
        if (above == rising) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Sample-domain crossing position within [i, i+1].
inline double crossing_fraction(const std::vector<double>& y, std::size_t i, double level, Interpolation mode)
{
    if (mode == Interpolation::Cubic && i >= 1 && i + 2 < y.size()) return cubic_root_in_bracket(y, i, level);
    return (level - y[i]) / (y[i + 1] - y[i]);
}

/// All transitions of `level` in [begin_time, end_time), starting with a rising edge.
inline std::vector<Crossing> scan_crossings(const Waveform& w, double level, double begin_time, double end_time,
                                            const TdcOptions& opt)
{
    std::vector<Crossing> out;
    const auto& y = w.samples;
    if (y.size() < 2) return out;
    const std::size_t first = w.index_at_or_after(begin_time);
    const std::size_t last = std::min(y.size() - 1, w.index_at_or_after(end_time));
    for (std::size_t i = first; i < last; ++i) {
        Edge edge;
        if (y[i] <= level && y[i + 1] > level) edge = Edge::Rising;
        else if (y[i] > level && y[i + 1] <= level) edge = Edge::Falling;
        else continue;
        if (out.empty() && edge == Edge::Falling) continue;
        const double u = crossing_fraction(y, i, level, opt.interpolation);
        const double t = w.t0 + (static_cast<double>(i) + u) / w.sample_rate;
        if (t < begin_time) continue;
        const auto ticks = static_cast<std::int64_t>(std::llround(t / opt.lsb));
        out.push_back({ticks, static_cast<double>(ticks) * opt.lsb, edge});
    }
    return out;
}

} // namespace detail

/// Comparator + TDC: threshold transitions after `arm_time`, linearly (or
/// cubically) interpolated between samples and quantized to the LSB. The list
/// starts with a rising edge and alternates.
inline std::vector<Crossing> detect_crossings(const Waveform& w, double threshold, double arm_time,
                                              const TdcOptions& opt = {})
{
    check_tdc_options(opt);
    auto out = detail::scan_crossings(w, threshold, arm_time, std::numeric_limits<double>::infinity(), opt);
    if (out.empty()) throw NoTriggerError("signal never reaches " + std::to_string(threshold) + " mV");
    return out;
}

inline std::vector<Crossing> detect_crossings(const Waveform& w, const ComparatorConfig& cfg, double arm_time,
                                              const TdcOptions& opt = {})
{
    check_comparator(cfg);
    return detect_crossings(w, static_cast<double>(cfg.threshold), arm_time, opt);
}

/// First Wave Mode: width of the half-wave that first exceeds the threshold,
/// over the width of the positive half-wave one period later measured with
/// the threshold reset to zero. Ratio clamped to [0, 1].
inline TdcMeasurement first_wave_ratio(const Waveform& w, const ComparatorConfig& cfg, const TdcOptions& opt = {},
                                       double arm_time = -std::numeric_limits<double>::infinity())
{
    const auto trig = detect_crossings(w, cfg, std::max(arm_time, w.t0), opt);
    if (trig.size() < 2) throw TruncatedError("first half-wave not complete before end of record");
    const auto& rise = trig[0];
    const auto& fall = trig[1];

    const auto zero = detail::scan_crossings(w, 0.0, fall.time, std::numeric_limits<double>::infinity(), opt);
    if (zero.size() < 2) throw TruncatedError("reference half-wave not complete before end of record");

    TdcMeasurement m;
    m.quantization = opt.lsb;
    m.first_halfwave_width = static_cast<double>(fall.ticks - rise.ticks) * opt.lsb;
    m.reference_halfwave_width = static_cast<double>(zero[1].ticks - zero[0].ticks) * opt.lsb;
    m.first_wave_ratio = m.reference_halfwave_width > 0.0
                             ? std::clamp(m.first_halfwave_width / m.reference_halfwave_width, 0.0, 1.0)
                             : 0.0;
    m.echo_times = {rise.time, fall.time, zero[0].time, zero[1].time};
    return m;
}

/// Ideal peak detector over the window, then the discharge-time readout.
/// The hold capacitor discharges at the calibrated gradient; the converter
/// times the drop from the peak to 0.7 of it, scales that to the full ramp and
/// references it to the calibration origin, so the AMC formulas return the peak.
inline AmplitudeMeasurement measure_amplitude(const Waveform& w, const AmplitudeCalibration& cal,
                                              const EchoWindow& window)
{
    const double gradient = amc_gradient(cal);
    const std::size_t first = w.index_at_or_after(window.begin);
    const std::size_t last = w.index_at_or_after(window.end);
    if (!(window.end > window.begin) || first >= last) throw DomainError("empty amplitude window");

    double up = 0.0, down = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        up = std::max(up, w.samples[i]);
        down = std::max(down, -w.samples[i]);
    }

    const double origin = 2.0 * cal.amc_low - cal.amc_high;
    const auto readout = [&](double peak) {
        const double discharge = (1.0 - kDischargeLevel) * peak / gradient;
        return discharge / (1.0 - kDischargeLevel) + origin;
    };

    AmplitudeMeasurement m;
    m.am_up = readout(up);
    m.am_down = readout(down);
    m.v_up = amplitude_from_time(m.am_up, cal);
    m.v_down = amplitude_from_time(m.am_down, cal);
    return m;
}

struct EchoPair {
    double delta_t = 0.0;   // s, matched-phase crossing difference
    double u_first = 0.0;   // mV, raw reflector-1 echo
    double u_second = 0.0;  // mV, raw reflector-2 echo
    double u_near = 0.0;    // mV, u_first corrected by transmission^2
    double u_far = 0.0;     // mV
    double mark_first = 0.0;   // s, timing mark in echo 1
    double mark_second = 0.0;  // s
    EchoWindow window_first;
    EchoWindow window_second;
    AmplitudeMeasurement amplitude_first;
    AmplitudeMeasurement amplitude_second;
};

/// Applies the receive band-pass configured in `opt` (no-op when disabled).
inline Waveform receive_chain(const Waveform& w, double carrier_frequency, const TdcOptions& opt)
{
    if (opt.receive_bandwidth_ratio <= 0.0) return w;
    return bandpass(w, carrier_frequency, opt.receive_bandwidth_ratio * carrier_frequency);
}

/// Locates the two echoes with the comparator, reads both amplitudes, and
/// times each at matched phase: the first half-wave above cfd_fraction of that
/// echo's peak is the reference, the N-th rising zero crossing after it is the mark.
/// Expects `w` to be the output of receive_chain().
inline EchoPair measure_echo_pair_filtered(const Waveform& w, const SensorGeometry& geometry,
                                           const ComparatorConfig& cfg, const AmplitudeCalibration& cal,
                                           const TdcOptions& opt = {})
{
    check_geometry(geometry);
    check_tdc_options(opt);
    const double period = 1.0 / geometry.carrier_frequency;
    const auto crossings = detect_crossings(w, cfg, w.t0, opt);

    struct Group {
        double first = 0.0;
        double last = 0.0;
    };
    std::vector<Group> groups;
    for (const auto& c : crossings) {
        if (c.edge == Edge::Rising && (groups.empty() || c.time - groups.back().last > opt.echo_gap_periods * period))
            groups.push_back({c.time, c.time});
        groups.back().last = c.time;
    }
    if (groups.size() < 2) throw EchoError("fewer than two echoes", EchoError::Kind::TooFew);
    if (groups.size() > 2) throw EchoError(std::to_string(groups.size()) + " echo candidates, expected 2", EchoError::Kind::TooMany);

    const double lookback = opt.lookback_periods * period;
    EchoWindow win1{std::max(w.t0, groups[0].first - lookback), groups[0].last + 2.0 * period};
    EchoWindow win2{groups[1].first - lookback, std::min(w.end_time(), groups[1].last + 2.0 * period)};
    win1.end = std::min(win1.end, w.end_time());
    if (win2.begin < win1.end) win2.begin = win1.end;
    if (win2.begin > groups[1].first - period) throw EchoError("echo windows overlap", EchoError::Kind::Overlap);

    EchoPair pair;
    pair.window_first = win1;
    pair.window_second = win2;
    pair.amplitude_first = measure_amplitude(w, cal, win1);
    pair.amplitude_second = measure_amplitude(w, cal, win2);

    const auto timing_mark = [&](const EchoWindow& win, const AmplitudeMeasurement& amp) {
        const double level = opt.cfd_fraction * amp.v_up;
        const auto ref = detail::scan_crossings(w, level, win.begin, win.end, opt);
        if (ref.empty()) throw EchoError("no constant-fraction reference inside echo window");
        const auto zero = detail::scan_crossings(w, 0.0, ref.front().time, win.end, opt);
        int seen = 0;
        for (const auto& z : zero)
            if (z.edge == Edge::Rising && ++seen == opt.matched_crossing) return z;
        throw TruncatedError("echo ends before the matched zero crossing");
    };
    const auto mark1 = timing_mark(win1, pair.amplitude_first);
    const auto mark2 = timing_mark(win2, pair.amplitude_second);

    pair.delta_t = static_cast<double>(mark2.ticks - mark1.ticks) * opt.lsb;
    if (!(pair.delta_t > 0.0)) throw EchoError("non-positive echo separation");
    pair.mark_first = mark1.time;
    pair.mark_second = mark2.time;
    pair.u_first = pair.amplitude_first.peak();
    pair.u_second = pair.amplitude_second.peak();
    pair.u_near = corrected_near_amplitude(pair.u_first, geometry.first_reflector_transmission);
    pair.u_far = pair.u_second;
    return pair;
}

inline EchoPair measure_echo_pair(const Waveform& w, const SensorGeometry& geometry, const ComparatorConfig& cfg,
                                  const AmplitudeCalibration& cal, const TdcOptions& opt = {})
{
    check_geometry(geometry);
    return measure_echo_pair_filtered(receive_chain(w, geometry.carrier_frequency, opt), geometry, cfg, cal, opt);
}

} // namespace svp

#endif // SVP_TDC_HPP
