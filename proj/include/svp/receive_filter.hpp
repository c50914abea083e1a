#ifndef SVP_RECEIVE_FILTER_HPP
#define SVP_RECEIVE_FILTER_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "svp/errors.hpp"
#include "svp/waveform.hpp"

namespace svp {

/// Linear-phase FIR band-pass (Blackman-windowed sinc shifted to `center`),
/// normalised to unity gain at `center`. Length is 8 * fs / bandwidth + 1.
inline std::vector<double> design_bandpass(double center, double bandwidth, double sample_rate)
{
    if (!(center > 0.0) || !(bandwidth > 0.0) || !(center + bandwidth / 2.0 < sample_rate / 2.0))
        throw DomainError("band-pass must lie below Nyquist");
    const auto half = static_cast<std::size_t>(4.0 * std::ceil(sample_rate / bandwidth));
    const std::size_t n = 2 * half + 1;
    const double cutoff = bandwidth / sample_rate;  // two-sided width, cycles/sample
    std::vector<double> taps(n);
    double gain = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double m = static_cast<double>(k) - static_cast<double>(half);
        const double x = std::numbers::pi * cutoff * m;
        const double sinc = m == 0.0 ? 1.0 : std::sin(x) / x;
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1);
        const double window = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
        const double carrier = std::cos(2.0 * std::numbers::pi * center * m / sample_rate);
        taps[k] = cutoff * sinc * window * carrier;
        gain += taps[k] * carrier;
    }
    for (double& t : taps) t /= gain;
    return taps;
}

/// Centred convolution, so a symmetric kernel adds no delay. Zero-padded at the ends.
inline Waveform filter_zero_phase(const Waveform& w, std::span<const double> taps)
{
    const std::size_t n = w.samples.size();
    const std::size_t half = taps.size() / 2;
    Waveform out{std::vector<double>(n, 0.0), w.sample_rate, w.t0};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k_lo = i < half ? half - i : 0;
        const std::size_t k_hi = std::min(taps.size(), n + half - i);
        double acc = 0.0;
        for (std::size_t k = k_lo; k < k_hi; ++k) acc += taps[k] * w.samples[i + k - half];
        out.samples[i] = acc;
    }
    return out;
}

inline Waveform bandpass(const Waveform& w, double center, double bandwidth)
{
    const auto taps = design_bandpass(center, bandwidth, w.sample_rate);
    return filter_zero_phase(w, taps);
}

} // namespace svp

#endif // SVP_RECEIVE_FILTER_HPP
