#ifndef SVP_WAVEFORM_HPP
#define SVP_WAVEFORM_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "svp/errors.hpp"
#include "svp/kv_config.hpp"

namespace svp {

/// Uniformly sampled received voltage, mV. Sample i is taken at t0 + i / sample_rate.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 100.0e6;  // Hz
    double t0 = 0.0;               // s, emission trigger

    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
    double end_time() const { return time_at(samples.size()); }

    /// First sample index whose time is >= t, clamped to size().
    std::size_t index_at_or_after(double t) const
    {
        if (t <= t0) return 0;
        if (!(t < end_time())) return samples.size();
        const double pos = std::ceil((t - t0) * sample_rate - 1e-9);
        return std::min(samples.size(), static_cast<std::size_t>(pos));
    }

    friend bool operator==(const Waveform&, const Waveform&) = default;
};

/// Enforces finiteness and, when `carrier_frequency` is given, >= 20 samples per period.
inline void check_waveform(const Waveform& w, double carrier_frequency = 0.0)
{
    if (!(w.sample_rate > 0.0) || !std::isfinite(w.sample_rate)) throw DomainError("sample_rate must be positive");
    if (!std::isfinite(w.t0)) throw DomainError("t0 must be finite");
    if (carrier_frequency > 0.0 && w.sample_rate < 20.0 * carrier_frequency)
        throw DomainError("sample_rate below 20 samples per carrier period");
    for (double v : w.samples)
        if (!std::isfinite(v)) throw DomainError("waveform contains a non-finite sample");
}

namespace detail {

inline std::string exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline constexpr const char* kWaveformMagic = "# svp waveform v1";

// Text format: magic line, `sample_rate`, `t0`, `count` header entries, then one
// sample per line. 17 significant digits make the round trip exact.
inline void write_waveform(const Waveform& w, std::ostream& out)
{
    out << kWaveformMagic << '\n'
        << "sample_rate = " << detail::exact(w.sample_rate) << '\n'
        << "t0 = " << detail::exact(w.t0) << '\n'
        << "count = " << w.samples.size() << '\n';
    for (double v : w.samples) out << detail::exact(v) << '\n';
}

inline void write_waveform(const Waveform& w, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_waveform(w, out);
}

inline Waveform read_waveform(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next()) throw ParseError("empty waveform file", 1);
    if (detail::trim(line) != kWaveformMagic) throw ParseError("missing waveform header", line_no);

    auto header = [&](std::string_view key) -> std::string {
        if (!next()) throw ParseError("truncated header", line_no + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos || detail::trim(std::string_view(line).substr(0, eq)) != key)
            throw ParseError("expected '" + std::string(key) + " = ...'", line_no);
        return std::string(detail::trim(std::string_view(line).substr(eq + 1)));
    };

    Waveform w;
    const auto rate = detail::parse_double(header("sample_rate"));
    if (!rate || !(*rate > 0.0)) throw ParseError("bad sample_rate", line_no);
    w.sample_rate = *rate;
    const auto t0 = detail::parse_double(header("t0"));
    if (!t0) throw ParseError("bad t0", line_no);
    w.t0 = *t0;
    const auto count_text = header("count");
    std::size_t count = 0;
    if (const auto [p, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
        ec != std::errc{} || p != count_text.data() + count_text.size())
        throw ParseError("bad count", line_no);

    w.samples.reserve(count);
    while (next()) {
        if (detail::trim(line).empty()) continue;
        const auto v = detail::parse_double(line);
        if (!v) throw ParseError("invalid sample '" + line + "'", line_no);
        if (w.samples.size() == count) throw ParseError("more samples than declared count", line_no);
        w.samples.push_back(*v);
    }
    if (w.samples.size() != count)
        throw ParseError("expected " + std::to_string(count) + " samples, got " + std::to_string(w.samples.size()),
                         line_no + 1);
    return w;
}

inline Waveform read_waveform(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return read_waveform(in);
}

} // namespace svp

#endif // SVP_WAVEFORM_HPP
