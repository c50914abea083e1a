#ifndef SVP_HOST_HPP
#define SVP_HOST_HPP

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "svp/constants.hpp"
#include "svp/device.hpp"
#include "svp/kv_config.hpp"
#include "svp/synth.hpp"

namespace svp::host {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kThresholdFailure = 3 };

/// Invalid operator input (bad manifest, out-of-domain argument).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A simulation campaign: the scenario template, the sweep, device overrides and outputs.
struct RunManifest {
    SynthesisScenario scenario;
    std::vector<double> sound_speeds;   // m/s; empty when sweeping temperature
    std::vector<double> temperatures;   // degC, converted with the pure-water equation
    std::vector<double> attenuations{0.0};
    long long records = 1;              // per sweep point
    std::optional<double> snr_db;       // relative to the far echo; overrides noise_rms
    DeviceSettings settings;
    DeviceMode mode = DeviceMode::Autonomous;
    std::string csv_path;
    std::string truth_path;
    std::string dump_path;
};

inline const std::set<std::string>& manifest_keys()
{
    static const std::set<std::string> keys{
        "sound_speeds", "temperatures", "attenuations", "records", "noise_rms", "snr_db", "seed",
        "emit_amplitude", "burst_cycles", "sample_rate", "base_length", "first_reflector_offset",
        "carrier_frequency", "first_reflector_transmission", "reflector.name", "reflector.density",
        "reflector.sound_speed", "medium.density", "medium.temperature", "medium.pressure", "threshold",
        "amc_high", "amc_low", "v_cal", "cycle_rate", "tdc_lsb", "mode", "output.csv", "output.truth", "output.dump"};
    return keys;
}

inline RunManifest parse_manifest(const KeyValueConfig& cfg)
{
    for (const auto& k : cfg.keys())
        if (!manifest_keys().count(k)) throw UsageError("unknown manifest key '" + k + "'");

    RunManifest m;
    auto& sc = m.scenario;
    auto& g = sc.geometry;
    try {
        if (cfg.has("sound_speeds")) m.sound_speeds = cfg.numbers("sound_speeds");
        if (cfg.has("temperatures")) m.temperatures = cfg.numbers("temperatures");
        if (cfg.has("attenuations")) m.attenuations = cfg.numbers("attenuations");
        m.records = cfg.integer("records", 1);
        sc.noise_rms = cfg.number("noise_rms", 0.0);
        if (cfg.has("snr_db")) m.snr_db = cfg.number("snr_db");
        sc.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
        sc.emit_amplitude = cfg.number("emit_amplitude", sc.emit_amplitude);
        sc.burst_cycles = static_cast<int>(cfg.integer("burst_cycles", sc.burst_cycles));
        sc.sample_rate = cfg.number("sample_rate", sc.sample_rate);
        g.base_length = cfg.number("base_length", g.base_length);
        g.first_reflector_offset = cfg.number("first_reflector_offset", g.first_reflector_offset);
        g.carrier_frequency = cfg.number("carrier_frequency", g.carrier_frequency);
        g.first_reflector_transmission = cfg.number("first_reflector_transmission", g.first_reflector_transmission);
        g.reflector_material.name = cfg.string("reflector.name", g.reflector_material.name);
        g.reflector_material.density = cfg.number("reflector.density", g.reflector_material.density);
        g.reflector_material.sound_speed = cfg.number("reflector.sound_speed", g.reflector_material.sound_speed);
        sc.medium.density = cfg.number("medium.density", sc.medium.density);
        sc.medium.temperature = cfg.number("medium.temperature", sc.medium.temperature);
        sc.medium.pressure = cfg.number("medium.pressure", sc.medium.pressure);

        auto& s = m.settings;
        s.geometry = g;
        s.comparator.threshold = static_cast<int>(cfg.integer("threshold", s.comparator.threshold));
        s.amplitude_cal.amc_high = cfg.number("amc_high", s.amplitude_cal.amc_high);
        s.amplitude_cal.amc_low = cfg.number("amc_low", s.amplitude_cal.amc_low);
        s.amplitude_cal.v_cal = cfg.number("v_cal", s.amplitude_cal.v_cal);
        s.cycle_rate = cfg.number("cycle_rate", s.cycle_rate);
        s.tdc.lsb = cfg.number("tdc_lsb", s.tdc.lsb);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }

    const auto mode = cfg.string("mode", "autonomous");
    if (mode == "autonomous") m.mode = DeviceMode::Autonomous;
    else if (mode == "telemetric") m.mode = DeviceMode::Telemetric;
    else throw UsageError("mode must be 'autonomous' or 'telemetric'");

    m.csv_path = cfg.string("output.csv");
    m.truth_path = cfg.string("output.truth");
    m.dump_path = cfg.string("output.dump");

    if (m.records < 1) throw UsageError("records must be >= 1");
    if (m.sound_speeds.empty() == m.temperatures.empty())
        throw UsageError("give exactly one of 'sound_speeds' or 'temperatures'");
    if (m.attenuations.empty()) throw UsageError("attenuations must not be empty");
    try {
        check_settings(m.settings);
        for (double c : m.sound_speeds)
            if (!(c > 0.0)) throw UsageError("sound speeds must be positive");
        for (double a : m.attenuations)
            if (!(a >= 0.0)) throw UsageError("attenuations must be >= 0");
        SynthesisScenario probe = sc;
        probe.medium.sound_speed = 1500.0;
        check_scenario(probe);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::domain_error& e) {
        throw UsageError(e.what());
    }
    return m;
}

struct TruthRow {
    std::uint32_t sequence = 0;
    std::uint64_t seed = 0;
    double temperature = 0.0;
    GroundTruth truth;
};

struct SimulationResult {
    std::vector<DeviceRecord> records;  // as decoded from the device's output frames
    std::vector<TruthRow> truths;
    std::vector<std::uint8_t> dump;     // RECORD / TELEMETRY frames
};

/// Sends one command frame over the byte link and decodes the responses.
inline std::vector<Frame> transact(Device& dev, const Frame& cmd)
{
    FrameParser p;
    p.push(dev.receive(encode_frame(cmd)));
    return p.drain();
}

inline void expect_ack(const std::vector<Frame>& resp, const char* what)
{
    if (resp.empty() || !resp.back().is(Opcode::Ack)) throw std::runtime_error(std::string("device rejected ") + what);
}

/// Powers a simulated device, configures it over the protocol, runs one work
/// cycle per (sweep point x repetition) and reads the results back.
inline SimulationResult run_simulation(const RunManifest& m, const InstrumentConstants& k = {})
{
    auto dev = Device::power_on();
    expect_ack(transact(dev, Frame(Opcode::SetMode, {static_cast<std::uint8_t>(DeviceMode::Settings)})), "SET_MODE");
    expect_ack(transact(dev, Frame(Opcode::WriteSettings, encode_settings(m.settings))), "WRITE_SETTINGS");
    expect_ack(transact(dev, Frame(Opcode::SetMode, {static_cast<std::uint8_t>(m.mode)})), "SET_MODE");

    struct Point {
        double sound_speed;
        double temperature;
    };
    std::vector<Point> points;
    for (double c : m.sound_speeds) points.push_back({c, m.scenario.medium.temperature});
    for (double t : m.temperatures) {
        try {
            points.push_back({pure_water_sound_speed(t, k.pure_water), t});
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }

    SimulationResult result;
    std::uint64_t run = 0;
    for (const auto& pt : points) {
        for (double alpha : m.attenuations) {
            for (long long rep = 0; rep < m.records; ++rep, ++run) {
                SynthesisScenario sc = m.scenario;
                sc.medium.sound_speed = pt.sound_speed;
                sc.medium.temperature = pt.temperature;
                sc.true_attenuation = alpha;
                sc.seed = m.scenario.seed + run;
                if (m.snr_db) {
                    sc.noise_rms = 0.0;
                    const auto clean = synthesize(sc);
                    sc.noise_rms = noise_rms_for_snr(clean.truth.a2, *m.snr_db);
                }
                auto syn = synthesize(sc);
                const auto rec = dev.run_cycle_on({std::move(syn.waveform), pt.temperature, sc.medium.pressure});
                result.truths.push_back({rec.sequence, sc.seed, pt.temperature, syn.truth});
            }
        }
    }

    std::vector<Frame> frames;
    if (m.mode == DeviceMode::Autonomous) {
        expect_ack(transact(dev, Frame(Opcode::SetMode, {static_cast<std::uint8_t>(DeviceMode::Memory)})), "SET_MODE");
        ByteWriter args;
        args.u32(0);
        args.u32(0);
        auto resp = transact(dev, Frame(Opcode::ReadMem, std::move(args).take()));
        expect_ack(resp, "READ_MEM");
        resp.pop_back();
        frames = std::move(resp);
    } else {
        frames = dev.take_telemetry();
    }
    for (const auto& f : frames) {
        append_frame(result.dump, f);
        result.records.push_back(decode_record(f.payload));
    }
    return result;
}

struct DecodeResult {
    std::vector<DeviceRecord> records;
    bool truncated = false;
    std::string warning;
};

/// Tabulates a memory dump (a concatenation of RECORD/TELEMETRY frames;
/// ACK frames are ignored). A trailing partial frame sets `truncated`.
inline DecodeResult decode_dump(std::span<const std::uint8_t> bytes)
{
    DecodeResult out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const auto rest = bytes.subspan(pos);
        if (rest[0] != kFrameSync) throw ParseError("expected frame sync", pos);
        if (rest.size() < 4) {
            out.truncated = true;
            break;
        }
        const std::size_t len = rest[2] | (std::size_t{rest[3]} << 8);
        if (rest.size() < len + kFrameOverhead) {
            out.truncated = true;
            break;
        }
        Frame f;
        try {
            f = decode_frame(rest.first(len + kFrameOverhead));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), pos);
        }
        pos += len + kFrameOverhead;
        if (f.is(Opcode::Record) || f.is(Opcode::Telemetry)) out.records.push_back(decode_record(f.payload));
        else if (!f.is(Opcode::Ack)) throw ParseError("unexpected frame opcode in dump", pos);
    }
    if (out.truncated)
        out.warning = "dump truncated at byte " + std::to_string(pos) + " after " + std::to_string(out.records.size()) +
                      " complete records";
    return out;
}

inline std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline constexpr const char* kCsvHeader =
    "seq,time_s,sound_speed_m_s,attenuation_np_m,u_near_mv,u_far_mv,flags,first_wave_ratio,temperature_c,"
    "pressure_kpa,sound_speed_range,temperature_range,pressure_range,invalid,threshold_adapted";

/// Record table, 9 significant digits, one header line.
inline void write_records_csv(std::ostream& out, const std::vector<DeviceRecord>& records)
{
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        const auto bit = [&](RecordFlag f) { return has_flag(r.flags, f) ? '1' : '0'; };
        out << r.sequence << ',' << fmt9(r.timestamp) << ',' << fmt9(r.sound_speed) << ',' << fmt9(r.attenuation)
            << ',' << fmt9(r.u_near) << ',' << fmt9(r.u_far) << ',' << r.flags << ',' << fmt9(r.first_wave_ratio)
            << ',' << fmt9(r.temperature) << ',' << fmt9(r.pressure) << ',' << bit(RecordFlag::SoundSpeedRange)
            << ',' << bit(RecordFlag::TemperatureRange) << ',' << bit(RecordFlag::PressureRange) << ','
            << bit(RecordFlag::MeasurementInvalid) << ',' << bit(RecordFlag::ThresholdAdapted) << '\n';
    }
}

inline void write_truth_jsonl(std::ostream& out, const std::vector<TruthRow>& rows)
{
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["seq"] = r.sequence;
        j["seed"] = r.seed;
        j["temperature_c"] = r.temperature;
        j["sound_speed_m_s"] = r.truth.sound_speed;
        j["attenuation_np_m"] = r.truth.attenuation;
        j["t1_s"] = r.truth.t1;
        j["t2_s"] = r.truth.t2;
        j["a1_mv"] = r.truth.a1;
        j["a2_mv"] = r.truth.a2;
        out << j.dump() << '\n';
    }
}

struct CalibrationRow {
    double temperature = 0.0;
    double reference = 0.0;  // m/s, pure-water equation
    double measured = 0.0;   // m/s
    double residual = 0.0;   // measured - reference
    std::uint16_t flags = 0;
};

struct CalibrationReport {
    std::vector<CalibrationRow> rows;
    double tolerance = 0.02;  // m/s

    bool passed() const
    {
        for (const auto& r : rows)
            if (!(std::abs(r.residual) <= tolerance)) return false;
        return true;
    }
};

struct CalibrationOptions {
    DeviceSettings settings;
    SynthesisScenario scenario;  // sound speed and temperature are set per point
    double tolerance = 0.02;
};

/// Laboratory calibration against pure water: at each temperature the device
/// measures a synthetic echo pair at the reference sound speed.
inline CalibrationReport calibrate(const std::vector<double>& temperatures, const CalibrationOptions& opt = {},
                                   const InstrumentConstants& k = {})
{
    if (temperatures.empty()) throw UsageError("no calibration temperatures given");
    for (double t : temperatures)
        if (!(t >= k.pure_water.min_temperature && t <= k.pure_water.max_temperature))
            throw UsageError("temperature " + fmt9(t) + " C outside the pure-water equation range");

    auto dev = Device::power_on(SettingsStore::from(opt.settings));
    CalibrationReport report;
    report.tolerance = opt.tolerance;
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        SynthesisScenario sc = opt.scenario;
        sc.geometry = opt.settings.geometry;
        sc.medium.temperature = temperatures[i];
        sc.medium.sound_speed = pure_water_sound_speed(temperatures[i], k.pure_water);
        sc.seed = opt.scenario.seed + i;
        auto syn = synthesize(sc);
        const auto rec = dev.run_cycle_on({std::move(syn.waveform), temperatures[i], sc.medium.pressure});
        report.rows.push_back({temperatures[i], *sc.medium.sound_speed, rec.sound_speed,
                               rec.sound_speed - *sc.medium.sound_speed, rec.flags});
    }
    return report;
}

inline void write_calibration(std::ostream& out, const CalibrationReport& r)
{
    out << "temperature_c,reference_m_s,measured_m_s,residual_m_s,flags\n";
    for (const auto& row : r.rows)
        out << fmt9(row.temperature) << ',' << fmt9(row.reference) << ',' << fmt9(row.measured) << ','
            << fmt9(row.residual) << ',' << row.flags << '\n';
}

inline std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string s;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i) s += ' ';
        s += digits[bytes[i] >> 4];
        s += digits[bytes[i] & 0xF];
    }
    return s;
}

/// Parses hex bytes; whitespace between bytes is optional.
inline std::vector<std::uint8_t> from_hex(std::string_view text)
{
    std::vector<std::uint8_t> out;
    int hi = -1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == ',') continue;
        int v;
        if (ch >= '0' && ch <= '9') v = ch - '0';
        else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
        else throw UsageError(std::string("invalid hex digit '") + ch + "'");
        if (hi < 0) hi = v;
        else {
            out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
            hi = -1;
        }
    }
    if (hi >= 0) throw UsageError("odd number of hex digits");
    return out;
}

} // namespace svp::host

#endif // SVP_HOST_HPP
