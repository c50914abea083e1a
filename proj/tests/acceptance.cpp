// Acceptance gate: one PASS/FAIL line per criterion; exit status is the number of failures.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "golden.hpp"
#include "oracles.hpp"
#include "svp/svp.hpp"

using namespace svp;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SynthesisScenario scenario(double c, double alpha)
{
    SynthesisScenario s;
    s.medium.sound_speed = c;
    s.true_attenuation = alpha;
    return s;
}

DeviceRecord measure(Device& dev, const SynthesisScenario& s)
{
    return dev.run_cycle([&] {
        auto syn = synthesize(s);
        return Acquisition{std::move(syn.waveform), s.medium.temperature, s.medium.pressure};
    });
}

double with_snr(SynthesisScenario& s, double snr_db)
{
    s.noise_rms = 0.0;
    const auto clean = synthesize(s);
    s.noise_rms = noise_rms_for_snr(clean.truth.a2, snr_db);
    return s.noise_rms;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome check_sound_speed_round_trip()
{
    Outcome o;
    const auto t0 = Clock::now();
    auto dev = Device::power_on();
    double worst = 0.0;
    for (double c : {1425.0, 1500.0, 1575.0}) {
        const auto rec = measure(dev, scenario(c, 0.0));
        const double err = std::abs(rec.sound_speed - c);
        worst = std::max(worst, std::isnan(err) ? INFINITY : err);
        o.require(err <= 0.02, "c=" + num(c) + " error " + num(err) + " m/s");
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 10.0, "runtime " + num(elapsed) + " s");
    if (o.pass) o.detail = "worst |dc| " + num(worst) + " m/s, " + num(elapsed) + " s";
    return o;
}

Outcome check_attenuation_round_trip()
{
    Outcome o;
    auto dev = Device::power_on();
    std::string summary;
    for (double alpha : {0.0, 1.0, 5.776}) {
        const auto rec = measure(dev, scenario(1500.0, alpha));
        const double err = std::abs(rec.attenuation - alpha);
        o.require(err <= std::max(0.02, 0.02 * alpha), "noiseless alpha=" + num(alpha) + " error " + num(err));
        summary += "alpha " + num(alpha) + ": noiseless " + num(err);

        std::vector<double> errors;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            auto s = scenario(1500.0, alpha);
            with_snr(s, 40.0);
            s.seed = seed;
            const auto r = measure(dev, s);
            errors.push_back(std::isnan(r.attenuation) ? INFINITY : std::abs(r.attenuation - alpha));
        }
        const double med = median(errors);
        // A relative bound has no meaning at alpha = 0; the absolute floor of the noiseless case applies there.
        const double bound = std::max(alpha > 0.0 ? 0.0 : 0.02, 0.05 * alpha);
        o.require(med <= bound, "40 dB alpha=" + num(alpha) + " median error " + num(med));
        summary += ", 40 dB median " + (alpha > 0.0 ? num(100.0 * med / alpha) + "%" : num(med) + " Np/m");
        if (alpha < 5.0) summary += "; ";
    }
    if (o.pass) o.detail = summary;
    return o;
}

Outcome check_amplitude_accuracy()
{
    Outcome o;
    auto dev = Device::power_on();
    const auto& st = dev.settings();
    double worst = 0.0;
    for (double alpha : {0.0, 1.0, 5.776}) {
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            auto s = scenario(1500.0, alpha);
            with_snr(s, 40.0);
            s.seed = seed;
            const auto syn = synthesize(s);
            try {
                const auto p = measure_echo_pair(syn.waveform, st.geometry, st.comparator, st.amplitude_cal, st.tdc);
                const double e1 = std::abs(p.amplitude_first.v_up - syn.truth.a1) / syn.truth.a1;
                const double e2 = std::abs(p.amplitude_second.v_up - syn.truth.a2) / syn.truth.a2;
                worst = std::max({worst, e1, e2});
            } catch (const std::exception& e) {
                o.require(false, "alpha=" + num(alpha) + " seed " + std::to_string(seed) + ": " + e.what());
            }
        }
    }
    o.require(worst <= 0.02, "worst V_Up error " + num(100.0 * worst) + "%");

    const AmplitudeCalibration example{.amc_high = 200.0, .amc_low = 100.0, .v_cal = 350.0};
    o.require(std::abs(amplitude_from_time(150.0, example) - 525.0) <= 1e-12, "AMC example != 525 mV");
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double arith = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double low = 1.0 + 500.0 * u(rng);
        const AmplitudeCalibration c{.amc_high = low + 1.0 + 500.0 * u(rng), .amc_low = low, .v_cal = 50.0 + 500.0 * u(rng)};
        const double am = 2000.0 * u(rng);
        const double gradient = c.v_cal / (c.amc_high - c.amc_low);
        const double hand = gradient * am - (2.0 * c.amc_low - c.amc_high) * gradient;
        arith = std::max(arith, std::abs(amplitude_from_time(am, c) - hand) / std::max(1.0, std::abs(hand)));
    }
    o.require(arith <= 1e-12, "AMC arithmetic deviation " + num(arith));
    if (o.pass) o.detail = "worst V_Up error " + num(100.0 * worst) + "% at 40 dB, AMC deviation " + num(arith);
    return o;
}

Outcome check_zero_crossing_oracle()
{
    Outcome o;
    const double f = 2.0e6, fs = 100.0e6, expected = 1.0 - 2.0 / std::numbers::pi * std::asin(0.5);
    o.require(std::abs(expected - 2.0 / 3.0) < 1e-15, "closed form");
    Waveform w;
    w.sample_rate = fs;
    for (int i = 0; i < 500; ++i) w.samples.push_back(10.0 * std::sin(2.0 * std::numbers::pi * f * i / fs));
    const auto m = first_wave_ratio(w, ComparatorConfig{5});
    const double err = std::abs(m.first_wave_ratio - expected);
    o.require(err <= 1e-3, "ratio " + num(m.first_wave_ratio) + " error " + num(err));
    if (o.pass) o.detail = "ratio " + num(m.first_wave_ratio) + " (error " + num(err) + ")";
    return o;
}

Outcome check_reflection_coefficient()
{
    Outcome o;
    MediumState water;
    water.sound_speed = pure_water_sound_speed(20.0);
    const double k = reflection_magnitude(water, ReflectorMaterial{});
    o.require(std::abs(k - 0.937) <= 0.01, "|k| = " + num(k));
    if (o.pass) o.detail = "|k| = " + num(k);
    return o;
}

Outcome check_calibration_oracle()
{
    Outcome o;
    double worst = 0.0;
    for (double t : {0.0, 10.0, 20.0, 30.0}) {
        const double err = std::abs(pure_water_sound_speed(t) - oracle::del_grosso_mader(t));
        worst = std::max(worst, err);
        o.require(err <= 1e-3, "T=" + num(t) + " error " + num(err));
    }
    double prev = pure_water_sound_speed(0.0);
    for (int i = 1; i <= 3500; ++i) {
        const double c = pure_water_sound_speed(i * 0.01);
        if (!(c > prev)) {
            o.require(false, "not monotone at " + num(i * 0.01) + " C");
            break;
        }
        prev = c;
    }
    if (o.pass) o.detail = "worst deviation " + num(worst) + " m/s, monotone on [0, 35] C";
    return o;
}

DeviceSettings random_settings(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DeviceSettings s;
    s.comparator.threshold = static_cast<int>(u(rng) * 35.0);
    s.amplitude_cal.amc_low = 50.0 + 100.0 * u(rng);
    s.amplitude_cal.amc_high = s.amplitude_cal.amc_low + 1.0 + 300.0 * u(rng);
    s.amplitude_cal.v_cal = 100.0 + 400.0 * u(rng);
    s.cycle_rate = u(rng) < 0.5 ? 18.0 : 1.0 + 30.0 * u(rng);
    s.tdc.interpolation = u(rng) < 0.5 ? Interpolation::Linear : Interpolation::Cubic;
    return s;
}

Outcome check_device_state_machine()
{
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1802);
    std::uniform_int_distribution<int> byte(0, 255), pick(0, 99), payload_len(0, 96);
    const auto acq_synth = synthesize(scenario(1500.0, 1.0));
    const Acquisition acq{acq_synth.waveform, 20.0, 101.325};

    auto dev = Device::power_on({}, 4096);
    std::uint64_t corrupted = 0, roundtrips = 0, cycles = 0, responses = 0;
    std::uint32_t expected_crc_errors = 0;
    const std::array<Opcode, 7> ops{Opcode::SetMode, Opcode::ReadRecord, Opcode::ReadMem, Opcode::FormatMem,
                                    Opcode::WriteSettings, Opcode::ReadSettings, Opcode::Status};
    constexpr int kFrames = 100000;
    for (int i = 0; i < kFrames && o.pass; ++i) {
        const int r = pick(rng);
        Frame cmd;
        if (r < 60) {
            cmd.opcode = static_cast<std::uint8_t>(ops[static_cast<std::size_t>(byte(rng)) % ops.size()]);
            if (cmd.is(Opcode::SetMode)) cmd.payload = {static_cast<std::uint8_t>(byte(rng) % 5)};
            else if (cmd.is(Opcode::ReadMem)) {
                ByteWriter w;
                w.u32(static_cast<std::uint32_t>(byte(rng)));
                w.u32(static_cast<std::uint32_t>(byte(rng) % 8));
                cmd.payload = std::move(w).take();
            } else if (cmd.is(Opcode::WriteSettings)) cmd.payload = encode_settings(random_settings(rng));
        } else {
            cmd.opcode = static_cast<std::uint8_t>(byte(rng));
            cmd.payload.resize(static_cast<std::size_t>(payload_len(rng)));
            for (auto& b : cmd.payload) b = static_cast<std::uint8_t>(byte(rng));
        }
        auto bytes = encode_frame(cmd);
        const bool corrupt = r >= 85;
        if (corrupt) {
            // one bit flipped after the sync byte
            const auto pos = 1 + static_cast<std::size_t>(byte(rng)) % (bytes.size() - 1);
            bytes[pos] ^= static_cast<std::uint8_t>(1u << (byte(rng) % 8));
            ++corrupted;
        }

        const std::string at = "frame " + std::to_string(i);
        try {
            const auto out = dev.receive(bytes);
            FrameParser p;
            p.push(out);
            const auto frames = p.drain();
            responses += frames.size();
            o.require(p.crc_errors() == 0 && p.pending_bytes() == 0, at + ": malformed response");
            for (const auto& f : frames) o.require(f.opcode >= 0x80, at + ": response opcode");
        } catch (const std::exception& e) {
            o.require(false, at + ": exception " + e.what());
        }

        const auto mode = static_cast<int>(dev.mode());
        o.require(mode >= 0 && mode <= 3, at + ": invalid mode");
        o.require(dev.active_threshold() >= 0 && dev.active_threshold() <= ComparatorConfig::kMaxThreshold,
                  at + ": threshold out of range");
        o.require(dev.memory().size() <= dev.memory().capacity(), at + ": memory overflow");
        o.require(!load_settings(dev.store()).corrupt, at + ": persisted settings corrupt");

        if (i % 1000 == 999 && (dev.mode() == DeviceMode::Autonomous || dev.mode() == DeviceMode::Telemetric)) {
            const auto before = dev.next_sequence();
            const auto rec = dev.run_cycle_on(acq);
            o.require(rec.sequence == before, at + ": sequence");
            dev.take_telemetry();
            ++cycles;
        }
    }
    // Resynchronise and check the counter is consistent with what the status report says.
    {
        FrameParser p;
        p.push(dev.receive(encode_frame(Frame(Opcode::Status))));
        auto frames = p.drain();
        for (int k = 0; k < 4 && frames.empty(); ++k) {
            p.push(dev.receive(encode_frame(Frame(Opcode::Status))));
            frames = p.drain();
        }
        o.require(!frames.empty() && frames.back().is(Opcode::StatusReport), "no status after fuzz");
        if (!frames.empty() && frames.back().is(Opcode::StatusReport))
            expected_crc_errors = decode_status(frames.back().payload).crc_errors;
        o.require(expected_crc_errors == dev.crc_errors(), "status crc counter mismatch");
    }

    // Settings write/read through the protocol.
    for (int i = 0; i < 1000; ++i) {
        auto d = Device::power_on();
        const auto s = random_settings(rng);
        const auto block = encode_settings(s);
        d.handle_command(Frame(Opcode::SetMode, {static_cast<std::uint8_t>(DeviceMode::Settings)}));
        const auto ack = d.handle_command(Frame(Opcode::WriteSettings, block));
        const auto read = d.handle_command(Frame(Opcode::ReadSettings));
        const bool ok = ack.size() == 1 && ack[0].is(Opcode::Ack) && read.size() == 1 && read[0].is(Opcode::Settings) &&
                        read[0].payload == block && Device::power_on(d.store()).settings().comparator.threshold ==
                                                            s.comparator.threshold;
        o.require(ok, "settings round trip " + std::to_string(i));
        if (!ok) break;
        ++roundtrips;
    }

    // Autonomous cadence.
    auto cadence = Device::power_on();
    double prev = 0.0;
    for (int i = 0; i < 36; ++i) {
        const auto rec = cadence.run_cycle_on(acq);
        o.require(rec.timestamp == static_cast<double>(rec.tick) / 18.0 && rec.tick == static_cast<std::uint64_t>(i),
                  "timestamp of cycle " + std::to_string(i));
        if (i > 0) o.require(std::abs(rec.timestamp - prev - 1.0 / 18.0) < 1e-12, "cadence step " + std::to_string(i));
        prev = rec.timestamp;
    }
    o.require(cadence.memory().size() == 36, "autonomous records not stored");

    const double elapsed = seconds_since(t0);
    o.require(elapsed < 60.0, "runtime " + num(elapsed) + " s");
    if (o.pass)
        o.detail = std::to_string(kFrames) + " frames (" + std::to_string(corrupted) + " corrupted, " +
                   std::to_string(dev.crc_errors()) + " CRC drops, " + std::to_string(cycles) + " cycles), " +
                   std::to_string(roundtrips) + " settings round trips, " + num(elapsed) + " s";
    return o;
}

Outcome check_protocol_bit_exactness()
{
    Outcome o;
    const std::string check = "123456789";
    const auto crc = crc16_ccitt_false(std::span(reinterpret_cast<const std::uint8_t*>(check.data()), check.size()));
    o.require(crc == 0x29B1, "CRC check value");
    std::size_t n = 0;
    try {
        for (const auto& c : golden::load_frames(golden::frames_path())) {
            const auto encoded = encode_frame(Frame(c.opcode, c.payload));
            o.require(encoded == c.encoded, c.name + ": encoding differs");
            const auto f = decode_frame(c.encoded);
            o.require(f.opcode == c.opcode && f.payload == c.payload, c.name + ": decode differs");
            const std::vector<std::uint8_t> body(c.encoded.begin() + 1, c.encoded.end() - 2);
            const std::uint16_t stored = static_cast<std::uint16_t>(c.encoded[c.encoded.size() - 2] | (c.encoded.back() << 8));
            o.require(oracle::crc16(body) == stored, c.name + ": stored CRC disagrees with oracle");
            ++n;
        }
    } catch (const std::exception& e) {
        o.require(false, e.what());
    }
    o.require(n >= 6, "too few golden frames");
    if (o.pass) o.detail = std::to_string(n) + " golden frames, CRC(\"123456789\") = 0x29B1";
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1 sound-speed round trip", check_sound_speed_round_trip},
        {"AC2 attenuation round trip", check_attenuation_round_trip},
        {"AC3 amplitude accuracy", check_amplitude_accuracy},
        {"AC4 zero-crossing oracle", check_zero_crossing_oracle},
        {"AC5 reflection coefficient", check_reflection_coefficient},
        {"AC6 calibration oracle", check_calibration_oracle},
        {"AC7 device state machine", check_device_state_machine},
        {"AC8 protocol bit-exactness", check_protocol_bit_exactness},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
