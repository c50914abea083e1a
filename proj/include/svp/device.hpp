#ifndef SVP_DEVICE_HPP
#define SVP_DEVICE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "svp/acoustics.hpp"
#include "svp/protocol.hpp"
#include "svp/record.hpp"
#include "svp/settings.hpp"
#include "svp/tdc.hpp"
#include "svp/waveform.hpp"

namespace svp {

enum class DeviceMode : std::uint8_t { Autonomous = 0, Telemetric = 1, Memory = 2, Settings = 3 };

inline constexpr std::string_view to_string(DeviceMode m)
{
    switch (m) {
    case DeviceMode::Autonomous: return "autonomous";
    case DeviceMode::Telemetric: return "telemetric";
    case DeviceMode::Memory: return "memory";
    case DeviceMode::Settings: return "settings";
    }
    return "?";
}

/// One acquisition handed to the controller: the received waveform plus the
/// auxiliary temperature and pressure channels.
struct Acquisition {
    Waveform waveform;
    double temperature = 20.0;  // degC
    double pressure = 101.325;  // kPa
};

/// Fixed-capacity record ring; the oldest record is evicted when full.
class RecordMemory {
public:
    explicit RecordMemory(std::size_t capacity = 65536) : capacity_(capacity)
    {
        if (capacity_ == 0) throw DomainError("memory capacity must be positive");
    }

    void store(const DeviceRecord& r)
    {
        if (ring_.size() < capacity_) {
            ring_.push_back(r);
            return;
        }
        ring_[head_] = r;
        head_ = (head_ + 1) % capacity_;
    }

    /// Records [first, first + count) counted from the oldest; clipped to what is stored.
    std::vector<DeviceRecord> read(std::size_t first, std::size_t count) const
    {
        std::vector<DeviceRecord> out;
        if (first >= ring_.size()) return out;
        const std::size_t n = std::min(count, ring_.size() - first);
        out.reserve(n);
        for (std::size_t i = first; i < first + n; ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
        return out;
    }

    std::vector<DeviceRecord> read_all() const { return read(0, ring_.size()); }

    void format()
    {
        ring_.clear();
        head_ = 0;
    }

    std::size_t size() const noexcept { return ring_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::size_t capacity_;
    std::vector<DeviceRecord> ring_;
    std::size_t head_ = 0;
};

/// STATUS response payload.
struct DeviceStatus {
    DeviceMode mode = DeviceMode::Autonomous;
    bool settings_corrupt = false;
    std::uint32_t crc_errors = 0;
    std::uint32_t stored_records = 0;
    std::uint32_t next_sequence = 0;
    std::uint64_t tick = 0;
    std::uint8_t active_threshold = 0;

    friend bool operator==(const DeviceStatus&, const DeviceStatus&) = default;
};

inline std::vector<std::uint8_t> encode_status(const DeviceStatus& s)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(s.mode));
    w.u8(s.settings_corrupt ? 1 : 0);
    w.u32(s.crc_errors);
    w.u32(s.stored_records);
    w.u32(s.next_sequence);
    w.u64(s.tick);
    w.u8(s.active_threshold);
    return std::move(w).take();
}

inline DeviceStatus decode_status(std::span<const std::uint8_t> payload)
{
    ByteReader r(payload);
    DeviceStatus s;
    const auto mode = r.u8();
    if (mode > 3) throw ParseError("invalid mode in status", 0);
    s.mode = static_cast<DeviceMode>(mode);
    s.settings_corrupt = r.u8() != 0;
    s.crc_errors = r.u32();
    s.stored_records = r.u32();
    s.next_sequence = r.u32();
    s.tick = r.u64();
    s.active_threshold = r.u8();
    if (r.remaining() != 0) throw ParseError("trailing bytes in status", r.offset());
    return s;
}

/// Instrument controller. Powers on into Autonomous mode; a host switches
/// modes at any time with framed commands. A single logical actor: drive it
/// from one thread at a time.
class Device {
public:
    static Device power_on(SettingsStore store = {}, std::size_t memory_capacity = 65536)
    {
        return Device(std::move(store), memory_capacity);
    }

    DeviceMode mode() const noexcept { return mode_; }
    const DeviceSettings& settings() const noexcept { return settings_; }
    const SettingsStore& store() const noexcept { return store_; }
    const RecordMemory& memory() const noexcept { return memory_; }
    bool settings_corrupt() const noexcept { return settings_corrupt_; }
    int active_threshold() const noexcept { return threshold_; }
    std::uint32_t crc_errors() const noexcept { return parser_.crc_errors(); }
    std::uint32_t next_sequence() const noexcept { return next_sequence_; }
    std::uint64_t tick() const noexcept { return tick_; }
    const std::optional<DeviceRecord>& last_record() const noexcept { return last_record_; }

    DeviceStatus status() const
    {
        return {mode_, settings_corrupt_, crc_errors(), static_cast<std::uint32_t>(memory_.size()), next_sequence_,
                tick_, static_cast<std::uint8_t>(threshold_)};
    }

    /// Telemetry frames produced since the last call.
    std::vector<Frame> take_telemetry() { return std::exchange(telemetry_, {}); }

    /// One work cycle on an acquisition from `source()`.
    template <class Source>
    DeviceRecord run_cycle(Source&& source)
    {
        require_measuring_mode();
        return run_cycle_on(static_cast<const Acquisition&>(source()));
    }

    /// Work cycle: set up and fire with the active threshold, read the
    /// intermediate result, adapt the threshold if the echoes were not
    /// captured, re-measure, then store (Autonomous) or transmit (Telemetric).
    DeviceRecord run_cycle_on(const Acquisition& acq)
    {
        require_measuring_mode();
        const auto& s = settings_;
        DeviceRecord rec;
        rec.temperature = acq.temperature;
        rec.pressure = acq.pressure;

        std::optional<EchoPair> pair;
        try {
            check_waveform(acq.waveform);
            const Waveform received = receive_chain(acq.waveform, s.geometry.carrier_frequency, s.tdc);
            auto opts = s.tdc;
            opts.receive_bandwidth_ratio = 0.0;

            const auto measure = [&](int threshold) -> std::optional<EchoPair> {
                const ComparatorConfig cfg{threshold};
                try {
                    rec.first_wave_ratio = first_wave_ratio(received, cfg, opts).first_wave_ratio;
                } catch (const std::runtime_error&) {
                    rec.first_wave_ratio = std::numeric_limits<double>::quiet_NaN();
                }
                return measure_echo_pair_filtered(received, s.geometry, cfg, s.amplitude_cal, opts);
            };

            try {
                pair = measure(threshold_);
            } catch (const NoTriggerError&) {
                adapt(-1, rec);
            } catch (const EchoError& e) {
                if (e.kind() == EchoError::Kind::TooFew) adapt(-1, rec);
                else if (e.kind() == EchoError::Kind::TooMany) adapt(+1, rec);
                else throw;
            }
            if (!pair && has_flag(rec.flags, RecordFlag::ThresholdAdapted)) pair = measure(threshold_);
        } catch (const std::exception&) {
            pair.reset();
        }

        if (pair) {
            try {
                rec.sound_speed = sound_speed_from_tof(pair->delta_t, s.geometry.base_length);
                rec.attenuation = attenuation_coefficient(pair->u_near, pair->u_far, s.geometry.base_length);
                rec.u_near = pair->u_near;
                rec.u_far = pair->u_far;
            } catch (const DomainError&) {
                pair.reset();
            }
        }
        if (!pair) {
            const auto nan = std::numeric_limits<double>::quiet_NaN();
            rec.sound_speed = rec.attenuation = rec.u_near = rec.u_far = nan;
            set_flag(rec.flags, RecordFlag::MeasurementInvalid);
        }

        rec.flags |= validate_record(rec, s.bounds).flags;
        rec.sequence = next_sequence_++;
        rec.tick = tick_++;
        rec.timestamp = static_cast<double>(rec.tick) / s.cycle_rate;
        last_record_ = rec;

        if (mode_ == DeviceMode::Autonomous) memory_.store(rec);
        else telemetry_.emplace_back(Opcode::Telemetry, encode_record(rec));
        return rec;
    }

    /// Executes one decoded command and returns the response frames.
    std::vector<Frame> handle_command(const Frame& cmd)
    {
        const auto op = cmd.opcode;
        const auto ack = [&] { return std::vector<Frame>{Frame(Opcode::Ack, {op})}; };
        const auto nak = [&](NakCode code) {
            return std::vector<Frame>{Frame(Opcode::Nak, {op, static_cast<std::uint8_t>(code)})};
        };

        switch (static_cast<Opcode>(op)) {
        case Opcode::SetMode:
            if (cmd.payload.size() != 1 || cmd.payload[0] > 3) return nak(NakCode::BadPayload);
            mode_ = static_cast<DeviceMode>(cmd.payload[0]);
            return ack();

        case Opcode::ReadRecord:
            if (!cmd.payload.empty()) return nak(NakCode::BadPayload);
            if (!last_record_) return nak(NakCode::NoData);
            return {Frame(Opcode::Record, encode_record(*last_record_))};

        case Opcode::ReadMem: {
            if (cmd.payload.size() != 8) return nak(NakCode::BadPayload);
            if (mode_ != DeviceMode::Memory) return nak(NakCode::WrongMode);
            ByteReader r(cmd.payload);
            const std::size_t first = r.u32();
            const std::size_t count = r.u32();
            std::vector<Frame> out;
            for (const auto& rec : memory_.read(first, count == 0 ? memory_.size() : count))
                out.emplace_back(Opcode::Record, encode_record(rec));
            out.push_back(ack().front());
            return out;
        }

        case Opcode::FormatMem:
            if (!cmd.payload.empty()) return nak(NakCode::BadPayload);
            if (mode_ != DeviceMode::Memory) return nak(NakCode::WrongMode);
            memory_.format();
            next_sequence_ = 0;
            last_record_.reset();
            return ack();

        case Opcode::WriteSettings: {
            if (mode_ != DeviceMode::Settings) return nak(NakCode::WrongMode);
            DeviceSettings s;
            try {
                s = decode_settings(cmd.payload);
            } catch (const std::exception&) {
                return nak(NakCode::InvalidSettings);
            }
            apply_settings(s);
            store_ = SettingsStore::from(s);
            settings_corrupt_ = false;
            return ack();
        }

        case Opcode::ReadSettings:
            if (!cmd.payload.empty()) return nak(NakCode::BadPayload);
            if (mode_ != DeviceMode::Settings) return nak(NakCode::WrongMode);
            return {Frame(Opcode::Settings, encode_settings(settings_))};

        case Opcode::Status:
            if (!cmd.payload.empty()) return nak(NakCode::BadPayload);
            return {Frame(Opcode::StatusReport, encode_status(status()))};

        default:
            return nak(NakCode::UnknownOpcode);
        }
    }

    /// Feeds raw link bytes; returns the encoded responses to every complete frame.
    std::vector<std::uint8_t> receive(std::span<const std::uint8_t> bytes)
    {
        parser_.push(bytes);
        std::vector<std::uint8_t> out;
        while (auto frame = parser_.next())
            for (const auto& resp : handle_command(*frame)) append_frame(out, resp);
        return out;
    }

private:
    Device(SettingsStore store, std::size_t memory_capacity) : store_(std::move(store)), memory_(memory_capacity)
    {
        const auto loaded = load_settings(store_);
        settings_corrupt_ = loaded.corrupt;
        apply_settings(loaded.settings);
    }

    void apply_settings(const DeviceSettings& s)
    {
        settings_ = s;
        threshold_ = s.comparator.threshold;
    }

    void require_measuring_mode() const
    {
        if (mode_ != DeviceMode::Autonomous && mode_ != DeviceMode::Telemetric)
            throw DeviceModeError("work cycle needs autonomous or telemetric mode, device is in " +
                                  std::string(to_string(mode_)));
    }

    void adapt(int step, DeviceRecord& rec)
    {
        const int next = std::clamp(threshold_ + step, 0, ComparatorConfig::kMaxThreshold);
        if (next != threshold_) set_flag(rec.flags, RecordFlag::ThresholdAdapted);
        threshold_ = next;
    }

    DeviceMode mode_ = DeviceMode::Autonomous;
    SettingsStore store_;
    DeviceSettings settings_;
    bool settings_corrupt_ = false;
    int threshold_ = 0;
    RecordMemory memory_;
    FrameParser parser_;
    std::uint32_t next_sequence_ = 0;
    std::uint64_t tick_ = 0;
    std::optional<DeviceRecord> last_record_;
    std::vector<Frame> telemetry_;
};

} // namespace svp

#endif // SVP_DEVICE_HPP
