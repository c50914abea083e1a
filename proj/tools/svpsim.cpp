// svpsim: host tool for the simulated sound speed / attenuation profiler.

#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "svp/host.hpp"

namespace {

using namespace svp;
using namespace svp::host;

struct OutputFile {
    std::ofstream file;
    std::ostream* stream = &std::cout;

    explicit OutputFile(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw UsageError("cannot write '" + path + "'");
        stream = &file;
    }
};

std::vector<std::uint8_t> read_binary(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string opcode_name(std::uint8_t op)
{
    static const std::map<std::uint8_t, std::string> names{
        {0x01, "SET_MODE"}, {0x02, "READ_RECORD"}, {0x03, "READ_MEM"}, {0x04, "FORMAT_MEM"},
        {0x05, "WRITE_SETTINGS"}, {0x06, "READ_SETTINGS"}, {0x07, "STATUS"}, {0x80, "ACK"},
        {0x81, "NAK"}, {0x82, "RECORD"}, {0x83, "SETTINGS"}, {0x84, "STATUS_REPORT"}, {0x85, "TELEMETRY"}};
    const auto it = names.find(op);
    return it == names.end() ? "UNKNOWN" : it->second;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulator and host tool for a two-reflector sound speed and attenuation profiler"};
    app.require_subcommand(1);

    std::string constants_path;
    app.add_option("--constants", constants_path, "Instrument constants file (key = value)")->check(CLI::ExistingFile);

    auto* simulate = app.add_subcommand("simulate", "Run a simulated measurement campaign from a manifest");
    std::string manifest_path, csv_path, truth_path, dump_path;
    simulate->add_option("manifest", manifest_path, "Run manifest (key = value)")->required();
    simulate->add_option("--csv", csv_path, "Record CSV output (default: manifest output.csv, else stdout)");
    simulate->add_option("--truth", truth_path, "Ground-truth JSONL output");
    simulate->add_option("--dump", dump_path, "Binary memory dump output");

    auto* decode = app.add_subcommand("decode", "Tabulate a binary memory dump as CSV");
    std::string decode_in, decode_out;
    decode->add_option("dump", decode_in, "Dump file of RECORD frames")->required();
    decode->add_option("-o,--output", decode_out, "CSV output (default stdout)");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Pure-water sound speed calibration check");
    std::vector<double> temperatures;
    double noise_rms = 0.0, tolerance = 0.02;
    std::uint64_t seed = 1;
    std::string calib_out;
    calibrate_cmd->add_option("-t,--temperatures", temperatures, "Water temperatures, degC")->required()->delimiter(',');
    calibrate_cmd->add_option("--noise-rms", noise_rms, "Additive noise rms, mV");
    calibrate_cmd->add_option("--seed", seed, "Noise seed");
    calibrate_cmd->add_option("--tolerance", tolerance, "Allowed |residual|, m/s");
    calibrate_cmd->add_option("-o,--output", calib_out, "Report output (default stdout)");

    auto* send = app.add_subcommand("protocol-send", "Encode a raw command frame; optionally run it on a fresh device");
    int opcode = 0;
    std::string payload_hex;
    std::vector<int> preamble_modes;
    bool run_device = false;
    send->add_option("opcode", opcode, "Opcode, e.g. 0x07")->required()->check(CLI::Range(0, 255));
    send->add_option("-p,--payload", payload_hex, "Payload bytes as hex");
    send->add_flag("--device", run_device, "Feed the frame to a freshly powered-on device and print the responses");
    send->add_option("--mode", preamble_modes, "Switch the device to this mode (0-3) first")->check(CLI::Range(0, 3));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        const InstrumentConstants constants = constants_path.empty() ? InstrumentConstants{} : load_constants(constants_path);

        if (*simulate) {
            auto manifest = parse_manifest(KeyValueConfig::load(manifest_path));
            if (!csv_path.empty()) manifest.csv_path = csv_path;
            if (!truth_path.empty()) manifest.truth_path = truth_path;
            if (!dump_path.empty()) manifest.dump_path = dump_path;
            const auto result = run_simulation(manifest, constants);
            OutputFile csv(manifest.csv_path);
            write_records_csv(*csv.stream, result.records);
            if (!manifest.truth_path.empty()) {
                std::ofstream out(manifest.truth_path);
                if (!out) throw UsageError("cannot write '" + manifest.truth_path + "'");
                write_truth_jsonl(out, result.truths);
            }
            if (!manifest.dump_path.empty()) {
                std::ofstream out(manifest.dump_path, std::ios::binary);
                if (!out) throw UsageError("cannot write '" + manifest.dump_path + "'");
                out.write(reinterpret_cast<const char*>(result.dump.data()), static_cast<std::streamsize>(result.dump.size()));
            }
            return kOk;
        }

        if (*decode) {
            const auto bytes = read_binary(decode_in);
            const auto result = decode_dump(bytes);
            OutputFile out(decode_out);
            write_records_csv(*out.stream, result.records);
            if (result.truncated) {
                std::cerr << "warning: " << result.warning << '\n';
                return kDataError;
            }
            return kOk;
        }

        if (*calibrate_cmd) {
            CalibrationOptions opt;
            opt.scenario.noise_rms = noise_rms;
            opt.scenario.seed = seed;
            opt.tolerance = tolerance;
            const auto report = calibrate(temperatures, opt, constants);
            OutputFile out(calib_out);
            write_calibration(*out.stream, report);
            if (!report.passed()) {
                std::cerr << "calibration residual exceeds " << fmt9(tolerance) << " m/s\n";
                return kThresholdFailure;
            }
            return kOk;
        }

        if (*send) {
            const Frame cmd(static_cast<std::uint8_t>(opcode), from_hex(payload_hex));
            const auto bytes = encode_frame(cmd);
            std::cout << to_hex(bytes) << '\n';
            if (run_device) {
                auto dev = Device::power_on();
                for (int m : preamble_modes) transact(dev, Frame(Opcode::SetMode, {static_cast<std::uint8_t>(m)}));
                FrameParser parser;
                parser.push(dev.receive(bytes));
                for (const auto& f : parser.drain())
                    std::cout << opcode_name(f.opcode) << ' ' << to_hex(encode_frame(f)) << '\n';
            }
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}
