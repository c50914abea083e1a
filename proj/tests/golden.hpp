#ifndef SVP_TESTS_GOLDEN_HPP
#define SVP_TESTS_GOLDEN_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace golden {

struct FrameCase {
    std::string name;
    std::uint8_t opcode = 0;
    std::vector<std::uint8_t> payload;
    std::vector<std::uint8_t> encoded;
};

inline std::vector<std::uint8_t> hex_bytes(const std::string& text)
{
    std::istringstream in(text);
    std::vector<std::uint8_t> out;
    std::string tok;
    while (in >> tok) out.push_back(static_cast<std::uint8_t>(std::stoul(tok, nullptr, 16)));
    return out;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::vector<FrameCase> load_frames(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<FrameCase> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::istringstream row(line);
        std::string col;
        while (std::getline(row, col, '|')) cols.push_back(trim(col));
        if (cols.size() != 4) throw std::runtime_error("bad golden line: " + line);
        out.push_back({cols[0], static_cast<std::uint8_t>(std::stoul(cols[1], nullptr, 16)), hex_bytes(cols[2]),
                       hex_bytes(cols[3])});
    }
    return out;
}

inline std::string frames_path() { return std::string(SVP_SOURCE_DIR) + "/tests/golden/frames.txt"; }

} // namespace golden

#endif
