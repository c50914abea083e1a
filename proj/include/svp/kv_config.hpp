#ifndef SVP_KV_CONFIG_HPP
#define SVP_KV_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "svp/errors.hpp"

namespace svp {

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Full-precision decimal parse; rejects trailing text and non-finite values.
inline std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace detail

/// Flat `key = value` text config. `#` starts a comment; keys are unique.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text)
    {
        KeyValueConfig cfg;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
            ++line_no;
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;

            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
            const std::string key{detail::trim(line.substr(0, eq))};
            if (key.empty()) throw ParseError("empty key", line_no);
            if (cfg.values_.count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
            cfg.values_[key] = Entry{std::string{detail::trim(line.substr(eq + 1))}, line_no};
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open '" + path + "'", 0);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::vector<std::string> keys() const
    {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

    std::string string(const std::string& key, std::string fallback = {}) const
    {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second.value;
    }

    double number(const std::string& key) const
    {
        const auto& e = entry(key);
        const auto v = detail::parse_double(e.value);
        if (!v) throw ParseError("'" + key + "' is not a finite number", e.line);
        return *v;
    }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key, long long fallback) const
    {
        if (!has(key)) return fallback;
        const auto& e = entry(key);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
        if (ec != std::errc{} || ptr != e.value.data() + e.value.size())
            throw ParseError("'" + key + "' is not an integer", e.line);
        return v;
    }

    /// Comma-separated list of numbers.
    std::vector<double> numbers(const std::string& key) const
    {
        const auto& e = entry(key);
        std::vector<double> out;
        std::string_view rest = e.value;
        while (true) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            const auto v = detail::parse_double(item);
            if (!v) throw ParseError("'" + key + "' has a non-numeric item '" + std::string(detail::trim(item)) + "'", e.line);
            out.push_back(*v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    const Entry& entry(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing key '" + key + "'", 0);
        return it->second;
    }

    std::map<std::string, Entry> values_;
};

} // namespace svp

#endif // SVP_KV_CONFIG_HPP
