#ifndef SVP_ERRORS_HPP
#define SVP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svp {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed text or binary input. `line()` is 1-based for text sources and
/// holds the byte offset for binary ones.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (at " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The comparator never fired.
class NoTriggerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The record ended before a required half-wave was complete.
class TruncatedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Echo structure is not the expected two non-overlapping bursts.
class EchoError : public std::runtime_error {
public:
    enum class Kind { TooFew, TooMany, Overlap, Other };

    explicit EchoError(const std::string& what, Kind kind = Kind::Other) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Operation not permitted in the device's current mode.
class DeviceModeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace svp

#endif // SVP_ERRORS_HPP
