#pragma once

#include <stdexcept>
#include <string>

namespace aviary {

// Input that violates a documented contract (bad value, bad header, bad
// config). The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parse failure with a location: a CSV row number (1-based, header is row 1)
// or a byte offset into a binary container.
class ParseError : public ValidationError {
public:
    enum class Unit { Row, ByteOffset };

    ParseError(const std::string& what, Unit unit, std::size_t location)
        : ValidationError(what + (unit == Unit::Row ? " row " : " at byte offset ") +
                          std::to_string(location)),
          unit_(unit), location_(location) {}

    Unit unit() const noexcept { return unit_; }
    std::size_t location() const noexcept { return location_; }

private:
    Unit unit_;
    std::size_t location_;
};

// Missing, unreadable, or unwritable file. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aviary
