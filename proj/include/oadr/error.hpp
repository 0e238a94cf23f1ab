#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace oadr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary or text payload does not match its declared layout.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

// A record or argument violates a domain invariant.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace oadr
