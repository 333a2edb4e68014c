#pragma once

#include <stdexcept>
#include <string>

namespace axiseg {

// Error categories line up with the CLI exit codes:
//   UsageError -> 2, FormatError -> 3, BackendError -> 4, InvariantError -> 5.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration, bad arguments, empty inputs.
class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed input files or wire data (DICOM, RVOL, PNG, protocol frames).
class FormatError : public Error {
public:
    using Error::Error;
};

// A segmenter backend misbehaved: handshake mismatch, bad frame, dead process.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what, std::string stderr_tail = {})
        : Error(what), stderr_tail_(std::move(stderr_tail)) {}

    const std::string& stderr_tail() const { return stderr_tail_; }

private:
    std::string stderr_tail_;
};

// A library invariant was violated; indicates a bug, not bad input.
class InvariantError : public Error {
public:
    using Error::Error;
};

} // namespace axiseg
