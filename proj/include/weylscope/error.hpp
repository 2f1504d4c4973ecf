#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace weylscope {

// Base of every error raised by the library. The CLI maps the subclasses to
// exit codes: InputError/ParseError -> 2, DomainError and its children -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed user input: files, flags, names, parameters.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

// A mathematical precondition failed at evaluation time (log of a
// non-positive number, indefinite metric, vanishing eigenvalue, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Requested more derivatives than a field can supply.
class OrderError : public DomainError {
public:
    using DomainError::DomainError;
};

// The top eigenvalue of W+ is not simple enough to define an eigenform.
class GapError : public DomainError {
public:
    GapError(std::string message, double gap, double tolerance);

    double gap() const noexcept { return gap_; }
    double tolerance() const noexcept { return tolerance_; }

private:
    double gap_;
    double tolerance_;
};

}  // namespace weylscope
