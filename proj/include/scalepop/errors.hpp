#pragma once

#include <stdexcept>
#include <string>

namespace scalepop {

// File could not be opened/read at all, as opposed to malformed content.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed record; carries the 1-based line number it was found on.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, long line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

// Zero usable records where at least one is required.
class EmptyInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough populated bins/samples for the requested estimate.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad command line, config value, or parameter domain.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace scalepop
