#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lut4d {

// Root of every error the library throws. The CLI maps each subclass to an
// exit code (see exit_code()).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Malformed file contents (unsupported image encoding, truncated data...).
class FormatError : public IoError {
public:
    using IoError::IoError;
};

enum class ParseErrorKind {
    MissingSize,
    BadSize,
    BadDomain,
    UnknownKeyword,
    NonNumeric,
    NonFinite,
    WrongFieldCount,
    WrongLineCount,
};

const char* to_string(ParseErrorKind kind) noexcept;

// cube4 parse failure; carries the 1-based line number (0 when the failure
// concerns the file as a whole, e.g. end of file reached too early).
class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail);
    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    ParseErrorKind kind_;
    std::size_t line_;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// CLI exit status for an exception: 2 usage, 3 I/O, 4 shape/validation,
// 5 numeric. Anything unrecognised is reported as 1.
int exit_code(const std::exception& e) noexcept;

}  // namespace lut4d
