#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bridgewatch {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field value that does not match its canonical text encoding.
class EncodingError : public Error {
public:
    EncodingError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed input file; carries the file and 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ParamError : public Error {
public:
    using Error::Error;
};

}  // namespace bridgewatch
