#pragma once

#include <stdexcept>
#include <string>

namespace fewshot {

/// Base for every error the toolkit raises. `code()` is a stable,
/// machine-readable identifier used in the CLI's JSON error output.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Dataset or data-file validation failure. `record` names the offending
/// example id (or is empty), `line` is 1-based (0 when not line-oriented).
class ValidationError : public Error {
public:
    ValidationError(std::string code, const std::string& message, std::string record = {},
                    std::size_t line = 0)
        : Error(std::move(code), message), record_(std::move(record)), line_(line) {}

    const std::string& record() const noexcept { return record_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string record_;
    std::size_t line_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace fewshot
