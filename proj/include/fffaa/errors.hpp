#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fffaa {

// Process exit codes used by the CLI. Each error type maps to one of them.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    parse = 3,
    geometry = 4,
    ordering = 5,
};

class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }
    virtual ExitCode exit_code() const noexcept = 0;

private:
    std::string module_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
    ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

// Malformed STL or G-code input. `position` is a byte offset for STL and a
// 1-based line number for G-code.
class ParseError : public Error {
public:
    ParseError(std::string module, const std::string& what, std::size_t position)
        : Error(std::move(module), what + " (at " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }
    ExitCode exit_code() const noexcept override { return ExitCode::parse; }

private:
    std::size_t position_;
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error("geometry", what) {}
    ExitCode exit_code() const noexcept override { return ExitCode::geometry; }
};

class OrderingError : public Error {
public:
    explicit OrderingError(const std::string& what) : Error("ordering", what) {}
    ExitCode exit_code() const noexcept override { return ExitCode::ordering; }
};

} // namespace fffaa
