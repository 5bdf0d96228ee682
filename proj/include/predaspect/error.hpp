#pragma once

#include <stdexcept>
#include <string>

namespace predaspect {

// Base class for every error raised by the library. `kind()` is a short,
// stable tag used by the CLI when it prints a structured error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed on-disk input (embedding files, CoNLL-U, index TSV, logs).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

// Input that parses but violates a data invariant.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error("data", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace predaspect
