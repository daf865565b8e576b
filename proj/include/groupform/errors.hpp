#pragma once

#include <stdexcept>
#include <string>

namespace groupform {

/// Broad failure category; the CLI maps each category to an exit status.
enum class ErrorKind { config, numerical, io };

/// Base of every error raised by the library. `code` is a stable,
/// machine-readable identifier such as "empty_population".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string code, const std::string& message)
      : Error(ErrorKind::config, std::move(code), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(ErrorKind::numerical, std::move(code), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string code, const std::string& message)
      : Error(ErrorKind::io, std::move(code), message) {}
};

}  // namespace groupform
