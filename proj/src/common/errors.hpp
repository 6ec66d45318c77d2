#pragma once

#include <stdexcept>
#include <string>

namespace gfomlb {

enum class ErrorKind { config, domain, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad user input: malformed JSON, missing rule index, inconsistent sizes.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// Argument outside the mathematical domain of an operation (tau2 <= 0, non-PSD Q).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

// A computation could not meet its accuracy contract.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Filesystem failure while reading configs or writing outputs.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace gfomlb
