#pragma once

#include <stdexcept>
#include <string>

namespace medrex {

enum class ErrorKind {
  parse,
  validation,
  usage,
  config,
  transport,
  cassette_miss,
  io,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error parse_error(std::string msg) { return Error(ErrorKind::parse, std::move(msg)); }
inline Error validation_error(std::string msg) { return Error(ErrorKind::validation, std::move(msg)); }
inline Error usage_error(std::string msg) { return Error(ErrorKind::usage, std::move(msg)); }
inline Error config_error(std::string msg) { return Error(ErrorKind::config, std::move(msg)); }
inline Error transport_error(std::string msg) { return Error(ErrorKind::transport, std::move(msg)); }
inline Error cassette_miss_error(std::string msg) { return Error(ErrorKind::cassette_miss, std::move(msg)); }
inline Error io_error(std::string msg) { return Error(ErrorKind::io, std::move(msg)); }

}  // namespace medrex
