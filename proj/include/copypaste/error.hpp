#pragma once

#include <stdexcept>
#include <string>

namespace copypaste {

/// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: bad JSON, broken RLE strings, dangling references.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or usage. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system and codec failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Two buffers that must share a shape do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace copypaste
