#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gparse {

// Malformed user input (category strings, bracketed trees, data files).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Input data that is well formed but unusable (OOV word without a policy,
// misaligned files, invalid corpus records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: missing parameter blocks, invalid limits, bad flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The agenda ran dry before a complete parse was explored.
class SearchExhausted : public std::runtime_error {
 public:
  SearchExhausted() : std::runtime_error("agenda exhausted: no parse exists under the grammar") {}
};

// Broken internal contract; always a bug in the caller or the library.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gparse
