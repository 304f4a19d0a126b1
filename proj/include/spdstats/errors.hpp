#pragma once

#include <stdexcept>
#include <string>

namespace spdstats {

// Shape or argument problems (wrong dimensions, bad config values).
class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input violates a mathematical domain constraint (e.g. not PD).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical kernel failed (eigensolver did not converge, overflow).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed volume file; carries the byte offset where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " +
                           std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

}  // namespace spdstats
