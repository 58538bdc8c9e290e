#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polmine {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input. offset is the byte position in the input being parsed,
// or npos when the error is not tied to one position.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& message, std::size_t offset = npos)
      : Error(offset == npos ? message
                             : message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A value violates the invariants of its domain type.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace polmine
