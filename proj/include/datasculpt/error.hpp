#pragma once

#include <stdexcept>
#include <string>

namespace datasculpt {

// Bad input, broken invariant or violated precondition. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or stream failure. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace datasculpt
