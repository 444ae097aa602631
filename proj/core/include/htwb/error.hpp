#pragma once

#include <stdexcept>
#include <string>

namespace htwb {

/// Base class for every error thrown by the library. Catching htwb::Error is
/// sufficient to intercept anything that is not a programming bug.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace htwb
