#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace morpheval {

// Thrown for invalid inputs: malformed files, bad parameters, violated
// preconditions. The message is what the CLI reports to the user.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  throw Error(detail::concat(std::forward<Args>(args)...));
}

}  // namespace morpheval
