#pragma once

#include <stdexcept>
#include <string>

namespace embeval {

// Exit-code mapping used by the CLI: InputError -> 2, InvariantError -> 3,
// any other exception -> 4.

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace embeval
