#pragma once

#include <stdexcept>
#include <string>

namespace polopt {

/// Malformed or schema-violating input file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polopt
