#pragma once

#include <stdexcept>
#include <string>

namespace elastfem {

/// Raised for violated preconditions and numerical breakdowns anywhere in the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace elastfem
