#pragma once

#include <stdexcept>
#include <string>

namespace pkil {

/// Error type thrown by all pkil modules. The message names the offending
/// entity (node id, file line, iteration index) where one exists.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pkil
