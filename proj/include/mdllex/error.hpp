#pragma once

#include <stdexcept>
#include <string>

namespace mdllex {

// Bad input data: unreadable or empty corpora, corrupt compressed files,
// malformed sidecar files. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke an operation's precondition (unknown id, duplicate
// definition, deleting a terminal, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace mdllex
