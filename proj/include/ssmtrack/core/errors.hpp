// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

#include <stdexcept>
#include <string>

namespace ssmtrack {

// Shape or argument contract violated by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value outside the mathematical domain of an operation (e.g. a non-positive step).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace ssmtrack
