#pragma once

#include <stdexcept>
#include <string>

namespace periodbounds {

/// Input outside the mathematical domain of an operation (CLI exit code 2).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its tolerance within budget (exit code 3).
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an artifact failed (exit code 4).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace periodbounds
