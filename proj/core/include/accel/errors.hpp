#pragma once

#include <stdexcept>
#include <string>

namespace accel {

// Error taxonomy. input_error/format_error map to CLI exit code 2
// (caller mistakes), io_error/numeric_error/state_error to exit code 1.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Caller passed an argument violating a precondition.
class input_error : public error {
public:
  using error::error;
};

// Operation invalid for the object's current state.
class state_error : public error {
public:
  using error::error;
};

// Malformed external data (CSV cell, JSON shape).
class format_error : public error {
public:
  using error::error;
};

// Filesystem failure.
class io_error : public error {
public:
  using error::error;
};

// Non-finite values produced mid-computation. Solvers catch this and
// report status "diverged" instead of propagating.
class numeric_error : public error {
public:
  using error::error;
};

} // namespace accel
