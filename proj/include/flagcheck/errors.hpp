#pragma once

#include <stdexcept>
#include <string>

namespace flagcheck {

// Bad caller input: mismatched dimensions, invalid indices, broken invariants.
class ArgumentError : public std::invalid_argument {
public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested object exceeds the configured dimension cap.
class CapacityError : public std::runtime_error {
public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// A measure cannot evaluate states of this shape (e.g. eof_2q beyond two qubits).
class CapabilityError : public std::runtime_error {
public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// A construction came out empty (e.g. typicality window contains no k).
class DegenerateError : public std::runtime_error {
public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or invariant-violating QSTATE/KRAUS input.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flagcheck
