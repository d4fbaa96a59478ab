#pragma once
#include <stdexcept>
#include <string>

namespace robsched {

// Bad user-supplied data: malformed instance, inconsistent dimensions, invalid CLI args.
struct InvalidInputError : std::runtime_error {
  explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

// A request whose exact answer would exceed hard size limits (tree nodes, enumeration width).
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// An operation that is well-defined mathematically but not implemented for this set kind.
struct UnsupportedSetError : std::runtime_error {
  explicit UnsupportedSetError(const std::string& what) : std::runtime_error(what) {}
};

// Conditioning produced an empty uncertainty set (observed history has probability zero).
struct EmptySetError : std::runtime_error {
  explicit EmptySetError(const std::string& what) : std::runtime_error(what) {}
};

// The numerical kernel could not certify its answer (pivot breakdown, duality gap).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robsched
