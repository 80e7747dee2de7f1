#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degenerate or invalid geometric input (non-convex, non-simple, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A point or path leaves free space.
class NotInFreeSpace : public Error {
public:
    explicit NotInFreeSpace(const std::string& what, std::ptrdiff_t index = -1)
        : Error(what), index_(index) {}

    /// Index of the first offending vertex/segment, or -1 for single points.
    std::ptrdiff_t index() const { return index_; }

private:
    std::ptrdiff_t index_;
};

/// Arguments that violate an operation's preconditions.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class Unreachable : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Invariant violated inside the library; indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace cdt
