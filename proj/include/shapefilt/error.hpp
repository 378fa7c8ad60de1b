#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapefilt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Zero-area triangle or zero-volume tetrahedron; carries the offending element index.
class DegenerateElementError : public Error {
public:
    DegenerateElementError(std::size_t element, const std::string& what)
        : Error(what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

/// Element with non-positive Jacobian where a positive one is required.
class InvertedElementError : public Error {
public:
    InvertedElementError(std::size_t element, const std::string& what)
        : Error(what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

/// Closest-point queries against a surface without boundary edges.
class EmptyBoundaryError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace shapefilt
