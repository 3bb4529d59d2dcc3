#pragma once

#include <stdexcept>
#include <string>

namespace wbcde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value or combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Five points do not determine a unique conic with unit constant term.
class DegenerateConic : public Error {
public:
    using Error::Error;
};

/// Conic is a hyperbola, parabola or imaginary/degenerate ellipse.
class NotAnEllipse : public Error {
public:
    using Error::Error;
};

/// Rasterized perimeter has no pixel inside the frame.
class EmptyPerimeter : public Error {
public:
    using Error::Error;
};

/// Fewer than five edge pixels available for a candidate.
class InsufficientEdges : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace wbcde
