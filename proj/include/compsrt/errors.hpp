#pragma once

#include <stdexcept>
#include <string>

namespace csrt {

// Bad caller-supplied argument (wrong shape, out-of-range knob, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed on-disk bytes: bad magic, version, truncation, trailing data.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed data that violates a value invariant (NaN payload, code out of range).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input for which a statistic is undefined (zero variance, all-zero deltas).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace csrt
