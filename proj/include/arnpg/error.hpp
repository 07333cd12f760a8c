#pragma once

#include <stdexcept>
#include <string>

namespace arnpg {

/// Thrown when an input violates a documented precondition (shape, range).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a post-solve residual or a runtime-asserted invariant fails.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON/CSV documents and config schema violations.
class DocumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace arnpg
