#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsi {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassMissingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    InsufficientDataError(const std::string& what, std::size_t achieved, std::size_t required)
        : std::runtime_error(what + ": collected " + std::to_string(achieved) + " of " +
                             std::to_string(required)),
          achieved(achieved),
          required(required) {}
    std::size_t achieved;
    std::size_t required;
};

struct DegenerateConceptError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CoverageError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace hsi
