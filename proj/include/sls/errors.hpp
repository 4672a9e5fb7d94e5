#pragma once

#include <stdexcept>
#include <string>

namespace sls {

// Error taxonomy mirrored by the C API status codes.
struct InvalidConfigError : std::runtime_error {
    explicit InvalidConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Column synthesis cannot satisfy the sparsity constraints (names the first bad k).
struct SynthesisError : std::runtime_error {
    explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Simulator: a message would violate its stage hop bound, or a neighbor message is missing.
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

struct InstabilityError : std::runtime_error {
    explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sls
