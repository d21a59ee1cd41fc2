#pragma once

#include <stdexcept>
#include <string>

namespace cmaa2c {

/// A caller broke a documented precondition (shape mismatch, out-of-range argument).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad or inconsistent configuration; the CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values appeared during training or evaluation; the CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace cmaa2c
