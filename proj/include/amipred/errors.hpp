#pragma once

#include <stdexcept>
#include <string>

namespace amipred {

// Bad configuration: unknown options, unreadable config files, invalid
// hyperparameters. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Data that violates a schema or an integrity invariant: malformed rows,
// dangling foreign keys, degenerate inputs. CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Contract violations between components (dimension mismatches and the
// like). CLI maps this to exit code 4.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace amipred
