#pragma once

#include <stdexcept>
#include <string>

namespace ralign {

/// Broad failure classes. The CLI maps each one onto a stable exit code.
enum class ErrorCategory {
    Input,         ///< unreadable file, malformed format, parse failure
    DataContract,  ///< well-formed data that violates a cross-object contract
    Parameter,     ///< caller-supplied parameter out of range
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::DataContract, what) {}
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorCategory::Parameter, what) {}
};

int exit_code(ErrorCategory category) noexcept;

}  // namespace ralign
