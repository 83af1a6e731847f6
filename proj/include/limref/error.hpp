#pragma once

#include <stdexcept>
#include <string>

namespace limref {

enum class ErrorKind {
    InputValidation,
    Numerical,
};

// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& message) {
    throw Error(ErrorKind::InputValidation, message);
}

[[noreturn]] inline void fail_numeric(const std::string& message) {
    throw Error(ErrorKind::Numerical, message);
}

} // namespace limref
