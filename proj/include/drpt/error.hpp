#pragma once

#include <stdexcept>
#include <string>

namespace drpt {

// Broad error categories used by the CLI to pick exit codes:
// input/usage problems exit 2, numerical failures exit 3.
enum class ErrorCategory { input, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& msg)
        : std::runtime_error(msg), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(ErrorCategory::input, msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(ErrorCategory::input, msg) {}
};

// CSV/structure problems; carries a human-readable location in the message.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(ErrorCategory::input, msg) {}
};

class DecompositionError : public Error {
public:
    explicit DecompositionError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

class RankError : public Error {
public:
    explicit RankError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

class SingularSystemError : public Error {
public:
    explicit SingularSystemError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

class PerturbationError : public Error {
public:
    explicit PerturbationError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

}  // namespace drpt
