#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusion {

/// Coarse error classes. Every concrete error maps to exactly one of these;
/// the HTTP layer and the CLI derive status and exit codes from it.
enum class ErrorCode { not_found, validation, conflict, integrity, internal };

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ErrorCode code() const noexcept { return ErrorCode::internal; }
};

class ValidationError : public Error {
public:
    using Error::Error;
    ErrorCode code() const noexcept override { return ErrorCode::validation; }
};

class NotFoundError : public Error {
public:
    using Error::Error;
    ErrorCode code() const noexcept override { return ErrorCode::not_found; }
};

class IntegrityError : public Error {
public:
    using Error::Error;
    ErrorCode code() const noexcept override { return ErrorCode::integrity; }
};

class ConflictError : public Error {
public:
    using Error::Error;
    ErrorCode code() const noexcept override { return ErrorCode::conflict; }
};

// Bundle and model input errors.
class BundleFormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    ParseError(std::string file, std::size_t line, const std::string& what);
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class ModelFormatError : public ValidationError {
public:
    ModelFormatError(std::string field_path, const std::string& what);
    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

// Device driver errors.
class DriverStateError : public Error {
public:
    using Error::Error;
};

class ComponentNotPresentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ActionNotSupportedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};


class ReplayDivergenceError : public Error {
public:
    ReplayDivergenceError(std::size_t step, const std::string& what);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Session and report errors.
class StaleSuggestionError : public ConflictError {
public:
    using ConflictError::ConflictError;
};

class SessionClosedError : public ConflictError {
public:
    using ConflictError::ConflictError;
};

class GapError : public ValidationError {
public:
    explicit GapError(std::vector<int> manual_steps);
    const std::vector<int>& manual_steps() const noexcept { return manual_steps_; }

private:
    std::vector<int> manual_steps_;
};

}  // namespace fusion
