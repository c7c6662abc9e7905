#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roadqa {

/// Root of every error thrown by the library. The CLI maps the two families
/// below onto exit codes: validation problems exit 1, backend/IO problems exit 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Index embedded with a backend other than the one used to query it.
class StaleIndexError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

/// Fixture-file backend has no entry for the requested key.
class LookupError : public BackendError {
public:
    using BackendError::BackendError;
};

/// No admissible distractor set was found within the attempt budget.
class SamplingExhausted : public Error {
public:
    using Error::Error;
};

}  // namespace roadqa
