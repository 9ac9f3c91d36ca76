#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace retrofit {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in an ontology document. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string &message, std::size_t line, std::size_t column, const std::string &source = {});

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    /// Message without the location prefix.
    [[nodiscard]] const std::string &detail() const noexcept { return detail_; }
    [[nodiscard]] const std::string &source() const noexcept { return source_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
    std::string source_;
};

/// A Turtle construct outside the supported subset (collections, property lists, ...).
class UnsupportedConstructError : public ParseError {
public:
    UnsupportedConstructError(const std::string &construct, std::size_t line, std::size_t column,
                              const std::string &source = {});

    [[nodiscard]] const std::string &construct() const noexcept { return construct_; }

private:
    std::string construct_;
};

class LabelError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

// provider failures
class ProviderError : public Error {
public:
    using Error::Error;
};
class AuthError : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class RateLimitError : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class TimeoutError : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class MalformedResponseError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class EmbeddingError : public Error {
public:
    using Error::Error;
};

class MetricsError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace retrofit
