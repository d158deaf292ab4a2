#pragma once

#include <stdexcept>
#include <string>

namespace ucc {

// Parsing and validation failures for domain documents (use cases, change
// lists, provisions, annotations). One kind per distinct contract error so
// callers and tests can tell them apart.
enum class ParseErrorKind {
    MalformedJson,
    MissingKey,
    WrongShape,
    ValidationFailed,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ParseErrorKind kind() const noexcept { return kind_; }

private:
    ParseErrorKind kind_;
};

// Prompt template validation and rendering failures.
enum class RenderErrorKind {
    UnknownPlaceholder,
    DuplicatePlaceholder,
    MissingPlaceholder,
    EmptyProvision,
};

const char* to_string(RenderErrorKind kind);

class RenderError : public std::runtime_error {
public:
    RenderError(RenderErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    RenderErrorKind kind() const noexcept { return kind_; }

private:
    RenderErrorKind kind_;
};

// LLM gateway failures. CacheMiss is distinct so a replay run can never
// silently fall through to the network.
enum class GatewayErrorKind {
    Config,
    CredentialMissing,
    Network,
    MalformedResponse,
    CacheMiss,
};

const char* to_string(GatewayErrorKind kind);

class GatewayError : public std::runtime_error {
public:
    GatewayError(GatewayErrorKind kind, std::string message, int http_status = 0)
        : std::runtime_error(std::move(message)), kind_(kind), http_status_(http_status) {}

    GatewayErrorKind kind() const noexcept { return kind_; }
    int http_status() const noexcept { return http_status_; }

private:
    GatewayErrorKind kind_;
    int http_status_;
};

// Selection answer extraction failures (pipeline parse_selection).
enum class SelectionParseErrorKind {
    NoJsonObject,
    AnswerMissing,
    InvalidAnswer,
};

const char* to_string(SelectionParseErrorKind kind);

class SelectionParseError : public std::runtime_error {
public:
    SelectionParseError(SelectionParseErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    SelectionParseErrorKind kind() const noexcept { return kind_; }

private:
    SelectionParseErrorKind kind_;
};

// Pipeline-level failures not covered by the parsers above.
enum class PipelineErrorKind {
    NoStories,
    ExtractionFailed,
};

const char* to_string(PipelineErrorKind kind);

class PipelineError : public std::runtime_error {
public:
    PipelineError(PipelineErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    PipelineErrorKind kind() const noexcept { return kind_; }

private:
    PipelineErrorKind kind_;
};

// Evaluation harness failures (prediction/annotation joins).
enum class EvalErrorKind {
    MissingAnnotation,
    DuplicateId,
};

const char* to_string(EvalErrorKind kind);

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    EvalErrorKind kind() const noexcept { return kind_; }

private:
    EvalErrorKind kind_;
};

// Bad CLI arguments, unreadable input files, inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::string message) : std::runtime_error(std::move(message)) {}
};

} // namespace ucc
