// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tablepref {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind {
    Usage,     // bad flags or configuration
    Data,      // malformed/missing input data
    Provider,  // model provider failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

struct LoadError : Error {
    explicit LoadError(const std::string& message) : Error(ErrorKind::Data, "load_error", message) {}
};

struct DecodeError : Error {
    explicit DecodeError(const std::string& message) : Error(ErrorKind::Data, "decode_error", message) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& message) : Error(ErrorKind::Usage, "config_error", message) {}
};

struct RenderError : Error {
    explicit RenderError(const std::string& message) : Error(ErrorKind::Data, "render_error", message) {}
};

struct AggregationError : Error {
    explicit AggregationError(const std::string& message)
        : Error(ErrorKind::Data, "aggregation_error", message) {}
};

struct GenerationError : Error {
    explicit GenerationError(const std::string& message)
        : Error(ErrorKind::Data, "generation_error", message) {}
};

struct RegistrationError : Error {
    explicit RegistrationError(const std::string& message)
        : Error(ErrorKind::Data, "registration_error", message) {}
};

struct NotFoundError : Error {
    explicit NotFoundError(const std::string& message) : Error(ErrorKind::Data, "not_found", message) {}
};

/// A write that contradicts data already stored.
struct ConflictError : Error {
    explicit ConflictError(const std::string& message) : Error(ErrorKind::Data, "conflict", message) {}
};

/// Well-formed input that breaks a domain rule.
struct ValidationError : Error {
    explicit ValidationError(const std::string& message)
        : Error(ErrorKind::Data, "validation_error", message) {}
};

struct ProviderError : Error {
    explicit ProviderError(const std::string& message) : Error(ErrorKind::Provider, "provider_error", message) {}
};

}  // namespace tablepref
