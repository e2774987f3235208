#pragma once

#include <stdexcept>
#include <string>

namespace corekg {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CorpusEmptyError : std::runtime_error {
    explicit CorpusEmptyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TemplateError : std::runtime_error {
    explicit TemplateError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BackendUnavailableError : std::runtime_error {
    explicit BackendUnavailableError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CacheMissError : std::runtime_error {
    explicit CacheMissError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyGraphError : std::runtime_error {
    explicit EmptyGraphError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OverrideError : std::runtime_error {
    explicit OverrideError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidBaseError : std::runtime_error {
    explicit InvalidBaseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PassFailureError : std::runtime_error {
    explicit PassFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace corekg
