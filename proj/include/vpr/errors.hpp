#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace vpr {

// Base of every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownTagError : public Error { public: using Error::Error; };
class EmptyInputError : public Error { public: using Error::Error; };

// Transport failed (connection, timeout). Retried by chat()/embed().
class TransportError : public Error { public: using Error::Error; };
// Endpoint answered with a non-2xx status or an unusable body.
class BackendError : public Error { public: using Error::Error; };
class EmptyCompletionError : public Error { public: using Error::Error; };
class ScriptExhaustedError : public Error { public: using Error::Error; };

class NoJsonFoundError : public Error { public: using Error::Error; };
class MalformedJsonError : public Error { public: using Error::Error; };

class DimensionMismatchError : public Error { public: using Error::Error; };
class ZeroVectorError : public Error { public: using Error::Error; };

class PolicySchemaError : public Error { public: using Error::Error; };
class AtomSchemaError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

// A hard agent error aborted a pipeline run. Carries whatever part of the
// trace had been assembled before the failure.
class PipelineError : public Error {
public:
    PipelineError(const std::string& what, nlohmann::json partial)
        : Error(what), partial_trace(std::move(partial)) {}

    nlohmann::json partial_trace;
};

}  // namespace vpr
