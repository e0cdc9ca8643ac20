#pragma once

#include <stdexcept>
#include <string>

namespace agwo {

/// Base class of every error raised by the library. The kind maps onto the
/// CLI exit-code contract (see tools/cli.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Vector lengths or batch sizes that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite objective values, failed judge calls, empty batches.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Transport-level failure that survived all retries.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Backend answered with something we cannot interpret. Not retried.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Malformed input files (carries the offending line in the message).
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Test items overlap the optimization pool (CLI exit 3).
class LeakageError : public Error {
public:
    using Error::Error;
};

/// The run cannot continue (e.g. provider outage). State has been checkpointed.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, std::string checkpoint)
        : Error(what), checkpoint_path(std::move(checkpoint)) {}
    std::string checkpoint_path;
};

} // namespace agwo
