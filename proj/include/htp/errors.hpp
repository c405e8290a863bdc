#pragma once

#include <stdexcept>
#include <string>

namespace htp {

// Base class for all pipeline errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed identifiers, broken invariants, bad configuration.
struct ValidationError : Error {
    using Error::Error;
};

// Unparseable file or response content. Messages carry line/context info.
struct ParseError : Error {
    using Error::Error;
};

// A requested entity (MIM, series, fixture, file) does not exist.
struct NotFoundError : Error {
    using Error::Error;
};

// Rejected credentials. Never retried.
struct AuthError : Error {
    using Error::Error;
};

// Transport-level failure (connect, timeout, 429, 5xx). Retriable.
struct NetworkError : Error {
    using Error::Error;
};

// Filesystem problem (unreadable input, unwritable output).
struct IoError : Error {
    using Error::Error;
};

// A metric has no defined value for the given inputs.
struct UndefinedMetricError : Error {
    using Error::Error;
};

} // namespace htp
