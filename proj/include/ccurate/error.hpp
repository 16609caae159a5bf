#pragma once

#include <stdexcept>
#include <string>

namespace ccurate {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (thresholds, wordlists, templates, retained sets).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input in one of the file formats the pipeline reads.
class FormatError : public Error {
public:
    using Error::Error;
};

/// The archive ended in the middle of a record.
class TruncatedArchiveError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Optimistic-concurrency or state-transition violation.
class ConflictError : public Error {
public:
    using Error::Error;
};

} // namespace ccurate
