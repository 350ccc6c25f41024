#pragma once

#include <stdexcept>
#include <string>

namespace abr {

// Base class for every error raised by the library. Subtypes exist so
// callers can react to specific conditions (re-baseline on CounterWrap,
// reject a malformed file, ...) without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Cumulative byte counter went backwards (interface reset / counter wrap).
// The reading pair must be discarded and the probe re-baselined.
class CounterWrap : public Error {
public:
    using Error::Error;
};

// Counter readings or samples not in strictly increasing time order.
class InvalidInterval : public Error {
public:
    using Error::Error;
};

class NonMonotonicTimestamp : public Error {
public:
    using Error::Error;
};

// Query outside the domain of a trace.
class OutOfRange : public Error {
public:
    using Error::Error;
};

// Trace does not cover the requested session duration.
class TraceTooShort : public Error {
public:
    using Error::Error;
};

// Decision stream unsorted or with timestamps outside the session.
class InvalidDecisionOrder : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Mock advisor could not bind its listening port.
class BindError : public Error {
public:
    using Error::Error;
};

// Malformed input file (CSV / JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

// A configuration value violates its documented invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace abr
