#pragma once

#include <stdexcept>
#include <string>

namespace hkidqg {

// Every error raised by the library derives from Error so callers can catch
// one type at the pipeline boundary and tag the failing stage.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Internal invariant broken by the caller (stale trace, out-of-bounds crop).
class ContractViolation : public Error {
public:
    using Error::Error;
};

}  // namespace hkidqg
