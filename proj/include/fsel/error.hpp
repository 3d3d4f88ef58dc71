#pragma once

#include <stdexcept>
#include <string>

namespace fsel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

// LLM completion text that yields no usable score.
struct ParseError : Error {
    using Error::Error;
};

// Transport-level failure talking to a completion endpoint.
struct TransportError : Error {
    using Error::Error;
};

// Metadata provider failure that is not a plain "not found".
struct RetrievalError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

}  // namespace fsel
