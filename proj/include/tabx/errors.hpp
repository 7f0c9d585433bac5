#pragma once

#include <stdexcept>
#include <string>

namespace tabx {

// Base for all tabx failures so callers can catch the whole family at once.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse-level failure; carries a 1-based line/column when the input format has them.
class MalformedInput : public Error {
public:
    MalformedInput(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
        : Error(locate(msg, line, column)), line(line), column(column) {}
    std::size_t line;
    std::size_t column;

private:
    static std::string locate(const std::string& msg, std::size_t line, std::size_t column) {
        if (line == 0) return msg;
        std::string out = msg + " (line " + std::to_string(line);
        if (column != 0) out += ", column " + std::to_string(column);
        return out + ")";
    }
};

class AmbiguousHierarchy : public Error {
public:
    using Error::Error;
};

class InconsistentAlignment : public Error {
public:
    using Error::Error;
};

class InconsistentInputs : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class TooFewItems : public Error {
public:
    using Error::Error;
};

class InvalidP : public Error {
public:
    using Error::Error;
};

class TargetOutOfRange : public Error {
public:
    using Error::Error;
};

// A perturbation kind that cannot apply to the given table (e.g. unit shift on
// a text-only table). Callers may resample the target or pick another kind.
class KindInapplicable : public Error {
public:
    using Error::Error;
};

class MissingBinding : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

class Timeout : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

}  // namespace tabx
