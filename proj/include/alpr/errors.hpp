#pragma once

#include <stdexcept>
#include <string>

namespace alpr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller broke an operation's precondition or a type invariant.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

/// Grid tensor payload cannot be decoded (non-finite values and the like).
class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& msg) : Error(msg) {}
};

/// Character arrangement is impossible (empty character set).
class ArrangementError : public Error {
public:
    explicit ArrangementError(const std::string& msg) : Error(msg) {}
};

/// A document failed to load: missing file, malformed payload, or schema violation.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Evaluation inputs are inconsistent (e.g. results reference an unknown frame).
class EvalError : public Error {
public:
    explicit EvalError(const std::string& msg) : Error(msg) {}
};

/// Filesystem write failure, reported with the path involved.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace alpr
