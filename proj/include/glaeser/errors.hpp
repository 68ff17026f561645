#pragma once

#include <stdexcept>
#include <string>

namespace glaeser {

/// Violated precondition or mismatched shapes between values that are
/// required to agree (basepoints, degrees, dimensions).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Runtime failure while evaluating an expression (division by zero,
/// 0 raised to a negative power); the message names the offending node.
class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the supported fragment (non-polynomial f for the
/// closed-form criterion, deep derivatives through non-smooth nodes).
class UnsupportedInput : public std::runtime_error {
public:
    explicit UnsupportedInput(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input (expression or JSON file).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Minimization over a fiber that is the empty set.
class EmptyFiberError : public std::runtime_error {
public:
    explicit EmptyFiberError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical result far enough outside its guaranteed range that it
/// indicates a logic bug rather than roundoff.
class InternalConsistencyError : public std::logic_error {
public:
    explicit InternalConsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// Problem too large for the dense/sparse solvers; the message tells the
/// caller how to shrink it.
class SizeError : public std::runtime_error {
public:
    explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace glaeser
