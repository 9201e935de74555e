// error.hpp
// Exception hierarchy shared by all meanlab modules.
//
// The CLI maps these onto exit codes:
//   ParseError / UsageError             -> 1
//   ContractError / PreconditionError /
//   EvaluationError / RangeError        -> 2
//   ResourceError                       -> 3

#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace meanlab {

// Caller broke a documented precondition (argument out of range, etc).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A mathematical hypothesis required by an operation does not hold
// (e.g. P+(D) > x for sifted mean values).
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical evaluation produced something unusable: non-finite rule values,
// vanishing Euler factors, divergent local sums.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A y-grid or index range turned out empty for the given x.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Table would exceed the configured memory budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ParseErrorKind { Syntax, UnknownName, MalformedKvlist, Arity, Type };

// Spec-expression parse failure; offset is a byte offset into the input.
class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          kind_(kind), offset_(offset) {}
    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
};

} // namespace meanlab
