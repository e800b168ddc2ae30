#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pprtrack {

// Dense internal node index. External string ids are interned append-only,
// so an index never changes meaning within a run.
using NodeId = std::uint32_t;

// Integer snapshot id from the event stream; 0 is the initial graph build.
using Snapshot = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A deletion would drive an edge weight below zero (malformed stream).
class NegativeWeightError : public Error {
public:
    using Error::Error;
};

// Internal tracker state is inconsistent (e.g. non-finite values).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Two node representations with different modes/dimensions were compared.
class ModeMismatchError : public Error {
public:
    using Error::Error;
};

// An injection plan cannot be satisfied on the given graph.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// A labeled node has no score series at evaluation time.
class MissingSeriesError : public Error {
public:
    using Error::Error;
};

// Graph exceeds the size cap for the dense oracle.
class CapExceededError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace pprtrack
