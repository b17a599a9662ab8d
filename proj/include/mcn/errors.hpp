#pragma once

#include <stdexcept>
#include <string>

namespace mcn {

// Base for all library errors so callers can catch one type at the CLI edge.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trace input problems (exit code 2 territory).
struct ParseError : Error {
    using Error::Error;
};

struct MalformedLine : ParseError {
    std::size_t line_no;
    explicit MalformedLine(std::size_t line, const std::string& detail)
        : ParseError("malformed line " + std::to_string(line) + ": " + detail), line_no(line) {}
};

struct UnknownEventType : ParseError {
    explicit UnknownEventType(const std::string& token)
        : ParseError("unknown event type '" + token + "'") {}
};

struct UnknownTac : ParseError {
    explicit UnknownTac(const std::string& tac)
        : ParseError("unknown TAC '" + tac + "'") {}
};

// Model file problems.
struct SchemaViolation : Error {
    explicit SchemaViolation(const std::string& path, const std::string& detail)
        : Error("schema violation at " + path + ": " + detail) {}
};

struct FormatVersionMismatch : Error {
    explicit FormatVersionMismatch(const std::string& got)
        : Error("unsupported model format version '" + got + "'") {}
};

// Fitting / generation.
struct InsufficientData : Error {
    using Error::Error;
};

struct MissingKey : Error {
    using Error::Error;
};

struct IllegalTransition : Error {
    using Error::Error;
};

struct AlreadyFiveG : Error {
    AlreadyFiveG() : Error("model is already 5G") {}
};

// Statistics preconditions.
struct EmptySample : Error {
    explicit EmptySample(const std::string& who) : Error(who + ": empty sample") {}
};

struct NonPositiveSample : Error {
    explicit NonPositiveSample(const std::string& who)
        : Error(who + ": sample contains non-positive values") {}
};

struct DegenerateSample : Error {
    explicit DegenerateSample(const std::string& detail)
        : Error("degenerate sample: " + detail) {}
};

struct NoConvergence : Error {
    using Error::Error;
};

struct UnsupportedCombination : Error {
    using Error::Error;
};

struct DegenerateStream : Error {
    DegenerateStream() : Error("event stream has zero mean rate") {}
};

} // namespace mcn
