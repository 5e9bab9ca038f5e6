#ifndef XLQ_ERROR_HPP
#define XLQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace xlq {

struct XlqError : std::runtime_error {
    explicit XlqError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unsupported XML input. Carries a byte offset into the input.
struct ParseError : XlqError {
    size_t position;
    ParseError(size_t pos, const std::string& reason)
        : XlqError("parse error at offset " + std::to_string(pos) + ": " + reason),
          position(pos) {}
};

// Input document uses one of the reserved numbering attribute names.
struct ReservedAttribute : XlqError {
    explicit ReservedAttribute(const std::string& name)
        : XlqError("input document uses reserved attribute '" + name + "'") {}
};

struct QueryParseError : XlqError {
    size_t position;
    QueryParseError(size_t pos, const std::string& reason)
        : XlqError("query parse error at offset " + std::to_string(pos) + ": " + reason),
          position(pos) {}
};

struct UnsupportedFeature : XlqError {
    explicit UnsupportedFeature(const std::string& what)
        : XlqError("unsupported query feature: " + what) {}
};

// The free-of-equalities path matches no chain of schema rules.
struct EmptySpecialization : XlqError {
    explicit EmptySpecialization(const std::string& what)
        : XlqError("query matches no schema path: " + what) {}
};

// Atom set handed to document reconstruction contradicts itself or the rules.
struct InconsistentAtoms : XlqError {
    explicit InconsistentAtoms(const std::string& what)
        : XlqError("inconsistent atoms: " + what) {}
};

struct StoreCorrupt : XlqError {
    explicit StoreCorrupt(const std::string& what)
        : XlqError("store corrupt: " + what) {}
};

struct IoError : XlqError {
    explicit IoError(const std::string& what) : XlqError("i/o error: " + what) {}
};

// Tripwire: resolution exceeded the depth bound implied by type monotonicity.
struct EngineInvariantViolation : XlqError {
    explicit EngineInvariantViolation(const std::string& what)
        : XlqError("engine invariant violation: " + what) {}
};

} // namespace xlq

#endif
