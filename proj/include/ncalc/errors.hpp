#pragma once

#include <stdexcept>
#include <string>

namespace ncalc {

/// Malformed input: bad files, unknown identifiers, shape mismatches.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A check whose preconditions are not met (e.g. heap extraction on an
/// asymmetric connection). Distinct from a check that ran and failed.
class UntestableError : public std::runtime_error {
public:
    explicit UntestableError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ncalc
