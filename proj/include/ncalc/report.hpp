#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ncalc {

/// FNV-1a 64-bit digest.
uint64_t fnv1a64(std::string_view bytes);

/// "fnv1a64:" followed by 16 lowercase hex digits.
std::string digest_string(std::string_view bytes);

/// Canonical command report: command echo, input digests, outcome and typed
/// witnesses.  Serialization sorts keys and carries numbers as exact strings
/// where precision matters, so identical inputs give identical bytes.
/// Timing is deliberately not part of the canonical body; the CLI prints it
/// to stderr instead.
struct Report {
    std::string command;                              // echoed words
    nlohmann::json inputs = nlohmann::json::object(); // name -> digest
    std::string outcome = "pass";                     // pass | fail | untestable
    nlohmann::json witnesses = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// to_json().dump(2) plus a trailing newline.
    std::string render() const;
};

} // namespace ncalc
