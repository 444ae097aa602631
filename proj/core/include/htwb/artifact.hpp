#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "htwb/error.hpp"
#include "htwb/netlist.hpp"

namespace htwb {

/// A pipeline stage was handed an artifact produced from different inputs
/// (circuit changed, upstream stage re-run with other parameters, ...).
class StaleArtifact : public Error {
public:
  explicit StaleArtifact(const std::string& detail) : Error("stale artifact: " + detail) {}
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view data);

/// fnv1a64 rendered as fixed-width lowercase hex (16 chars).
std::string fnv1a64_hex(std::string_view data);

/// Hash of the canonical bench serialization. Stable across parse/write
/// round trips, so it identifies the circuit independent of file formatting.
std::string circuit_hash(const Circuit& circuit);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace htwb
