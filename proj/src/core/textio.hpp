#pragma once

#include <cstdint>
#include <string>

namespace sdr {

// Shortest round-trip decimal rendering of a double. CSV and JSON outputs go
// through this one function so reruns are byte-identical.
std::string format_double(double x);

// FNV-1a over bytes, rendered as 16 hex chars. Used for config provenance
// columns.
std::uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_hex(const std::string& bytes);

// Write file atomically (temp + rename) creating parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace sdr
