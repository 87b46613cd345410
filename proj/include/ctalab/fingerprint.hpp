#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ctalab {

inline constexpr const char* kVersionString = "ctalab-0.1.0";

std::string to_hex16(std::uint64_t value);

// Config fingerprint: FNV-1a over the canonical config text plus the code
// version string. Every pipeline artifact embeds one so that stage outputs
// can be chained and stale mixes detected.
std::string config_fingerprint(std::string_view canonical_config);

// Fingerprint of file contents, used for hand-written manifests that do
// not carry an embedded fingerprint record.
std::string file_fingerprint(const std::string& path);

}  // namespace ctalab
