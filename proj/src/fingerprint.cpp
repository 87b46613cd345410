#include "ctalab/fingerprint.hpp"

#include <fstream>
#include <sstream>

#include "ctalab/error.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

std::string to_hex16(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string config_fingerprint(std::string_view canonical_config) {
  std::uint64_t h = fnv1a64(kVersionString);
  h = fnv1a64(canonical_config, h);
  return to_hex16(h);
}

std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_fingerprint(buf.str());
}

}  // namespace ctalab
