#pragma once

#include <filesystem>

#include "ctalab/trainer.hpp"

namespace ctalab {

// Binary checkpoint container (little-endian):
//   "CTLB" | u32 format version | u64 header bytes | JSON header | f64 payload
// The header carries the model/train config, vocabulary, loss history,
// fingerprints and a tensor directory; the payload holds the tensors in
// directory order. Loading validates the version and every tensor shape.
// `merged` bakes adapters into the base weights and stores no adapters.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                     bool merged = false);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ctalab
