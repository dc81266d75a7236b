#pragma once

// Versioned little-endian model container:
//   "IMVCMDL\0" | u32 version | { u32 tag | u64 length | payload }*
// Sections: config, scaling, autoencoders, centers, tree, labels. Doubles are
// stored as their IEEE-754 bit patterns, so a reload is bit-exact.

#include <filesystem>
#include <string>
#include <string_view>

#include "imvc/pipeline.hpp"

namespace imvc::serialize {

inline constexpr std::uint32_t kModelVersion = 1;

std::string encode_model(const pipeline::ModelState& state);
pipeline::ModelState decode_model(std::string_view bytes);

void save_model(const pipeline::ModelState& state, const std::filesystem::path& path);
pipeline::ModelState load_model(const std::filesystem::path& path);

}  // namespace imvc::serialize
