#pragma once

#include <filesystem>
#include <optional>

#include "fas/kv_text.hpp"
#include "fas/model/weights.hpp"

namespace fas {

/// Checkpoint container ("SSNW"):
///   magic "SSNW" | u16 LE version | u32 LE header length | header text |
///   u32 LE parameter count | per parameter: u32 LE name length, UTF-8 name,
///   u32 LE rank, rank × u64 LE extents, values as f64 LE.
/// The header holds the model config keys, "optimizer" (true when each
/// parameter block is followed by its AdamW step and both moment tensors)
/// and free-form "meta.*" keys.
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;

  SSNetWeights weights;
  bool with_optimizer = false;
  kv::Entries meta;  // keys without the "meta." prefix

  std::optional<std::string> meta_value(std::string_view key) const;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws ErrorKind::io on open failure, bad magic, version, truncation or
/// a parameter block that does not match the layout of the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fas
