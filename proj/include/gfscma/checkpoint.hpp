/**
 * @file checkpoint.hpp
 * @brief Versioned binary checkpoint container.
 *
 * Layout: magic "GFSCMAC1", u32 format version, u64 config digest, a string
 * meta map, then per-store parameter records (name, shape, little-endian
 * 64-bit floats for value/Adam moments plus the step counter) and buffer
 * records (batchnorm running statistics). Round-trips are bit-exact.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gfscma/param_store.hpp"

namespace gfscma {

struct CheckpointData {
  uint64_t config_digest = 0;
  std::map<std::string, std::string> meta;
  std::map<std::string, ParamStore> stores;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

/// Copies values, Adam state, and buffers from src into dst, requiring the
/// exact same parameter names and shapes. Throws checkpoint_mismatch.
void copy_store_checked(ParamStore& dst, const ParamStore& src, const std::string& what);

/// FNV-1a 64-bit hash.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

/// Hash of a file's bytes; used as the checkpoint digest in result CSVs.
uint64_t file_digest(const std::string& path);

std::string hex64(uint64_t v);

}  // namespace gfscma
