#pragma once

#include <cstdint>
#include <filesystem>

#include "vismap/core.hpp"

namespace vismap {

// Traversal bundle: a directory holding manifest.jsonl (one JSON object per
// frame, index order) and descriptors.bin:
//
//   offset 0   "VMDS"
//   offset 4   u32 LE format version (1)
//   offset 8   u32 LE count
//   offset 12  u32 LE dim
//   offset 16  count*dim f32 LE, row-major
//
// The traversal name is the bundle directory's name.

inline constexpr char kBundleMagic[4] = {'V', 'M', 'D', 'S'};
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::size_t kBundleHeaderBytes = 16;
inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kDescriptorFile = "descriptors.bin";

/// Loads and validates a bundle. Malformed input is rejected with a BundleError
/// naming the offending manifest line or binary offset; nothing is repaired.
Traversal load_traversal(const std::filesystem::path& dir);

/// Writes `t` as a bundle into `dir` (created if needed). Empty traversals are
/// rejected.
void write_traversal(const Traversal& t, const std::filesystem::path& dir);

/// Descriptor matrix file only; used by load_traversal and handy for tools.
DescriptorMatrix read_descriptor_file(const std::filesystem::path& file);
void write_descriptor_file(const DescriptorMatrix& m, const std::filesystem::path& file);

} // namespace vismap
