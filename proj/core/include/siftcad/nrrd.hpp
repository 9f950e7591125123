#pragma once

#include <filesystem>

#include "siftcad/volume.hpp"

namespace siftcad {

/// Sample type written to disk. Volumes default to 16-bit unsigned, masks
/// are always 8-bit 0/1.
enum class NrrdType { UInt8, UInt16, Float32, Float64 };

/// Reads a 3D NRRD (attached or detached header, raw encoding, either
/// endianness). Spacing comes from `spacings` or from the norms of
/// `space directions`.
Volume3D load_volume(const std::filesystem::path& path);

/// Writes an attached-header NRRD, or a detached pair when `path` ends in
/// `.nhdr` (data goes to the sibling `.raw`). Integer types round to the
/// nearest value and reject samples outside the type range.
void save_volume(const Volume3D& v, const std::filesystem::path& path, NrrdType type = NrrdType::UInt16);

/// Any nonzero sample is true.
BinaryMask load_mask(const std::filesystem::path& path);

void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace siftcad
