#pragma once

#include <filesystem>
#include <iosfwd>

#include "fairal/volume.hpp"

namespace fairal {

// FVOL1 container: 8-byte magic "FVOL1\0\0\0", three u32 little-endian
// extents (nx, ny, nz), one u8 dtype tag, then the raw little-endian
// payload in x-fastest order.
//   dtype 0: float32 scalar/probability volume
//   dtype 1: uint8 mask
inline constexpr unsigned char kFvolMagic[8] = {'F', 'V', 'O', 'L', '1', 0, 0, 0};
inline constexpr std::uint8_t kFvolDtypeF32 = 0;
inline constexpr std::uint8_t kFvolDtypeU8 = 1;

void write_fvol(const std::filesystem::path& path, const ScalarVolume& vol);
void write_fvol(const std::filesystem::path& path, const ProbabilityVolume& vol);
void write_fvol(const std::filesystem::path& path, const BinaryMask& mask);

// Throws DataError on missing files, bad magic, dtype mismatch, or a
// truncated payload.
ScalarVolume read_fvol_scalar(const std::filesystem::path& path);
ProbabilityVolume read_fvol_probability(const std::filesystem::path& path);
BinaryMask read_fvol_mask(const std::filesystem::path& path);

} // namespace fairal
