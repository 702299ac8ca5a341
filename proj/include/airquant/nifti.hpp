#pragma once

#include <string>

#include "airquant/types.hpp"

namespace airquant {

// Minimal single-file NIfTI-1 ("n+1") support: uncompressed, little-endian,
// dtypes uint8 (2), int16 (4), float32 (16). qform offsets carry the origin;
// sform is ignored. Data starts at vox_offset (written as 352).
VoxelGrid read_nifti(const std::string& path);
void write_nifti(const VoxelGrid& grid, const std::string& path);

void write_nifti(const Mask& mask, const std::string& path);
void write_nifti(const LabelMap& labels, const std::string& path);

}  // namespace airquant
