#pragma once

#include <filesystem>

#include "axiseg/volume.hpp"

namespace axiseg {

// RVOL is the pipeline's raw interchange file: magic "RVOL", version byte 1,
// a 4-byte little-endian length, one JSON header block, then the raw voxel
// payload little-endian. Round trips are bit-exact.
enum class RvolKind { scalar, label };

enum class RvolEncoding { int16_le, float32_le, uint8 };

// int16 when every value is integral and fits, else float32.
RvolEncoding pick_scalar_encoding(const ScalarVolume& v);

RvolKind probe_rvol(const std::filesystem::path& path);

void write_rvol(const std::filesystem::path& path, const ScalarVolume& v);
void write_rvol(const std::filesystem::path& path, const ScalarVolume& v,
                RvolEncoding encoding);
void write_rvol(const std::filesystem::path& path, const LabelVolume& l);

ScalarVolume read_scalar_rvol(const std::filesystem::path& path);
LabelVolume read_label_rvol(const std::filesystem::path& path);

} // namespace axiseg
