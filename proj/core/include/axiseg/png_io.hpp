#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "axiseg/slicer.hpp"
#include "axiseg/volume.hpp"

namespace axiseg {

struct Gray8Image {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> px;
};

// 8-bit single-channel PNG codec. Reading anything that is not 8-bit
// grayscale is a FormatError; no silent conversion.
void write_png_gray8(const std::filesystem::path& path, const Gray8Image& img);
Gray8Image read_png_gray8(const std::filesystem::path& path);

// Normalized intensity -> 8-bit: round(255 * p). This quantization exists
// only on the export path; the in-memory pipeline stays float.
std::uint8_t quantize_unit(float p);
void write_image_png(const std::filesystem::path& path, const Image2D& img);

// Masks keep raw class indices 0..C-1 as pixel values.
void write_mask_png(const std::filesystem::path& path, const LabelImage2D& mask);
LabelImage2D import_png_mask(const std::filesystem::path& path, const ClassMap& classes);

// Write every slice along `axis` as image PNGs (plus mask PNGs when labels
// are given), named {axis}_{index:05}.png / {axis}_{index:05}_mask.png.
// Returns the number of files written.
std::uint32_t export_png_slices(const ScalarVolume& v, const LabelVolume* labels,
                                Axis axis, const std::filesystem::path& out_dir);

} // namespace axiseg
