#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "axiseg/volume.hpp"

namespace axiseg {

// Per-slice metadata pulled from the tags this pipeline needs. Anything
// beyond the minimal uncompressed 16-bit single-frame subset errors loudly
// instead of guessing.
struct DicomSliceMeta {
    std::uint16_t rows = 0;
    std::uint16_t columns = 0;
    std::uint16_t bits_allocated = 16;
    bool pixel_signed = false;
    double rescale_slope = 1.0;
    double rescale_intercept = 0.0;
    std::array<double, 2> pixel_spacing = {1.0, 1.0}; // row mm, col mm
    bool has_pixel_spacing = false;
    std::array<double, 3> image_position = {0.0, 0.0, 0.0};
    bool has_position = false;
    std::int32_t instance_number = 0;
    bool has_instance_number = false;
    double slice_thickness = 0.0;
    bool has_slice_thickness = false;
};

struct DicomSeries {
    ScalarVolume volume;
    std::vector<std::string> warnings;
};

// Reads every file in `directory` as one CT series: slices sorted by
// ImagePositionPatient z (InstanceNumber as fallback), stored values mapped
// through the rescale affine, inter-slice spacing from the median z gap.
DicomSeries read_dicom_series(const std::filesystem::path& directory);

} // namespace axiseg
