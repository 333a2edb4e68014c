#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "axiseg/volume.hpp"

namespace axiseg {

// Orthogonal viewing planes. The in-plane (row, col) mapping is fixed:
//   axial    — fixed z; rows = y, cols = x
//   coronal  — fixed y; rows = z, cols = x
//   sagittal — fixed x; rows = z, cols = y
enum class Axis : std::uint8_t { axial = 0, coronal = 1, sagittal = 2 };

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::axial, Axis::coronal,
                                                 Axis::sagittal};

const std::string& axis_name(Axis axis);
Axis axis_from_name(const std::string& name); // throws UsageError

// Network-facing slice sizing: cap the largest dimension, then snap both to
// a multiple of `multiple` (nearest, ties up), never below min_dim.
struct SliceSizePolicy {
    std::uint32_t max_dim = 256;
    std::uint32_t multiple = 32;
    std::uint32_t min_dim = 32;
};

struct SliceDims {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    bool operator==(const SliceDims&) const = default;
};

std::uint32_t slice_count(const Dims& dims, Axis axis);
SliceDims slice_dims(const Dims& dims, Axis axis);

SliceDims target_size(std::uint32_t h, std::uint32_t w,
                      const SliceSizePolicy& policy = {});

Image2D extract_slice(const ScalarVolume& v, Axis axis, std::uint32_t index);
LabelImage2D extract_slice(const LabelVolume& l, Axis axis, std::uint32_t index);
ProbImage2D extract_slice(const ProbVolume& p, Axis axis, std::uint32_t index);

// Exact inverses of extract_slice. The grid dims must match the axis's
// in-plane dims; the target is mutated in place.
void insert_slice(ScalarVolume& v, Axis axis, std::uint32_t index, const Image2D& grid);
void insert_slice(LabelVolume& l, Axis axis, std::uint32_t index,
                  const LabelImage2D& grid);
void insert_slice(ProbVolume& p, Axis axis, std::uint32_t index, const ProbImage2D& grid);

// One image/mask pair written by export_training_slices.
struct TrainingPair {
    Axis axis;
    std::uint32_t index = 0;
    std::string image;
    std::string mask;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
};

struct TrainingManifest {
    std::vector<TrainingPair> pairs;
    std::filesystem::path manifest_path;
};

// Write one windowed image PNG and one mask PNG per slice on each requested
// axis, at native in-plane size, plus a JSON-lines manifest. Cropping and
// augmentation are the downstream trainer's job.
TrainingManifest export_training_slices(const ScalarVolume& v, const LabelVolume& l,
                                        const std::vector<Axis>& axes,
                                        const std::filesystem::path& out_dir);

} // namespace axiseg
