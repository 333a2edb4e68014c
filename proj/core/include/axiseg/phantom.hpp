#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "axiseg/volume.hpp"

namespace axiseg {

// Axis-aligned ellipsoid in voxel index space; a voxel p is inside iff
// sum(((p_i - center_i) / semi_axes_i)^2) <= 1.
struct Ellipsoid {
    std::array<double, 3> center = {0, 0, 0};
    std::array<double, 3> semi_axes = {1, 1, 1};
    std::uint8_t label = 0;
    double interior_hu = 300.0; // contrast-blood-like, inside the default window
};

// Deterministic synthetic scan + labels; the test stand-in for real data.
// Later ellipsoids overwrite earlier ones where they overlap. Every ellipsoid
// gets a soft-tissue shell of `shell_voxels` (labelled background) so the
// structures sit in tissue rather than air.
struct PhantomSpec {
    Dims dims;
    Spacing spacing;
    ClassMap classes = ClassMap::cardiac_chambers();
    std::vector<Ellipsoid> ellipsoids;
    double background_hu = -800.0;
    double shell_hu = 40.0;
    double shell_voxels = 2.0;
    std::uint64_t seed = 0;
};

std::pair<ScalarVolume, LabelVolume> generate(const PhantomSpec& spec);

// Four separated ellipsoids with classes 0..3, sizes and positions jittered
// within +-25% by the seed. Requires every dim >= 64.
PhantomSpec four_chamber_preset(Dims dims, std::uint64_t seed);

std::string phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const std::string& text);

} // namespace axiseg
