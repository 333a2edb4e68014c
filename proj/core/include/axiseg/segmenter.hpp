#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "axiseg/slicer.hpp"
#include "axiseg/volume.hpp"

namespace axiseg {

// Contract for any 2D image -> per-class probability map engine. Outputs
// must match the input's in-plane dims, have every channel in [0,1], and sum
// to 1 per pixel. Backends are deterministic for a fixed configuration.
class SliceSegmenter {
public:
    virtual ~SliceSegmenter() = default;

    virtual const ClassMap& classes() const = 0;

    // slice_index is the position along the axis this segmenter serves;
    // ground-truth-backed backends use it, stateless ones ignore it.
    virtual ProbImage2D segment(const Image2D& image, std::uint32_t slice_index) = 0;

    // Whether segment() may be called concurrently from multiple threads.
    virtual bool concurrent_safe() const { return false; }
};

// Builds the segmenter serving one axis.
using SegmenterFactory = std::function<std::unique_ptr<SliceSegmenter>(Axis)>;

// Per-pixel class-flip noise: with probability epsilon the pixel's one-hot
// is replaced by the one-hot of a uniformly random class. Streams are seeded
// by mix_seed(base_seed, axis, slice) so noise is reproducible and
// independent across axes and slices.
struct NoiseConfig {
    std::array<double, 3> epsilon_per_axis = {0.0, 0.0, 0.0}; // indexed by Axis
    std::uint64_t base_seed = 0;

    static NoiseConfig uniform(double epsilon, std::uint64_t base_seed = 0);
    double epsilon(Axis axis) const {
        return epsilon_per_axis[static_cast<std::uint8_t>(axis)];
    }
};

// Ground-truth-backed backend: emits one_hot of the gt slice (resampled to
// the requested image dims when they differ), then applies flip noise.
std::unique_ptr<SliceSegmenter> make_oracle_segmenter(
    std::shared_ptr<const LabelVolume> gt, Axis axis, NoiseConfig noise = {});

// Uniform 1/C everywhere; handy for wiring tests.
std::unique_ptr<SliceSegmenter> make_uniform_segmenter(ClassMap classes);

// Order-preserving batch evaluation; output i belongs to slices[i], whose
// slice index is first_index + i. Backend errors gain the failing index.
std::vector<ProbImage2D> segment_batch(SliceSegmenter& seg,
                                       const std::vector<Image2D>& slices,
                                       std::uint32_t first_index = 0);

// Boundary check used on every backend output before it enters the pipeline:
// dims match, channels match, values in [0,1]; pixel sums within
// [0.99, 1.01] are renormalized, anything further off is a BackendError.
void validate_backend_output(ProbImage2D& out, const Image2D& input,
                             std::uint32_t expected_channels);

} // namespace axiseg
