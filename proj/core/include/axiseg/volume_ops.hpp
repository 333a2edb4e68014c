#pragma once

#include "axiseg/volume.hpp"

namespace axiseg {

// Hounsfield window used throughout the pipeline: lung-ish air (-200) up to
// cortical bone (500), which brackets contrast-enhanced blood.
inline constexpr double kDefaultWindowLo = -200.0;
inline constexpr double kDefaultWindowHi = 500.0;

struct WindowBounds {
    double lo = kDefaultWindowLo;
    double hi = kDefaultWindowHi;
};

// Clip intensities to [lo, hi] and map affinely onto [0, 1].
// Throws UsageError if lo >= hi, InvariantError if v is not hounsfield.
ScalarVolume window_normalize(const ScalarVolume& v, double lo = kDefaultWindowLo,
                              double hi = kDefaultWindowHi);

// Per-voxel argmax over channels; ties go to the lowest class index.
LabelVolume argmax_labels(const ProbVolume& p);
LabelImage2D argmax_labels(const ProbImage2D& p);

// Channel c is 1 exactly where label == c. Inverse of argmax_labels.
ProbVolume one_hot(const LabelVolume& l);
ProbImage2D one_hot(const LabelImage2D& l, std::uint32_t class_count);

// Bilinear resampling with pixel centers at (i + 0.5) / n ("align corners"
// off). Same-size resize is a bit-exact identity; output range never exceeds
// the input range. Throws UsageError on zero target dims.
Image2D resize_bilinear_2d(const Image2D& img, std::uint32_t out_h, std::uint32_t out_w);

// Nearest-neighbor resampling with the same center convention.
LabelImage2D resize_nearest_2d(const LabelImage2D& img, std::uint32_t out_h,
                               std::uint32_t out_w);
LabelVolume resize_nearest_3d(const LabelVolume& l, Dims target);

// Bilinear per channel, then renormalize each pixel's channel sum to 1.
// Skips both steps (bit-exact) when the size already matches.
ProbImage2D resize_prob_bilinear(const ProbImage2D& p, std::uint32_t out_h,
                                 std::uint32_t out_w);

// Divide each pixel's channels by their sum. Sums must be positive.
void renormalize_channels(ProbImage2D& p);

} // namespace axiseg
