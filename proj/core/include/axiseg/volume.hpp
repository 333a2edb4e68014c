#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace axiseg {

// Physical voxel size in millimeters along x (column), y (row), z (slice).
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    bool valid() const;
    bool operator==(const Spacing&) const = default;
};

struct Dims {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    std::uint32_t nz = 0;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return x + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
    }
    bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

enum class IntensityDomain { hounsfield, normalized };

// CT intensities live on the Hounsfield scale; this is the range we accept.
inline constexpr float kHounsfieldMin = -1024.0f;
inline constexpr float kHounsfieldMax = 32767.0f;

// Ordered class names plus which index counts as background.
class ClassMap {
public:
    ClassMap() : ClassMap(cardiac_chamber_names(), 4) {}
    ClassMap(std::vector<std::string> names, std::uint8_t background_index);

    // The 5-class map used throughout: indices 0..3 are the heart chambers,
    // 4 is background.
    static ClassMap cardiac_chambers() { return ClassMap(); }
    static std::vector<std::string> cardiac_chamber_names();

    std::uint32_t count() const { return static_cast<std::uint32_t>(names_.size()); }
    std::uint8_t background_index() const { return background_index_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::uint32_t c) const { return names_.at(c); }
    bool is_background(std::uint32_t c) const { return c == background_index_; }

    bool operator==(const ClassMap&) const = default;

private:
    std::vector<std::string> names_;
    std::uint8_t background_index_ = 0;
};

// 3D intensity grid, x-fastest row-major. Treated as immutable once built;
// operations return fresh volumes.
struct ScalarVolume {
    Dims dims;
    Spacing spacing;
    IntensityDomain domain = IntensityDomain::hounsfield;
    std::vector<float> data;

    float at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return data[dims.index(x, y, z)];
    }
    float& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        return data[dims.index(x, y, z)];
    }
};

ScalarVolume make_scalar_volume(Dims dims, Spacing spacing, IntensityDomain domain,
                                float fill = 0.0f);

// 3D grid of class indices under a ClassMap.
struct LabelVolume {
    Dims dims;
    Spacing spacing;
    ClassMap classes;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return labels[dims.index(x, y, z)];
    }
    std::uint8_t& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        return labels[dims.index(x, y, z)];
    }
};

LabelVolume make_label_volume(Dims dims, Spacing spacing, ClassMap classes,
                              std::uint8_t fill = 0);

// Per-voxel class probability field, stored as C channel planes
// (channel c occupies probs[c * voxel_count .. (c+1) * voxel_count)).
struct ProbVolume {
    Dims dims;
    Spacing spacing;
    ClassMap classes;
    std::vector<float> probs;

    std::size_t plane_size() const { return dims.voxel_count(); }
    float* channel(std::uint32_t c) { return probs.data() + c * plane_size(); }
    const float* channel(std::uint32_t c) const { return probs.data() + c * plane_size(); }
};

ProbVolume make_prob_volume(Dims dims, Spacing spacing, ClassMap classes);

// Per-voxel channel sums may drift from 1 by at most this much.
inline constexpr double kProbSumTolerance = 1e-5;

// Boundary validation: throw InvariantError (internally produced volumes) or
// FormatError-worthy detail via the returned message (callers decide).
void validate(const ScalarVolume& v);
void validate(const LabelVolume& l);
void validate(const ProbVolume& p);

// 2D float grid, row-major (index = col + w * row).
struct Image2D {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<float> px;

    float at(std::uint32_t r, std::uint32_t c) const { return px[c + static_cast<std::size_t>(w) * r]; }
    float& at(std::uint32_t r, std::uint32_t c) { return px[c + static_cast<std::size_t>(w) * r]; }
    std::size_t size() const { return static_cast<std::size_t>(h) * w; }
};

struct LabelImage2D {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> px;

    std::uint8_t at(std::uint32_t r, std::uint32_t c) const { return px[c + static_cast<std::size_t>(w) * r]; }
    std::uint8_t& at(std::uint32_t r, std::uint32_t c) { return px[c + static_cast<std::size_t>(w) * r]; }
    std::size_t size() const { return static_cast<std::size_t>(h) * w; }
};

// Per-class 2D probability maps, channel-major like ProbVolume.
struct ProbImage2D {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::uint32_t channels = 0;
    std::vector<float> px;

    std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
    float* channel(std::uint32_t c) { return px.data() + c * plane_size(); }
    const float* channel(std::uint32_t c) const { return px.data() + c * plane_size(); }
};

Image2D make_image2d(std::uint32_t h, std::uint32_t w, float fill = 0.0f);
LabelImage2D make_label_image2d(std::uint32_t h, std::uint32_t w, std::uint8_t fill = 0);
ProbImage2D make_prob_image2d(std::uint32_t h, std::uint32_t w, std::uint32_t channels);

} // namespace axiseg
