#include "axiseg/volume.hpp"

#include <cmath>
#include <sstream>

#include "axiseg/errors.hpp"

namespace axiseg {

bool Spacing::valid() const {
    auto ok = [](double s) { return std::isfinite(s) && s > 0.0; };
    return ok(sx) && ok(sy) && ok(sz);
}

std::string to_string(const Dims& d) {
    std::ostringstream os;
    os << d.nx << "x" << d.ny << "x" << d.nz;
    return os.str();
}

std::vector<std::string> ClassMap::cardiac_chamber_names() {
    return {"right_atrium", "right_ventricle", "left_atrium", "left_ventricle",
            "background"};
}

ClassMap::ClassMap(std::vector<std::string> names, std::uint8_t background_index)
    : names_(std::move(names)), background_index_(background_index) {
    if (names_.size() < 2)
        throw UsageError("class map needs at least 2 classes");
    if (names_.size() > 256)
        throw UsageError("class map supports at most 256 classes");
    if (background_index_ >= names_.size())
        throw UsageError("background index out of range");
}

ScalarVolume make_scalar_volume(Dims dims, Spacing spacing, IntensityDomain domain,
                                float fill) {
    if (!spacing.valid())
        throw UsageError("spacing must be positive and finite");
    ScalarVolume v;
    v.dims = dims;
    v.spacing = spacing;
    v.domain = domain;
    v.data.assign(dims.voxel_count(), fill);
    return v;
}

LabelVolume make_label_volume(Dims dims, Spacing spacing, ClassMap classes,
                              std::uint8_t fill) {
    if (!spacing.valid())
        throw UsageError("spacing must be positive and finite");
    if (fill >= classes.count())
        throw UsageError("fill label out of range");
    LabelVolume l;
    l.dims = dims;
    l.spacing = spacing;
    l.classes = std::move(classes);
    l.labels.assign(dims.voxel_count(), fill);
    return l;
}

ProbVolume make_prob_volume(Dims dims, Spacing spacing, ClassMap classes) {
    if (!spacing.valid())
        throw UsageError("spacing must be positive and finite");
    ProbVolume p;
    p.dims = dims;
    p.spacing = spacing;
    p.classes = std::move(classes);
    p.probs.assign(dims.voxel_count() * p.classes.count(), 0.0f);
    return p;
}

void validate(const ScalarVolume& v) {
    if (!v.spacing.valid())
        throw InvariantError("scalar volume: invalid spacing");
    if (v.data.size() != v.dims.voxel_count())
        throw InvariantError("scalar volume: data size does not match dims");
    const bool normalized = v.domain == IntensityDomain::normalized;
    const float lo = normalized ? 0.0f : kHounsfieldMin;
    const float hi = normalized ? 1.0f : kHounsfieldMax;
    for (float x : v.data) {
        if (!(x >= lo && x <= hi))
            throw InvariantError("scalar volume: value " + std::to_string(x) +
                                 " outside " + (normalized ? "[0,1]" : "Hounsfield range"));
    }
}

void validate(const LabelVolume& l) {
    if (!l.spacing.valid())
        throw InvariantError("label volume: invalid spacing");
    if (l.labels.size() != l.dims.voxel_count())
        throw InvariantError("label volume: data size does not match dims");
    const std::uint32_t c = l.classes.count();
    for (std::uint8_t v : l.labels) {
        if (v >= c)
            throw InvariantError("label volume: label " + std::to_string(v) +
                                 " out of range for " + std::to_string(c) + " classes");
    }
}

void validate(const ProbVolume& p) {
    if (!p.spacing.valid())
        throw InvariantError("prob volume: invalid spacing");
    const std::size_t n = p.dims.voxel_count();
    const std::uint32_t c = p.classes.count();
    if (p.probs.size() != n * c)
        throw InvariantError("prob volume: data size does not match dims/classes");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::uint32_t k = 0; k < c; ++k) {
            const float x = p.probs[k * n + i];
            if (!(x >= 0.0f && x <= 1.0f))
                throw InvariantError("prob volume: channel value outside [0,1]");
            sum += x;
        }
        if (std::abs(sum - 1.0) > kProbSumTolerance)
            throw InvariantError("prob volume: channel sum " + std::to_string(sum) +
                                 " deviates from 1");
    }
}

Image2D make_image2d(std::uint32_t h, std::uint32_t w, float fill) {
    Image2D img;
    img.h = h;
    img.w = w;
    img.px.assign(static_cast<std::size_t>(h) * w, fill);
    return img;
}

LabelImage2D make_label_image2d(std::uint32_t h, std::uint32_t w, std::uint8_t fill) {
    LabelImage2D img;
    img.h = h;
    img.w = w;
    img.px.assign(static_cast<std::size_t>(h) * w, fill);
    return img;
}

ProbImage2D make_prob_image2d(std::uint32_t h, std::uint32_t w, std::uint32_t channels) {
    ProbImage2D img;
    img.h = h;
    img.w = w;
    img.channels = channels;
    img.px.assign(static_cast<std::size_t>(h) * w * channels, 0.0f);
    return img;
}

} // namespace axiseg
