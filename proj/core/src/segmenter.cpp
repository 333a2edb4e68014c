#include "axiseg/segmenter.hpp"

#include <cmath>

#include "axiseg/errors.hpp"
#include "axiseg/rng.hpp"
#include "axiseg/volume_ops.hpp"

namespace axiseg {

NoiseConfig NoiseConfig::uniform(double epsilon, std::uint64_t base_seed) {
    NoiseConfig cfg;
    cfg.epsilon_per_axis = {epsilon, epsilon, epsilon};
    cfg.base_seed = base_seed;
    return cfg;
}

namespace {

class OracleSegmenter final : public SliceSegmenter {
public:
    OracleSegmenter(std::shared_ptr<const LabelVolume> gt, Axis axis, NoiseConfig noise)
        : gt_(std::move(gt)), axis_(axis), noise_(noise) {
        if (!gt_)
            throw UsageError("oracle segmenter needs a ground-truth volume");
        const double eps = noise_.epsilon(axis_);
        if (!(eps >= 0.0 && eps <= 1.0))
            throw UsageError("noise epsilon must be in [0,1]");
    }

    const ClassMap& classes() const override { return gt_->classes; }

    ProbImage2D segment(const Image2D& image, std::uint32_t slice_index) override {
        // extract_slice range-checks slice_index for us.
        LabelImage2D truth = extract_slice(*gt_, axis_, slice_index);
        // A real network predicts at the working resolution; mirror that by
        // serving the gt resampled to the incoming dims.
        truth = resize_nearest_2d(truth, image.h, image.w);

        const std::uint32_t c = gt_->classes.count();
        const double eps = noise_.epsilon(axis_);
        if (eps > 0.0) {
            SplitMix64 rng(mix_seed(noise_.base_seed,
                                    static_cast<std::uint64_t>(axis_), slice_index));
            // Row-major pixel order; one flip draw, then one class draw when
            // the flip fires. Fixed so other implementations can match it.
            for (std::size_t i = 0; i < truth.px.size(); ++i) {
                if (rng.next_unit() < eps)
                    truth.px[i] = static_cast<std::uint8_t>(rng.next_below(c));
            }
        }
        return one_hot(truth, c);
    }

    bool concurrent_safe() const override { return true; }

private:
    std::shared_ptr<const LabelVolume> gt_;
    Axis axis_;
    NoiseConfig noise_;
};

class UniformSegmenter final : public SliceSegmenter {
public:
    explicit UniformSegmenter(ClassMap classes) : classes_(std::move(classes)) {}

    const ClassMap& classes() const override { return classes_; }

    ProbImage2D segment(const Image2D& image, std::uint32_t) override {
        ProbImage2D out = make_prob_image2d(image.h, image.w, classes_.count());
        const float p = 1.0f / static_cast<float>(classes_.count());
        std::fill(out.px.begin(), out.px.end(), p);
        return out;
    }

    bool concurrent_safe() const override { return true; }

private:
    ClassMap classes_;
};

} // namespace

std::unique_ptr<SliceSegmenter> make_oracle_segmenter(
    std::shared_ptr<const LabelVolume> gt, Axis axis, NoiseConfig noise) {
    return std::make_unique<OracleSegmenter>(std::move(gt), axis, noise);
}

std::unique_ptr<SliceSegmenter> make_uniform_segmenter(ClassMap classes) {
    return std::make_unique<UniformSegmenter>(std::move(classes));
}

std::vector<ProbImage2D> segment_batch(SliceSegmenter& seg,
                                       const std::vector<Image2D>& slices,
                                       std::uint32_t first_index) {
    std::vector<ProbImage2D> out;
    out.reserve(slices.size());
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const std::uint32_t index = first_index + static_cast<std::uint32_t>(i);
        try {
            ProbImage2D p = seg.segment(slices[i], index);
            validate_backend_output(p, slices[i], seg.classes().count());
            out.push_back(std::move(p));
        } catch (const BackendError& e) {
            throw BackendError("slice " + std::to_string(index) + ": " + e.what(),
                               e.stderr_tail());
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw BackendError("slice " + std::to_string(index) + ": " + e.what());
        }
    }
    return out;
}

void validate_backend_output(ProbImage2D& out, const Image2D& input,
                             std::uint32_t expected_channels) {
    if (out.h != input.h || out.w != input.w)
        throw BackendError("backend returned " + std::to_string(out.h) + "x" +
                           std::to_string(out.w) + " maps for a " +
                           std::to_string(input.h) + "x" + std::to_string(input.w) +
                           " image");
    if (out.channels != expected_channels)
        throw BackendError("backend returned " + std::to_string(out.channels) +
                           " channels, expected " + std::to_string(expected_channels));
    if (out.px.size() != out.plane_size() * out.channels)
        throw BackendError("backend output buffer has the wrong size");

    const std::size_t n = out.plane_size();
    // Small negative/overshoot values are float error; clamp them, but treat
    // anything past 1e-4 as a broken backend.
    constexpr float kValueSlack = 1e-4f;
    for (float& x : out.px) {
        if (!(x >= -kValueSlack && x <= 1.0f + kValueSlack))
            throw BackendError("backend probability " + std::to_string(x) +
                               " outside [0,1]");
        if (x < 0.0f) x = 0.0f;
        if (x > 1.0f) x = 1.0f;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::uint32_t c = 0; c < out.channels; ++c) sum += out.px[c * n + i];
        if (sum < 0.99 || sum > 1.01)
            throw BackendError("backend channel sum " + std::to_string(sum) +
                               " outside [0.99, 1.01]");
        if (sum != 1.0) {
            const float inv = static_cast<float>(1.0 / sum);
            for (std::uint32_t c = 0; c < out.channels; ++c) out.px[c * n + i] *= inv;
        }
    }
}

} // namespace axiseg
