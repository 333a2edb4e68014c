#include "axiseg/volume_ops.hpp"

#include <algorithm>
#include <cmath>

#include "axiseg/errors.hpp"

namespace axiseg {

ScalarVolume window_normalize(const ScalarVolume& v, double lo, double hi) {
    if (!(lo < hi))
        throw UsageError("invalid window: lo must be strictly below hi");
    if (v.domain != IntensityDomain::hounsfield)
        throw InvariantError("window_normalize expects a Hounsfield volume");

    ScalarVolume out;
    out.dims = v.dims;
    out.spacing = v.spacing;
    out.domain = IntensityDomain::normalized;
    out.data.resize(v.data.size());
    const double scale = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double x = std::clamp(static_cast<double>(v.data[i]), lo, hi);
        out.data[i] = static_cast<float>((x - lo) * scale);
    }
    return out;
}

namespace {

// Argmax with ties to the lowest class, on one channel-major buffer.
void argmax_planes(const float* probs, std::size_t n, std::uint32_t channels,
                   std::uint8_t* out) {
    for (std::size_t i = 0; i < n; ++i) {
        float best = probs[i];
        std::uint8_t best_c = 0;
        for (std::uint32_t c = 1; c < channels; ++c) {
            const float x = probs[c * n + i];
            if (x > best) {
                best = x;
                best_c = static_cast<std::uint8_t>(c);
            }
        }
        out[i] = best_c;
    }
}

void one_hot_planes(const std::uint8_t* labels, std::size_t n, std::uint32_t channels,
                    float* out) {
    std::fill(out, out + n * channels, 0.0f);
    for (std::size_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(labels[i]) * n + i] = 1.0f;
}

} // namespace

LabelVolume argmax_labels(const ProbVolume& p) {
    LabelVolume out;
    out.dims = p.dims;
    out.spacing = p.spacing;
    out.classes = p.classes;
    out.labels.resize(p.dims.voxel_count());
    argmax_planes(p.probs.data(), out.labels.size(), p.classes.count(), out.labels.data());
    return out;
}

LabelImage2D argmax_labels(const ProbImage2D& p) {
    LabelImage2D out = make_label_image2d(p.h, p.w);
    argmax_planes(p.px.data(), out.size(), p.channels, out.px.data());
    return out;
}

ProbVolume one_hot(const LabelVolume& l) {
    ProbVolume out = make_prob_volume(l.dims, l.spacing, l.classes);
    one_hot_planes(l.labels.data(), l.dims.voxel_count(), l.classes.count(),
                   out.probs.data());
    return out;
}

ProbImage2D one_hot(const LabelImage2D& l, std::uint32_t class_count) {
    ProbImage2D out = make_prob_image2d(l.h, l.w, class_count);
    one_hot_planes(l.px.data(), l.size(), class_count, out.px.data());
    return out;
}

namespace {

// Source coordinate of output sample i under the pixel-center convention.
inline double sample_coord(std::uint32_t i, std::uint32_t n_out, std::uint32_t n_in) {
    return (i + 0.5) * static_cast<double>(n_in) / n_out - 0.5;
}

struct LinearTap {
    std::uint32_t i0, i1;
    double t;
};

LinearTap linear_tap(std::uint32_t i, std::uint32_t n_out, std::uint32_t n_in) {
    double s = sample_coord(i, n_out, n_in);
    s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
    const double f = std::floor(s);
    LinearTap tap;
    tap.i0 = static_cast<std::uint32_t>(f);
    tap.i1 = std::min(tap.i0 + 1, n_in - 1);
    tap.t = s - f;
    return tap;
}

std::uint32_t nearest_tap(std::uint32_t i, std::uint32_t n_out, std::uint32_t n_in) {
    const double s = std::floor((i + 0.5) * static_cast<double>(n_in) / n_out);
    return static_cast<std::uint32_t>(
        std::clamp(s, 0.0, static_cast<double>(n_in - 1)));
}

void check_target(std::uint32_t h, std::uint32_t w) {
    if (h == 0 || w == 0)
        throw UsageError("resize target dims must be at least 1");
}

void resize_bilinear_plane(const float* src, std::uint32_t in_h, std::uint32_t in_w,
                           float* dst, std::uint32_t out_h, std::uint32_t out_w,
                           const std::vector<LinearTap>& col_taps,
                           const std::vector<LinearTap>& row_taps) {
    for (std::uint32_t r = 0; r < out_h; ++r) {
        const LinearTap& rt = row_taps[r];
        const float* row0 = src + static_cast<std::size_t>(rt.i0) * in_w;
        const float* row1 = src + static_cast<std::size_t>(rt.i1) * in_w;
        float* out_row = dst + static_cast<std::size_t>(r) * out_w;
        for (std::uint32_t c = 0; c < out_w; ++c) {
            const LinearTap& ct = col_taps[c];
            const double top = (1.0 - ct.t) * row0[ct.i0] + ct.t * row0[ct.i1];
            const double bot = (1.0 - ct.t) * row1[ct.i0] + ct.t * row1[ct.i1];
            out_row[c] = static_cast<float>((1.0 - rt.t) * top + rt.t * bot);
        }
    }
    (void)in_h;
}

} // namespace

Image2D resize_bilinear_2d(const Image2D& img, std::uint32_t out_h, std::uint32_t out_w) {
    check_target(out_h, out_w);
    if (out_h == img.h && out_w == img.w)
        return img;

    std::vector<LinearTap> col_taps(out_w), row_taps(out_h);
    for (std::uint32_t c = 0; c < out_w; ++c) col_taps[c] = linear_tap(c, out_w, img.w);
    for (std::uint32_t r = 0; r < out_h; ++r) row_taps[r] = linear_tap(r, out_h, img.h);

    Image2D out = make_image2d(out_h, out_w);
    resize_bilinear_plane(img.px.data(), img.h, img.w, out.px.data(), out_h, out_w,
                          col_taps, row_taps);
    return out;
}

LabelImage2D resize_nearest_2d(const LabelImage2D& img, std::uint32_t out_h,
                               std::uint32_t out_w) {
    check_target(out_h, out_w);
    if (out_h == img.h && out_w == img.w)
        return img;

    std::vector<std::uint32_t> cols(out_w), rows(out_h);
    for (std::uint32_t c = 0; c < out_w; ++c) cols[c] = nearest_tap(c, out_w, img.w);
    for (std::uint32_t r = 0; r < out_h; ++r) rows[r] = nearest_tap(r, out_h, img.h);

    LabelImage2D out = make_label_image2d(out_h, out_w);
    for (std::uint32_t r = 0; r < out_h; ++r) {
        const std::uint8_t* src_row = img.px.data() + static_cast<std::size_t>(rows[r]) * img.w;
        std::uint8_t* dst_row = out.px.data() + static_cast<std::size_t>(r) * out_w;
        for (std::uint32_t c = 0; c < out_w; ++c) dst_row[c] = src_row[cols[c]];
    }
    return out;
}

LabelVolume resize_nearest_3d(const LabelVolume& l, Dims target) {
    if (target.nx == 0 || target.ny == 0 || target.nz == 0)
        throw UsageError("resize target dims must be at least 1");
    if (target == l.dims)
        return l;

    std::vector<std::uint32_t> xs(target.nx), ys(target.ny), zs(target.nz);
    for (std::uint32_t x = 0; x < target.nx; ++x) xs[x] = nearest_tap(x, target.nx, l.dims.nx);
    for (std::uint32_t y = 0; y < target.ny; ++y) ys[y] = nearest_tap(y, target.ny, l.dims.ny);
    for (std::uint32_t z = 0; z < target.nz; ++z) zs[z] = nearest_tap(z, target.nz, l.dims.nz);

    LabelVolume out = make_label_volume(target, l.spacing, l.classes);
    for (std::uint32_t z = 0; z < target.nz; ++z)
        for (std::uint32_t y = 0; y < target.ny; ++y) {
            const std::uint8_t* src_row =
                l.labels.data() + l.dims.index(0, ys[y], zs[z]);
            std::uint8_t* dst_row = out.labels.data() + out.dims.index(0, y, z);
            for (std::uint32_t x = 0; x < target.nx; ++x) dst_row[x] = src_row[xs[x]];
        }
    return out;
}

ProbImage2D resize_prob_bilinear(const ProbImage2D& p, std::uint32_t out_h,
                                 std::uint32_t out_w) {
    check_target(out_h, out_w);
    if (out_h == p.h && out_w == p.w)
        return p;

    std::vector<LinearTap> col_taps(out_w), row_taps(out_h);
    for (std::uint32_t c = 0; c < out_w; ++c) col_taps[c] = linear_tap(c, out_w, p.w);
    for (std::uint32_t r = 0; r < out_h; ++r) row_taps[r] = linear_tap(r, out_h, p.h);

    ProbImage2D out = make_prob_image2d(out_h, out_w, p.channels);
    for (std::uint32_t c = 0; c < p.channels; ++c)
        resize_bilinear_plane(p.channel(c), p.h, p.w, out.channel(c), out_h, out_w,
                              col_taps, row_taps);
    renormalize_channels(out);
    return out;
}

void renormalize_channels(ProbImage2D& p) {
    const std::size_t n = p.plane_size();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::uint32_t c = 0; c < p.channels; ++c) sum += p.px[c * n + i];
        if (!(sum > 0.0))
            throw InvariantError("renormalize: nonpositive channel sum");
        const float inv = static_cast<float>(1.0 / sum);
        for (std::uint32_t c = 0; c < p.channels; ++c) p.px[c * n + i] *= inv;
    }
}

} // namespace axiseg
