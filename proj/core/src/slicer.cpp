#include "axiseg/slicer.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "axiseg/errors.hpp"
#include "axiseg/png_io.hpp"

namespace axiseg {

const std::string& axis_name(Axis axis) {
    static const std::string names[3] = {"axial", "coronal", "sagittal"};
    return names[static_cast<std::uint8_t>(axis)];
}

Axis axis_from_name(const std::string& name) {
    for (Axis a : kAllAxes)
        if (axis_name(a) == name) return a;
    throw UsageError("unknown axis '" + name + "' (expected axial, coronal or sagittal)");
}

std::uint32_t slice_count(const Dims& dims, Axis axis) {
    switch (axis) {
    case Axis::axial: return dims.nz;
    case Axis::coronal: return dims.ny;
    case Axis::sagittal: return dims.nx;
    }
    throw InvariantError("bad axis");
}

SliceDims slice_dims(const Dims& dims, Axis axis) {
    switch (axis) {
    case Axis::axial: return {dims.ny, dims.nx};
    case Axis::coronal: return {dims.nz, dims.nx};
    case Axis::sagittal: return {dims.nz, dims.ny};
    }
    throw InvariantError("bad axis");
}

namespace {

std::uint32_t snap_to_multiple(double x, std::uint32_t multiple, std::uint32_t min_dim) {
    // Nearest multiple, ties round up.
    const double k = std::floor(x / multiple + 0.5);
    const double snapped = k * multiple;
    if (snapped < min_dim) return min_dim;
    return static_cast<std::uint32_t>(snapped);
}

} // namespace

SliceDims target_size(std::uint32_t h, std::uint32_t w, const SliceSizePolicy& policy) {
    if (h == 0 || w == 0)
        throw UsageError("target_size needs positive dims");
    double fh = h, fw = w;
    const std::uint32_t longest = std::max(h, w);
    if (longest > policy.max_dim) {
        // Uniform downscale keeps the aspect ratio; rounding happens after.
        const double scale = static_cast<double>(policy.max_dim) / longest;
        fh = h * scale;
        fw = w * scale;
    }
    return {snap_to_multiple(fh, policy.multiple, policy.min_dim),
            snap_to_multiple(fw, policy.multiple, policy.min_dim)};
}

namespace {

void check_index(const Dims& dims, Axis axis, std::uint32_t index) {
    const std::uint32_t n = slice_count(dims, axis);
    if (index >= n)
        throw UsageError("slice index " + std::to_string(index) + " out of range for " +
                         axis_name(axis) + " axis with " + std::to_string(n) + " slices");
}

// Copies one plane between a volume buffer and a (h, w) grid buffer using the
// fixed axis bijection. Rows are volume-contiguous for axial and coronal;
// sagittal gathers with stride nx.
template <typename T, bool ToGrid>
void copy_plane(T* vol, const Dims& dims, Axis axis, std::uint32_t index, T* grid,
                std::uint32_t h, std::uint32_t w) {
    switch (axis) {
    case Axis::axial:
        for (std::uint32_t r = 0; r < h; ++r) {
            T* v = vol + dims.index(0, r, index);
            T* g = grid + static_cast<std::size_t>(r) * w;
            if constexpr (ToGrid) std::memcpy(g, v, sizeof(T) * w);
            else std::memcpy(v, g, sizeof(T) * w);
        }
        break;
    case Axis::coronal:
        for (std::uint32_t r = 0; r < h; ++r) {
            T* v = vol + dims.index(0, index, r);
            T* g = grid + static_cast<std::size_t>(r) * w;
            if constexpr (ToGrid) std::memcpy(g, v, sizeof(T) * w);
            else std::memcpy(v, g, sizeof(T) * w);
        }
        break;
    case Axis::sagittal:
        for (std::uint32_t r = 0; r < h; ++r) {
            T* g = grid + static_cast<std::size_t>(r) * w;
            for (std::uint32_t c = 0; c < w; ++c) {
                T* v = vol + dims.index(index, c, r);
                if constexpr (ToGrid) g[c] = *v;
                else *v = g[c];
            }
        }
        break;
    }
}

void check_grid_dims(const Dims& dims, Axis axis, std::uint32_t h, std::uint32_t w) {
    const SliceDims want = slice_dims(dims, axis);
    if (want.h != h || want.w != w)
        throw UsageError("slice grid is " + std::to_string(h) + "x" + std::to_string(w) +
                         " but " + axis_name(axis) + " plane of " + to_string(dims) +
                         " is " + std::to_string(want.h) + "x" + std::to_string(want.w));
}

} // namespace

Image2D extract_slice(const ScalarVolume& v, Axis axis, std::uint32_t index) {
    check_index(v.dims, axis, index);
    const SliceDims sd = slice_dims(v.dims, axis);
    Image2D out = make_image2d(sd.h, sd.w);
    copy_plane<const float, true>(v.data.data(), v.dims, axis, index, out.px.data(),
                                  sd.h, sd.w);
    return out;
}

LabelImage2D extract_slice(const LabelVolume& l, Axis axis, std::uint32_t index) {
    check_index(l.dims, axis, index);
    const SliceDims sd = slice_dims(l.dims, axis);
    LabelImage2D out = make_label_image2d(sd.h, sd.w);
    copy_plane<const std::uint8_t, true>(l.labels.data(), l.dims, axis, index,
                                         out.px.data(), sd.h, sd.w);
    return out;
}

ProbImage2D extract_slice(const ProbVolume& p, Axis axis, std::uint32_t index) {
    check_index(p.dims, axis, index);
    const SliceDims sd = slice_dims(p.dims, axis);
    ProbImage2D out = make_prob_image2d(sd.h, sd.w, p.classes.count());
    for (std::uint32_t c = 0; c < p.classes.count(); ++c)
        copy_plane<const float, true>(p.channel(c), p.dims, axis, index, out.channel(c),
                                      sd.h, sd.w);
    return out;
}

void insert_slice(ScalarVolume& v, Axis axis, std::uint32_t index, const Image2D& grid) {
    check_index(v.dims, axis, index);
    check_grid_dims(v.dims, axis, grid.h, grid.w);
    copy_plane<float, false>(v.data.data(), v.dims, axis, index,
                             const_cast<float*>(grid.px.data()), grid.h, grid.w);
}

void insert_slice(LabelVolume& l, Axis axis, std::uint32_t index,
                  const LabelImage2D& grid) {
    check_index(l.dims, axis, index);
    check_grid_dims(l.dims, axis, grid.h, grid.w);
    copy_plane<std::uint8_t, false>(l.labels.data(), l.dims, axis, index,
                                    const_cast<std::uint8_t*>(grid.px.data()), grid.h,
                                    grid.w);
}

void insert_slice(ProbVolume& p, Axis axis, std::uint32_t index, const ProbImage2D& grid) {
    check_index(p.dims, axis, index);
    check_grid_dims(p.dims, axis, grid.h, grid.w);
    if (grid.channels != p.classes.count())
        throw UsageError("slice has " + std::to_string(grid.channels) +
                         " channels, volume has " + std::to_string(p.classes.count()));
    for (std::uint32_t c = 0; c < p.classes.count(); ++c)
        copy_plane<float, false>(p.channel(c), p.dims, axis, index,
                                 const_cast<float*>(grid.channel(c)), grid.h, grid.w);
}

TrainingManifest export_training_slices(const ScalarVolume& v, const LabelVolume& l,
                                        const std::vector<Axis>& axes,
                                        const std::filesystem::path& out_dir) {
    if (v.domain != IntensityDomain::normalized)
        throw UsageError("export_training_slices expects a windowed (normalized) volume");
    if (!(v.dims == l.dims))
        throw UsageError("volume dims " + to_string(v.dims) + " do not match label dims " +
                         to_string(l.dims));
    if (axes.empty())
        throw UsageError("no axes requested");

    std::filesystem::create_directories(out_dir);
    TrainingManifest manifest;
    manifest.manifest_path = out_dir / "manifest.jsonl";
    std::ofstream mf(manifest.manifest_path, std::ios::trunc);
    if (!mf)
        throw UsageError("cannot write " + manifest.manifest_path.string());

    char name[64];
    for (Axis axis : axes) {
        const std::uint32_t n = slice_count(v.dims, axis);
        for (std::uint32_t i = 0; i < n; ++i) {
            const Image2D img = extract_slice(v, axis, i);
            const LabelImage2D mask = extract_slice(l, axis, i);

            std::snprintf(name, sizeof(name), "%s_%05u.png", axis_name(axis).c_str(), i);
            const std::string image_name = name;
            std::snprintf(name, sizeof(name), "%s_%05u_mask.png", axis_name(axis).c_str(),
                          i);
            const std::string mask_name = name;

            write_image_png(out_dir / image_name, img);
            write_mask_png(out_dir / mask_name, mask);

            TrainingPair pair{axis, i, image_name, mask_name, img.h, img.w};
            manifest.pairs.push_back(pair);

            nlohmann::json rec = {{"axis", axis_name(axis)}, {"index", i},
                                  {"image", image_name},     {"mask", mask_name},
                                  {"h", img.h},              {"w", img.w}};
            mf << rec.dump() << "\n";
        }
    }
    mf.close();
    if (!mf)
        throw UsageError("failed writing " + manifest.manifest_path.string());
    return manifest;
}

} // namespace axiseg
