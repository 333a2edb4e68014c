#include "axiseg/png_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include <png.h>

#include "axiseg/errors.hpp"

namespace axiseg {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
    (void)png;
    throw FormatError(std::string("png: ") + msg);
}

void on_png_warning(png_structp, png_const_charp) {}

} // namespace

void write_png_gray8(const std::filesystem::path& path, const Gray8Image& img) {
    if (img.px.size() != static_cast<std::size_t>(img.h) * img.w)
        throw InvariantError("png write: pixel buffer does not match dims");
    if (img.h == 0 || img.w == 0)
        throw UsageError("png write: empty image");

    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f)
        throw UsageError("cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              on_png_error, on_png_warning);
    if (!png)
        throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }

    try {
        png_init_io(png, f.get());
        png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (std::uint32_t r = 0; r < img.h; ++r)
            png_write_row(png, const_cast<png_bytep>(img.px.data() +
                                                     static_cast<std::size_t>(r) * img.w));
        png_write_end(png, info);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

Gray8Image read_png_gray8(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f)
        throw UsageError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             on_png_error, on_png_warning);
    if (!png)
        throw Error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png_create_info_struct failed");
    }

    Gray8Image img;
    try {
        png_init_io(png, f.get());
        png_read_info(png, info);

        const png_byte color_type = png_get_color_type(png, info);
        const png_byte bit_depth = png_get_bit_depth(png, info);
        if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8)
            throw FormatError(path.string() +
                              ": expected 8-bit grayscale PNG (got color type " +
                              std::to_string(color_type) + ", depth " +
                              std::to_string(bit_depth) + ")");

        img.w = png_get_image_width(png, info);
        img.h = png_get_image_height(png, info);
        img.px.resize(static_cast<std::size_t>(img.h) * img.w);
        for (std::uint32_t r = 0; r < img.h; ++r)
            png_read_row(png, img.px.data() + static_cast<std::size_t>(r) * img.w,
                         nullptr);
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::uint8_t quantize_unit(float p) {
    const float clamped = p < 0.0f ? 0.0f : (p > 1.0f ? 1.0f : p);
    return static_cast<std::uint8_t>(std::lround(255.0f * clamped));
}

void write_image_png(const std::filesystem::path& path, const Image2D& img) {
    Gray8Image out;
    out.h = img.h;
    out.w = img.w;
    out.px.resize(img.size());
    for (std::size_t i = 0; i < img.px.size(); ++i) out.px[i] = quantize_unit(img.px[i]);
    write_png_gray8(path, out);
}

void write_mask_png(const std::filesystem::path& path, const LabelImage2D& mask) {
    Gray8Image out;
    out.h = mask.h;
    out.w = mask.w;
    out.px = mask.px;
    write_png_gray8(path, out);
}

LabelImage2D import_png_mask(const std::filesystem::path& path, const ClassMap& classes) {
    const Gray8Image img = read_png_gray8(path);
    const std::uint32_t c = classes.count();
    for (std::uint8_t v : img.px)
        if (v >= c)
            throw FormatError(path.string() + ": mask value " + std::to_string(v) +
                              " out of range for " + std::to_string(c) + " classes");
    LabelImage2D out;
    out.h = img.h;
    out.w = img.w;
    out.px = img.px;
    return out;
}

std::uint32_t export_png_slices(const ScalarVolume& v, const LabelVolume* labels,
                                Axis axis, const std::filesystem::path& out_dir) {
    if (v.domain != IntensityDomain::normalized)
        throw UsageError("export_png_slices expects a windowed (normalized) volume");
    if (labels && !(labels->dims == v.dims))
        throw UsageError("label dims " + to_string(labels->dims) +
                         " do not match volume dims " + to_string(v.dims));

    std::filesystem::create_directories(out_dir);
    const std::uint32_t n = slice_count(v.dims, axis);
    char name[64];
    std::uint32_t files = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::snprintf(name, sizeof(name), "%s_%05u.png", axis_name(axis).c_str(), i);
        write_image_png(out_dir / name, extract_slice(v, axis, i));
        ++files;
        if (labels) {
            std::snprintf(name, sizeof(name), "%s_%05u_mask.png",
                          axis_name(axis).c_str(), i);
            write_mask_png(out_dir / name, extract_slice(*labels, axis, i));
            ++files;
        }
    }
    return files;
}

} // namespace axiseg
