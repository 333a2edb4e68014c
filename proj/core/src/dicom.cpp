#include "axiseg/dicom.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "axiseg/errors.hpp"
#include "axiseg/log.hpp"

namespace axiseg {

namespace {

constexpr const char* kImplicitLE = "1.2.840.10008.1.2";
constexpr const char* kExplicitLE = "1.2.840.10008.1.2.1";

struct Tag {
    std::uint16_t group = 0;
    std::uint16_t element = 0;
    bool operator==(const Tag&) const = default;
};

constexpr Tag kTransferSyntax{0x0002, 0x0010};
constexpr Tag kNumberOfFrames{0x0028, 0x0008};
constexpr Tag kRows{0x0028, 0x0010};
constexpr Tag kColumns{0x0028, 0x0011};
constexpr Tag kSamplesPerPixel{0x0028, 0x0002};
constexpr Tag kBitsAllocated{0x0028, 0x0100};
constexpr Tag kPixelRepresentation{0x0028, 0x0103};
constexpr Tag kRescaleIntercept{0x0028, 0x1052};
constexpr Tag kRescaleSlope{0x0028, 0x1053};
constexpr Tag kPixelSpacing{0x0028, 0x0030};
constexpr Tag kImagePosition{0x0020, 0x0032};
constexpr Tag kInstanceNumber{0x0020, 0x0013};
constexpr Tag kSliceThickness{0x0018, 0x0050};
constexpr Tag kPixelData{0x7FE0, 0x0010};
constexpr Tag kItem{0xFFFE, 0xE000};
constexpr Tag kItemDelimiter{0xFFFE, 0xE00D};
constexpr Tag kSequenceDelimiter{0xFFFE, 0xE0DD};

constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;

// Byte cursor over one file's contents.
class Reader {
public:
    Reader(const std::string& bytes, std::string file)
        : bytes_(bytes), file_(std::move(file)) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    const std::string& file() const { return file_; }

    void seek(std::size_t p) { pos_ = p; }

    void need(std::size_t n) const {
        if (remaining() < n)
            throw FormatError(file_ + ": truncated DICOM element at byte " +
                              std::to_string(pos_));
    }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const std::uint8_t*>(bytes_.data() + pos_);
        pos_ += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32() {
        need(4);
        const auto* p = reinterpret_cast<const std::uint8_t*>(bytes_.data() + pos_);
        pos_ += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) |
               (static_cast<std::uint32_t>(p[3]) << 24);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

private:
    const std::string& bytes_;
    std::string file_;
    std::size_t pos_ = 0;
};

struct Element {
    Tag tag;
    std::string vr; // empty under implicit VR
    std::uint32_t length = 0;
    std::size_t value_pos = 0;
};

bool has_long_length(const std::string& vr) {
    return vr == "OB" || vr == "OW" || vr == "OF" || vr == "OD" || vr == "OL" ||
           vr == "SQ" || vr == "UC" || vr == "UR" || vr == "UT" || vr == "UN";
}

Element read_element_header(Reader& r, bool explicit_vr) {
    Element e;
    e.tag.group = r.u16();
    e.tag.element = r.u16();

    // Item and delimiter tags never carry a VR.
    const bool item_tag = e.tag.group == 0xFFFE;
    if (explicit_vr && !item_tag) {
        e.vr = r.str(2);
        if (has_long_length(e.vr)) {
            r.skip(2);
            e.length = r.u32();
        } else {
            e.length = r.u16();
        }
    } else {
        e.length = r.u32();
    }
    e.value_pos = r.pos();
    return e;
}

void skip_sequence_items(Reader& r, bool explicit_vr);

// Positions the cursor just past the element's value.
void skip_value(Reader& r, const Element& e, bool explicit_vr) {
    if (e.length != kUndefinedLength) {
        r.skip(e.length);
        return;
    }
    if (e.tag == kPixelData)
        throw FormatError(r.file() + ": encapsulated pixel data requires a compressed "
                                     "transfer syntax, which is not supported");
    skip_sequence_items(r, explicit_vr);
}

// Walks items of an undefined-length sequence until its delimiter.
void skip_sequence_items(Reader& r, bool explicit_vr) {
    for (;;) {
        Element item = read_element_header(r, explicit_vr);
        if (item.tag == kSequenceDelimiter) return;
        if (!(item.tag == kItem))
            throw FormatError(r.file() + ": malformed sequence (expected item tag)");
        if (item.length != kUndefinedLength) {
            r.skip(item.length);
            continue;
        }
        // Undefined-length item: walk nested elements to the item delimiter.
        for (;;) {
            Element nested = read_element_header(r, explicit_vr);
            if (nested.tag == kItemDelimiter) break;
            skip_value(r, nested, explicit_vr);
        }
    }
}

std::string trim_value(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && s[start] == ' ') ++start;
    return s.substr(start);
}

std::vector<double> parse_decimal_string(const std::string& raw, const std::string& file,
                                         const char* what) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string part;
    while (std::getline(ss, part, '\\')) {
        part = trim_value(part);
        if (part.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw FormatError(file + ": cannot parse " + what + " value '" + part + "'");
        }
    }
    return out;
}

struct SliceData {
    DicomSliceMeta meta;
    std::vector<float> hu; // rows*columns, already through the rescale affine
    std::string path;
};

std::uint16_t read_us(Reader& r, const Element& e) {
    if (e.length != 2)
        throw FormatError(r.file() + ": expected 2-byte US value");
    return r.u16();
}

SliceData read_dicom_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw FormatError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(f)),
                            std::istreambuf_iterator<char>());

    Reader r(bytes, path.string());
    if (bytes.size() < 132 || bytes.compare(128, 4, "DICM") != 0)
        throw FormatError(path.string() + ": not a DICOM part-10 file (no DICM marker)");
    r.seek(132);

    // File meta group (0002,xxxx) is always explicit VR little endian.
    std::string transfer_syntax;
    while (r.remaining() >= 8) {
        const std::size_t mark = r.pos();
        Element e = read_element_header(r, /*explicit_vr=*/true);
        if (e.tag.group != 0x0002) {
            r.seek(mark);
            break;
        }
        if (e.tag == kTransferSyntax) {
            std::string v = r.str(e.length);
            transfer_syntax = trim_value(std::move(v));
        } else {
            skip_value(r, e, true);
        }
    }
    if (transfer_syntax.empty())
        throw FormatError(path.string() + ": missing transfer syntax");

    bool explicit_vr;
    if (transfer_syntax == kExplicitLE) explicit_vr = true;
    else if (transfer_syntax == kImplicitLE) explicit_vr = false;
    else
        throw FormatError(path.string() + ": unsupported transfer syntax '" +
                          transfer_syntax +
                          "' (only uncompressed little endian is supported)");

    SliceData slice;
    slice.path = path.string();
    DicomSliceMeta& m = slice.meta;
    std::optional<std::size_t> pixel_pos;
    std::uint32_t pixel_len = 0;

    while (r.remaining() >= 8) {
        Element e = read_element_header(r, explicit_vr);
        if (e.tag == kRows) {
            m.rows = read_us(r, e);
        } else if (e.tag == kColumns) {
            m.columns = read_us(r, e);
        } else if (e.tag == kBitsAllocated) {
            m.bits_allocated = read_us(r, e);
        } else if (e.tag == kPixelRepresentation) {
            m.pixel_signed = read_us(r, e) != 0;
        } else if (e.tag == kSamplesPerPixel) {
            if (read_us(r, e) != 1)
                throw FormatError(path.string() + ": multi-sample pixels not supported");
        } else if (e.tag == kNumberOfFrames) {
            const auto v = parse_decimal_string(r.str(e.length), path.string(), "frames");
            if (!v.empty() && v[0] > 1.0)
                throw FormatError(path.string() + ": multi-frame objects not supported");
        } else if (e.tag == kRescaleIntercept) {
            const auto v = parse_decimal_string(r.str(e.length), path.string(),
                                                "rescale intercept");
            if (!v.empty()) m.rescale_intercept = v[0];
        } else if (e.tag == kRescaleSlope) {
            const auto v =
                parse_decimal_string(r.str(e.length), path.string(), "rescale slope");
            if (!v.empty()) m.rescale_slope = v[0];
        } else if (e.tag == kPixelSpacing) {
            const auto v =
                parse_decimal_string(r.str(e.length), path.string(), "pixel spacing");
            if (v.size() != 2)
                throw FormatError(path.string() + ": pixel spacing needs 2 values");
            m.pixel_spacing = {v[0], v[1]};
            m.has_pixel_spacing = true;
        } else if (e.tag == kImagePosition) {
            const auto v =
                parse_decimal_string(r.str(e.length), path.string(), "image position");
            if (v.size() != 3)
                throw FormatError(path.string() + ": image position needs 3 values");
            m.image_position = {v[0], v[1], v[2]};
            m.has_position = true;
        } else if (e.tag == kInstanceNumber) {
            const auto v =
                parse_decimal_string(r.str(e.length), path.string(), "instance number");
            if (!v.empty()) {
                m.instance_number = static_cast<std::int32_t>(v[0]);
                m.has_instance_number = true;
            }
        } else if (e.tag == kSliceThickness) {
            const auto v =
                parse_decimal_string(r.str(e.length), path.string(), "slice thickness");
            if (!v.empty()) {
                m.slice_thickness = v[0];
                m.has_slice_thickness = true;
            }
        } else if (e.tag == kPixelData) {
            if (e.length == kUndefinedLength)
                throw FormatError(path.string() +
                                  ": encapsulated pixel data requires a compressed "
                                  "transfer syntax, which is not supported");
            pixel_pos = r.pos();
            pixel_len = e.length;
            r.skip(e.length);
        } else {
            skip_value(r, e, explicit_vr);
        }
    }

    if (m.rows == 0 || m.columns == 0)
        throw FormatError(path.string() + ": missing Rows/Columns");
    if (m.bits_allocated != 16)
        throw FormatError(path.string() + ": only 16-bit pixel data is supported (got " +
                          std::to_string(m.bits_allocated) + ")");
    if (!pixel_pos)
        throw FormatError(path.string() + ": missing PixelData");

    const std::size_t n = static_cast<std::size_t>(m.rows) * m.columns;
    if (pixel_len < n * 2)
        throw FormatError(path.string() + ": PixelData too short (" +
                          std::to_string(pixel_len) + " bytes for " + std::to_string(n) +
                          " pixels)");

    slice.hu.resize(n);
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + *pixel_pos);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint16_t bits =
            static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8));
        const double stored = m.pixel_signed
                                  ? static_cast<double>(static_cast<std::int16_t>(bits))
                                  : static_cast<double>(bits);
        double hu = stored * m.rescale_slope + m.rescale_intercept;
        // Scanner padding values (e.g. -2000 outside the reconstruction
        // circle) land below the calibrated range; clamp to it.
        hu = std::clamp(hu, static_cast<double>(kHounsfieldMin),
                        static_cast<double>(kHounsfieldMax));
        slice.hu[i] = static_cast<float>(hu);
    }
    return slice;
}

} // namespace

DicomSeries read_dicom_series(const std::filesystem::path& directory) {
    if (!std::filesystem::is_directory(directory))
        throw UsageError(directory.string() + " is not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    if (files.empty())
        throw UsageError(directory.string() + " contains no files");
    if (files.size() < 2)
        throw UsageError(directory.string() + ": a series needs at least 2 slices");

    std::vector<SliceData> slices;
    slices.reserve(files.size());
    for (const auto& f : files) slices.push_back(read_dicom_file(f));

    const std::uint16_t rows = slices[0].meta.rows;
    const std::uint16_t cols = slices[0].meta.columns;
    for (const auto& s : slices)
        if (s.meta.rows != rows || s.meta.columns != cols)
            throw FormatError(s.path + ": slice is " + std::to_string(s.meta.rows) + "x" +
                              std::to_string(s.meta.columns) + " but series is " +
                              std::to_string(rows) + "x" + std::to_string(cols));

    const bool all_positions =
        std::all_of(slices.begin(), slices.end(),
                    [](const SliceData& s) { return s.meta.has_position; });
    const bool all_instances =
        std::all_of(slices.begin(), slices.end(),
                    [](const SliceData& s) { return s.meta.has_instance_number; });

    if (all_positions) {
        std::stable_sort(slices.begin(), slices.end(),
                         [](const SliceData& a, const SliceData& b) {
                             return a.meta.image_position[2] < b.meta.image_position[2];
                         });
    } else if (all_instances) {
        std::stable_sort(slices.begin(), slices.end(),
                         [](const SliceData& a, const SliceData& b) {
                             return a.meta.instance_number < b.meta.instance_number;
                         });
    } else {
        throw FormatError(directory.string() +
                          ": slices lack both ImagePositionPatient and InstanceNumber; "
                          "cannot establish slice order");
    }

    DicomSeries out;

    // Inter-slice spacing: median of successive z gaps when positions exist;
    // SliceThickness only as fallback. Gaps reflect the true reconstruction
    // spacing, thickness does not.
    double sz = 0.0;
    if (all_positions) {
        std::vector<double> gaps;
        gaps.reserve(slices.size() - 1);
        for (std::size_t i = 1; i < slices.size(); ++i)
            gaps.push_back(slices[i].meta.image_position[2] -
                           slices[i - 1].meta.image_position[2]);
        std::vector<double> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        sz = sorted[sorted.size() / 2];
        if (sorted.size() % 2 == 0)
            sz = 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
        if (!(sz > 0.0))
            throw FormatError(directory.string() +
                              ": duplicate or non-increasing slice positions");
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (std::abs(gaps[i] - sz) > 0.10 * sz) {
                std::ostringstream os;
                os << "non-uniform slice gap " << gaps[i] << " mm between slices " << i
                   << " and " << i + 1 << " (median " << sz << " mm); using the median";
                out.warnings.push_back(os.str());
            }
        }
    } else if (slices[0].meta.has_slice_thickness &&
               slices[0].meta.slice_thickness > 0.0) {
        sz = slices[0].meta.slice_thickness;
        out.warnings.push_back(
            "no ImagePositionPatient; inter-slice spacing taken from SliceThickness");
    } else {
        sz = 1.0;
        out.warnings.push_back(
            "no position or thickness information; assuming 1 mm slice spacing");
    }

    Spacing spacing;
    if (slices[0].meta.has_pixel_spacing) {
        spacing.sy = slices[0].meta.pixel_spacing[0]; // row spacing is the y step
        spacing.sx = slices[0].meta.pixel_spacing[1];
    } else {
        out.warnings.push_back("no PixelSpacing; assuming 1 mm pixels");
    }
    spacing.sz = sz;
    if (!spacing.valid())
        throw FormatError(directory.string() + ": nonpositive spacing in series");

    ScalarVolume v = make_scalar_volume(
        {cols, rows, static_cast<std::uint32_t>(slices.size())}, spacing,
        IntensityDomain::hounsfield);
    for (std::size_t z = 0; z < slices.size(); ++z)
        std::memcpy(v.data.data() + z * slices[z].hu.size(), slices[z].hu.data(),
                    slices[z].hu.size() * sizeof(float));

    for (const auto& w : out.warnings) log_warn("dicom: " + w);
    out.volume = std::move(v);
    return out;
}

} // namespace axiseg
