#include "axiseg/rvol.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "axiseg/errors.hpp"

namespace axiseg {

namespace {

constexpr char kMagic[4] = {'R', 'V', 'O', 'L'};
constexpr std::uint8_t kVersion = 1;

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_f32_le(std::string& out, float x) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
    put_u32_le(out, bits);
}

void append_i16_le(std::string& out, std::int16_t x) {
    const std::uint16_t bits = static_cast<std::uint16_t>(x);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
}

std::string encoding_name(RvolEncoding e) {
    switch (e) {
    case RvolEncoding::int16_le: return "int16";
    case RvolEncoding::float32_le: return "float32";
    case RvolEncoding::uint8: return "uint8";
    }
    throw InvariantError("bad encoding");
}

RvolEncoding encoding_from_name(const std::string& s, const std::filesystem::path& path) {
    if (s == "int16") return RvolEncoding::int16_le;
    if (s == "float32") return RvolEncoding::float32_le;
    if (s == "uint8") return RvolEncoding::uint8;
    throw FormatError(path.string() + ": unknown encoding '" + s + "'");
}

std::size_t scalar_size(RvolEncoding e) {
    switch (e) {
    case RvolEncoding::int16_le: return 2;
    case RvolEncoding::float32_le: return 4;
    case RvolEncoding::uint8: return 1;
    }
    throw InvariantError("bad encoding");
}

void write_file(const std::filesystem::path& path, const nlohmann::json& header,
                const std::string& payload) {
    std::string blob;
    blob.append(kMagic, 4);
    blob.push_back(static_cast<char>(kVersion));
    const std::string header_text = header.dump();
    if (header_text.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvariantError("rvol header too large");
    put_u32_le(blob, static_cast<std::uint32_t>(header_text.size()));
    blob += header_text;
    blob += payload;

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw UsageError("cannot open " + path.string() + " for writing");
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!f)
        throw UsageError("failed writing " + path.string());
}

struct ParsedHeader {
    RvolKind kind;
    Dims dims;
    Spacing spacing;
    RvolEncoding encoding;
    IntensityDomain domain = IntensityDomain::hounsfield;
    ClassMap classes;
    std::string payload;
};

ParsedHeader read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot open " + path.string());
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (blob.size() < 9 || std::memcmp(blob.data(), kMagic, 4) != 0)
        throw FormatError(path.string() + ": not an RVOL file (magic mismatch)");
    if (static_cast<std::uint8_t>(blob[4]) != kVersion)
        throw FormatError(path.string() + ": unsupported RVOL version " +
                          std::to_string(static_cast<std::uint8_t>(blob[4])));

    std::uint32_t header_len = 0;
    for (int i = 0; i < 4; ++i)
        header_len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(blob[5 + i]))
                      << (8 * i);
    if (blob.size() < 9u + header_len)
        throw FormatError(path.string() + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(blob.substr(9, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad header JSON: " + e.what());
    }

    ParsedHeader out;
    try {
        const std::string kind = header.at("kind").get<std::string>();
        if (kind == "scalar") out.kind = RvolKind::scalar;
        else if (kind == "label") out.kind = RvolKind::label;
        else throw FormatError(path.string() + ": unknown kind '" + kind + "'");

        const auto& dims = header.at("dims");
        if (!dims.is_array() || dims.size() != 3)
            throw FormatError(path.string() + ": dims must have 3 entries");
        for (const auto& d : dims) {
            if (!d.is_number_unsigned() ||
                d.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
                throw FormatError(path.string() + ": dim out of range");
        }
        out.dims = {dims[0].get<std::uint32_t>(), dims[1].get<std::uint32_t>(),
                    dims[2].get<std::uint32_t>()};
        if (out.dims.nx == 0 || out.dims.ny == 0 || out.dims.nz == 0)
            throw FormatError(path.string() + ": zero dimension in header");

        const auto& sp = header.at("spacing");
        if (!sp.is_array() || sp.size() != 3)
            throw FormatError(path.string() + ": spacing must have 3 entries");
        out.spacing = {sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
        if (!out.spacing.valid())
            throw FormatError(path.string() + ": nonpositive spacing");

        out.encoding = encoding_from_name(header.at("encoding").get<std::string>(), path);

        if (out.kind == RvolKind::scalar) {
            const std::string domain = header.at("domain").get<std::string>();
            if (domain == "hounsfield") out.domain = IntensityDomain::hounsfield;
            else if (domain == "normalized") out.domain = IntensityDomain::normalized;
            else throw FormatError(path.string() + ": unknown domain '" + domain + "'");
            if (out.encoding == RvolEncoding::uint8)
                throw FormatError(path.string() + ": uint8 is a label encoding");
        } else {
            const auto& cls = header.at("classes");
            std::vector<std::string> names = cls.at("names").get<std::vector<std::string>>();
            const std::uint32_t bg = cls.at("background").get<std::uint32_t>();
            if (bg > 255 || bg >= names.size())
                throw FormatError(path.string() + ": bad background index");
            out.classes = ClassMap(std::move(names), static_cast<std::uint8_t>(bg));
            if (out.encoding != RvolEncoding::uint8)
                throw FormatError(path.string() + ": label volumes use uint8 encoding");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad header: " + e.what());
    }

    // Overflow-safe payload size check.
    const std::size_t max_sz = std::numeric_limits<std::size_t>::max();
    const std::size_t nxny = static_cast<std::size_t>(out.dims.nx) * out.dims.ny;
    if (nxny > max_sz / out.dims.nz)
        throw FormatError(path.string() + ": dims overflow");
    const std::size_t voxels = nxny * out.dims.nz;
    const std::size_t elem = scalar_size(out.encoding);
    if (voxels > max_sz / elem)
        throw FormatError(path.string() + ": dims overflow");
    const std::size_t expect = voxels * elem;
    const std::size_t have = blob.size() - 9 - header_len;
    if (have != expect)
        throw FormatError(path.string() + ": payload is " + std::to_string(have) +
                          " bytes, header implies " + std::to_string(expect));
    out.payload = blob.substr(9 + header_len);
    return out;
}

nlohmann::json base_header(const Dims& dims, const Spacing& spacing) {
    return {{"dims", {dims.nx, dims.ny, dims.nz}},
            {"spacing", {spacing.sx, spacing.sy, spacing.sz}}};
}

} // namespace

RvolEncoding pick_scalar_encoding(const ScalarVolume& v) {
    for (float x : v.data) {
        if (!(x >= -32768.0f && x <= 32767.0f) || x != std::truncf(x))
            return RvolEncoding::float32_le;
    }
    return RvolEncoding::int16_le;
}

RvolKind probe_rvol(const std::filesystem::path& path) {
    return read_file(path).kind;
}

void write_rvol(const std::filesystem::path& path, const ScalarVolume& v) {
    write_rvol(path, v, pick_scalar_encoding(v));
}

void write_rvol(const std::filesystem::path& path, const ScalarVolume& v,
                RvolEncoding encoding) {
    if (v.data.size() != v.dims.voxel_count())
        throw InvariantError("rvol write: data size does not match dims");
    if (encoding == RvolEncoding::uint8)
        throw UsageError("uint8 encoding is for label volumes");

    nlohmann::json header = base_header(v.dims, v.spacing);
    header["kind"] = "scalar";
    header["domain"] = v.domain == IntensityDomain::hounsfield ? "hounsfield" : "normalized";
    header["encoding"] = encoding_name(encoding);

    std::string payload;
    payload.reserve(v.data.size() * scalar_size(encoding));
    if (encoding == RvolEncoding::int16_le) {
        for (float x : v.data) {
            if (!(x >= -32768.0f && x <= 32767.0f) || x != std::truncf(x))
                throw UsageError("value " + std::to_string(x) +
                                 " is not representable as int16; use float32");
            append_i16_le(payload, static_cast<std::int16_t>(x));
        }
    } else {
        for (float x : v.data) append_f32_le(payload, x);
    }
    write_file(path, header, payload);
}

void write_rvol(const std::filesystem::path& path, const LabelVolume& l) {
    if (l.labels.size() != l.dims.voxel_count())
        throw InvariantError("rvol write: data size does not match dims");
    const std::uint32_t c = l.classes.count();
    for (std::uint8_t v : l.labels)
        if (v >= c)
            throw InvariantError("rvol write: label out of range");

    nlohmann::json header = base_header(l.dims, l.spacing);
    header["kind"] = "label";
    header["encoding"] = "uint8";
    header["classes"] = {{"names", l.classes.names()},
                         {"background", l.classes.background_index()}};

    std::string payload(reinterpret_cast<const char*>(l.labels.data()), l.labels.size());
    write_file(path, header, payload);
}

ScalarVolume read_scalar_rvol(const std::filesystem::path& path) {
    ParsedHeader ph = read_file(path);
    if (ph.kind != RvolKind::scalar)
        throw FormatError(path.string() + ": expected a scalar volume, found labels");

    ScalarVolume v;
    v.dims = ph.dims;
    v.spacing = ph.spacing;
    v.domain = ph.domain;
    v.data.resize(ph.dims.voxel_count());
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(ph.payload.data());
    if (ph.encoding == RvolEncoding::int16_le) {
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            const std::uint16_t bits =
                static_cast<std::uint16_t>(bytes[2 * i]) |
                (static_cast<std::uint16_t>(bytes[2 * i + 1]) << 8);
            v.data[i] = static_cast<float>(static_cast<std::int16_t>(bits));
        }
    } else {
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
            v.data[i] = std::bit_cast<float>(bits);
        }
    }
    return v;
}

LabelVolume read_label_rvol(const std::filesystem::path& path) {
    ParsedHeader ph = read_file(path);
    if (ph.kind != RvolKind::label)
        throw FormatError(path.string() + ": expected a label volume, found scalars");

    LabelVolume l;
    l.dims = ph.dims;
    l.spacing = ph.spacing;
    l.classes = ph.classes;
    l.labels.assign(ph.payload.begin(), ph.payload.end());
    const std::uint32_t c = l.classes.count();
    for (std::size_t i = 0; i < l.labels.size(); ++i)
        if (l.labels[i] >= c)
            throw FormatError(path.string() + ": label " + std::to_string(l.labels[i]) +
                              " at voxel " + std::to_string(i) + " out of range for " +
                              std::to_string(c) + " classes");
    return l;
}

} // namespace axiseg
