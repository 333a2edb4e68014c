#include "axiseg/phantom.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "axiseg/errors.hpp"
#include "axiseg/rng.hpp"

namespace axiseg {

namespace {

void check_spec(const PhantomSpec& spec) {
    if (spec.dims.voxel_count() == 0)
        throw UsageError("phantom dims must be positive");
    if (!spec.spacing.valid())
        throw UsageError("phantom spacing must be positive");
    for (const auto& e : spec.ellipsoids) {
        if (e.label >= spec.classes.count())
            throw UsageError("ellipsoid class " + std::to_string(e.label) +
                             " out of range");
        const double lim[3] = {static_cast<double>(spec.dims.nx - 1),
                               static_cast<double>(spec.dims.ny - 1),
                               static_cast<double>(spec.dims.nz - 1)};
        for (int i = 0; i < 3; ++i) {
            if (!(e.semi_axes[i] > 0.0))
                throw UsageError("ellipsoid semi-axes must be positive");
            if (e.center[i] - e.semi_axes[i] < 0.0 ||
                e.center[i] + e.semi_axes[i] > lim[i])
                throw UsageError("ellipsoid extends outside the volume");
        }
    }
}

} // namespace

std::pair<ScalarVolume, LabelVolume> generate(const PhantomSpec& spec) {
    check_spec(spec);

    const std::uint8_t bg = spec.classes.background_index();
    ScalarVolume scan = make_scalar_volume(spec.dims, spec.spacing,
                                           IntensityDomain::hounsfield,
                                           static_cast<float>(spec.background_hu));
    LabelVolume labels = make_label_volume(spec.dims, spec.spacing, spec.classes, bg);

    // Paint in order; later ellipsoids overwrite earlier ones. Shells only
    // touch voxels still at background HU so they never eat an interior.
    for (const auto& e : spec.ellipsoids) {
        const double sa[3] = {e.semi_axes[0] + spec.shell_voxels,
                              e.semi_axes[1] + spec.shell_voxels,
                              e.semi_axes[2] + spec.shell_voxels};
        const std::uint32_t x0 = static_cast<std::uint32_t>(
            std::max(0.0, std::floor(e.center[0] - sa[0])));
        const std::uint32_t x1 = static_cast<std::uint32_t>(
            std::min<double>(spec.dims.nx - 1, std::ceil(e.center[0] + sa[0])));
        const std::uint32_t y0 = static_cast<std::uint32_t>(
            std::max(0.0, std::floor(e.center[1] - sa[1])));
        const std::uint32_t y1 = static_cast<std::uint32_t>(
            std::min<double>(spec.dims.ny - 1, std::ceil(e.center[1] + sa[1])));
        const std::uint32_t z0 = static_cast<std::uint32_t>(
            std::max(0.0, std::floor(e.center[2] - sa[2])));
        const std::uint32_t z1 = static_cast<std::uint32_t>(
            std::min<double>(spec.dims.nz - 1, std::ceil(e.center[2] + sa[2])));

        for (std::uint32_t z = z0; z <= z1; ++z)
            for (std::uint32_t y = y0; y <= y1; ++y)
                for (std::uint32_t x = x0; x <= x1; ++x) {
                    const double dx = (x - e.center[0]) / e.semi_axes[0];
                    const double dy = (y - e.center[1]) / e.semi_axes[1];
                    const double dz = (z - e.center[2]) / e.semi_axes[2];
                    const double q = dx * dx + dy * dy + dz * dz;
                    const std::size_t i = spec.dims.index(x, y, z);
                    if (q <= 1.0) {
                        labels.labels[i] = e.label;
                        scan.data[i] = static_cast<float>(e.interior_hu);
                    } else if (spec.shell_voxels > 0.0) {
                        const double sx = (x - e.center[0]) / sa[0];
                        const double sy = (y - e.center[1]) / sa[1];
                        const double szq = (z - e.center[2]) / sa[2];
                        if (sx * sx + sy * sy + szq * szq <= 1.0 &&
                            scan.data[i] == static_cast<float>(spec.background_hu))
                            scan.data[i] = static_cast<float>(spec.shell_hu);
                    }
                }
    }
    return {std::move(scan), std::move(labels)};
}

PhantomSpec four_chamber_preset(Dims dims, std::uint64_t seed) {
    if (dims.nx < 64 || dims.ny < 64 || dims.nz < 64)
        throw UsageError("four-chamber preset needs dims of at least 64 per axis");

    PhantomSpec spec;
    spec.dims = dims;
    spec.spacing = {1.0, 1.0, 1.0};
    spec.seed = seed;

    // Chamber anchors as fractions of the volume, one per octant-ish slot.
    const double anchors[4][3] = {{0.32, 0.34, 0.40},
                                  {0.68, 0.32, 0.58},
                                  {0.34, 0.68, 0.60},
                                  {0.66, 0.66, 0.38}};
    const double interior_hu[4] = {300.0, 280.0, 320.0, 260.0};

    SplitMix64 rng(splitmix64(seed));
    const double n[3] = {static_cast<double>(dims.nx), static_cast<double>(dims.ny),
                         static_cast<double>(dims.nz)};

    // Shrink deterministically until the pairwise separation constraint holds;
    // at base size it already does for cubic dims, the loop covers skewed ones.
    double base = 0.11 * std::min({n[0], n[1], n[2]});
    std::vector<Ellipsoid> chambers;
    for (int attempt = 0; attempt < 32; ++attempt, base *= 0.95) {
        chambers.clear();
        SplitMix64 local = rng; // same jitter stream per attempt
        for (int c = 0; c < 4; ++c) {
            Ellipsoid e;
            e.label = static_cast<std::uint8_t>(c);
            e.interior_hu = interior_hu[c];
            for (int i = 0; i < 3; ++i) {
                const double jitter_pos = (local.next_unit() - 0.5) * 0.04; // +-2%
                e.center[i] = (anchors[c][i] + jitter_pos) * n[i];
                const double jitter_size = 1.0 + (local.next_unit() - 0.5) * 0.5; // +-25%
                e.semi_axes[i] = base * jitter_size;
            }
            chambers.push_back(e);
        }

        bool ok = true;
        for (int a = 0; a < 4 && ok; ++a) {
            const auto& ea = chambers[a];
            const double ra = *std::max_element(ea.semi_axes.begin(), ea.semi_axes.end());
            for (int i = 0; i < 3 && ok; ++i)
                if (ea.center[i] - ea.semi_axes[i] < 1.0 ||
                    ea.center[i] + ea.semi_axes[i] > n[i] - 2.0)
                    ok = false;
            for (int b = a + 1; b < 4 && ok; ++b) {
                const auto& eb = chambers[b];
                const double rb =
                    *std::max_element(eb.semi_axes.begin(), eb.semi_axes.end());
                const double d = std::hypot(ea.center[0] - eb.center[0],
                                            ea.center[1] - eb.center[1],
                                            ea.center[2] - eb.center[2]);
                if (d < ra + rb + 2.0) ok = false;
            }
        }
        if (ok) {
            spec.ellipsoids = std::move(chambers);
            return spec;
        }
    }
    throw UsageError("cannot fit four separated chambers into " + to_string(dims));
}

namespace {

nlohmann::json spacing_to_json(const Spacing& s) { return {s.sx, s.sy, s.sz}; }

} // namespace

std::string phantom_spec_to_json(const PhantomSpec& spec) {
    nlohmann::json ellipsoids = nlohmann::json::array();
    for (const auto& e : spec.ellipsoids)
        ellipsoids.push_back({{"center", e.center},
                              {"semi_axes", e.semi_axes},
                              {"class", e.label},
                              {"interior_hu", e.interior_hu}});
    nlohmann::json doc = {
        {"dims", {spec.dims.nx, spec.dims.ny, spec.dims.nz}},
        {"spacing", spacing_to_json(spec.spacing)},
        {"classes",
         {{"names", spec.classes.names()}, {"background", spec.classes.background_index()}}},
        {"ellipsoids", std::move(ellipsoids)},
        {"background_hu", spec.background_hu},
        {"shell_hu", spec.shell_hu},
        {"shell_voxels", spec.shell_voxels},
        {"seed", spec.seed}};
    return doc.dump(2);
}

PhantomSpec phantom_spec_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("phantom spec: bad JSON: ") + e.what());
    }
    try {
        PhantomSpec spec;
        const auto& dims = doc.at("dims");
        spec.dims = {dims.at(0).get<std::uint32_t>(), dims.at(1).get<std::uint32_t>(),
                     dims.at(2).get<std::uint32_t>()};
        if (doc.contains("spacing")) {
            const auto& sp = doc["spacing"];
            spec.spacing = {sp.at(0).get<double>(), sp.at(1).get<double>(),
                            sp.at(2).get<double>()};
        }
        if (doc.contains("classes")) {
            const auto& cls = doc["classes"];
            spec.classes = ClassMap(cls.at("names").get<std::vector<std::string>>(),
                                    cls.at("background").get<std::uint8_t>());
        }
        for (const auto& je : doc.at("ellipsoids")) {
            Ellipsoid e;
            e.center = je.at("center").get<std::array<double, 3>>();
            e.semi_axes = je.at("semi_axes").get<std::array<double, 3>>();
            e.label = je.at("class").get<std::uint8_t>();
            if (je.contains("interior_hu")) e.interior_hu = je["interior_hu"].get<double>();
            spec.ellipsoids.push_back(e);
        }
        if (doc.contains("background_hu")) spec.background_hu = doc["background_hu"];
        if (doc.contains("shell_hu")) spec.shell_hu = doc["shell_hu"];
        if (doc.contains("shell_voxels")) spec.shell_voxels = doc["shell_voxels"];
        if (doc.contains("seed")) spec.seed = doc["seed"];
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("phantom spec: missing or bad field: ") + e.what());
    }
}

} // namespace axiseg
