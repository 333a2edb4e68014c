#include "axiseg/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "axiseg/errors.hpp"

namespace axiseg {

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::gt_count(std::uint32_t c) const {
    std::uint64_t sum = 0;
    for (std::uint32_t p = 0; p < class_count; ++p) sum += at(c, p);
    return sum;
}

std::uint64_t ConfusionMatrix::pred_count(std::uint32_t c) const {
    std::uint64_t sum = 0;
    for (std::uint32_t g = 0; g < class_count; ++g) sum += at(g, c);
    return sum;
}

ConfusionMatrix confusion(const LabelVolume& pred, const LabelVolume& gt) {
    if (!(pred.dims == gt.dims))
        throw UsageError("confusion: dims mismatch (" + to_string(pred.dims) + " vs " +
                         to_string(gt.dims) + ")");
    if (!(pred.classes == gt.classes))
        throw UsageError("confusion: class maps differ");

    ConfusionMatrix cm;
    cm.class_count = pred.classes.count();
    cm.counts.assign(static_cast<std::size_t>(cm.class_count) * cm.class_count, 0);
    const std::size_t n = gt.labels.size();
    for (std::size_t i = 0; i < n; ++i)
        ++cm.counts[static_cast<std::size_t>(gt.labels[i]) * cm.class_count +
                    pred.labels[i]];
    return cm;
}

namespace {

struct ClassTally {
    std::uint64_t tp, fp, fn;
};

ClassTally tally(const ConfusionMatrix& cm, std::uint32_t c) {
    if (c >= cm.class_count)
        throw UsageError("class index " + std::to_string(c) + " out of range");
    const std::uint64_t tp = cm.at(c, c);
    return {tp, cm.pred_count(c) - tp, cm.gt_count(c) - tp};
}

} // namespace

std::optional<double> iou(const ConfusionMatrix& cm, std::uint32_t c) {
    const ClassTally t = tally(cm, c);
    const std::uint64_t denom = t.tp + t.fp + t.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(t.tp) / static_cast<double>(denom);
}

std::optional<double> dice(const ConfusionMatrix& cm, std::uint32_t c) {
    const ClassTally t = tally(cm, c);
    const std::uint64_t denom = 2 * t.tp + t.fp + t.fn;
    if (denom == 0) return std::nullopt;
    return 2.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
}

double mean_iou(const ConfusionMatrix& cm, const ClassMap& classes) {
    if (classes.count() != cm.class_count)
        throw UsageError("mean_iou: class map does not match matrix");
    double sum = 0.0;
    std::uint32_t defined = 0;
    for (std::uint32_t c = 0; c < cm.class_count; ++c) {
        if (classes.is_background(c)) continue;
        if (const auto v = iou(cm, c)) {
            sum += *v;
            ++defined;
        }
    }
    if (defined == 0)
        throw UsageError("mean_iou: no non-background class present in either volume");
    return sum / defined;
}

EvalReport make_report(const ConfusionMatrix& cm, const ClassMap& classes) {
    EvalReport rep;
    rep.background_index = classes.background_index();
    rep.total_voxels = cm.total();

    for (std::uint32_t c = 0; c < cm.class_count; ++c) {
        ClassScore s;
        s.name = classes.name(c);
        s.iou = iou(cm, c);
        s.dice = dice(cm, c);
        s.gt_voxels = cm.gt_count(c);
        s.pred_voxels = cm.pred_count(c);
        rep.per_class.push_back(std::move(s));
    }

    rep.mean_iou = mean_iou(cm, classes);

    double wsum = 0.0;
    std::uint64_t weight = 0;
    for (std::uint32_t c = 0; c < cm.class_count; ++c) {
        if (classes.is_background(c)) continue;
        const auto v = iou(cm, c);
        if (!v) continue;
        wsum += *v * static_cast<double>(cm.gt_count(c));
        weight += cm.gt_count(c);
    }
    if (weight > 0) rep.mean_iou_weighted = wsum / static_cast<double>(weight);
    return rep;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& s : report.per_class) {
        nlohmann::json c = {{"name", s.name},
                            {"gt_voxels", s.gt_voxels},
                            {"pred_voxels", s.pred_voxels}};
        c["iou"] = s.iou ? nlohmann::json(*s.iou) : nlohmann::json();
        c["dice"] = s.dice ? nlohmann::json(*s.dice) : nlohmann::json();
        per_class.push_back(std::move(c));
    }
    nlohmann::json doc = {{"per_class", std::move(per_class)},
                          {"background_index", report.background_index},
                          {"mean_iou", report.mean_iou},
                          {"total_voxels", report.total_voxels}};
    doc["mean_iou_weighted"] = report.mean_iou_weighted
                                   ? nlohmann::json(*report.mean_iou_weighted)
                                   : nlohmann::json();
    return doc.dump(2);
}

std::string format_report_table(const EvalReport& report) {
    std::vector<const ClassScore*> chambers;
    for (std::size_t c = 0; c < report.per_class.size(); ++c)
        if (c != report.background_index) chambers.push_back(&report.per_class[c]);

    auto cell = [](std::optional<double> v) {
        char buf[16];
        if (!v) return std::string("   n/a");
        std::snprintf(buf, sizeof(buf), "%6.4f", *v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "          ";
    for (const auto* s : chambers) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %15s", s->name.c_str());
        os << buf;
    }
    os << "       mean\n";

    os << "  IoU     ";
    for (const auto* s : chambers) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %15s", cell(s->iou).c_str());
        os << buf;
    }
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %10.4f", report.mean_iou);
        os << buf << "\n";
    }

    os << "  Dice    ";
    for (const auto* s : chambers) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %15s", cell(s->dice).c_str());
        os << buf;
    }
    os << "\n";
    return os.str();
}

} // namespace axiseg
