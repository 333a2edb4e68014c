#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "axiseg/volume.hpp"

namespace axiseg {

// counts[g][p] = voxels whose ground truth is g and prediction is p.
struct ConfusionMatrix {
    std::uint32_t class_count = 0;
    std::vector<std::uint64_t> counts; // row-major g*C + p

    std::uint64_t at(std::uint32_t gt, std::uint32_t pred) const {
        return counts[static_cast<std::size_t>(gt) * class_count + pred];
    }
    std::uint64_t& at(std::uint32_t gt, std::uint32_t pred) {
        return counts[static_cast<std::size_t>(gt) * class_count + pred];
    }
    std::uint64_t total() const;
    std::uint64_t gt_count(std::uint32_t c) const;   // row sum
    std::uint64_t pred_count(std::uint32_t c) const; // column sum
};

ConfusionMatrix confusion(const LabelVolume& pred, const LabelVolume& gt);

// TP/(TP+FP+FN); empty when the class appears in neither volume.
std::optional<double> iou(const ConfusionMatrix& cm, std::uint32_t c);
// 2TP/(2TP+FP+FN); same undefined rule.
std::optional<double> dice(const ConfusionMatrix& cm, std::uint32_t c);

// Unweighted mean of the defined non-background IoUs. Throws UsageError when
// every non-background class is undefined.
double mean_iou(const ConfusionMatrix& cm, const ClassMap& classes);

struct ClassScore {
    std::string name;
    std::optional<double> iou;
    std::optional<double> dice;
    std::uint64_t gt_voxels = 0;
    std::uint64_t pred_voxels = 0;
};

struct EvalReport {
    std::vector<ClassScore> per_class;
    std::uint8_t background_index = 0;
    // Unweighted mean over defined non-background classes, and the same mean
    // weighted by ground-truth voxel frequency. Both conventions are listed
    // because "one number" summaries differ between them.
    double mean_iou = 0.0;
    std::optional<double> mean_iou_weighted;
    std::uint64_t total_voxels = 0;
};

EvalReport make_report(const ConfusionMatrix& cm, const ClassMap& classes);

std::string report_to_json(const EvalReport& report);

// Chamber-per-column table with a closing mean column.
std::string format_report_table(const EvalReport& report);

} // namespace axiseg
