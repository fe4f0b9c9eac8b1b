#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "segforge/image.hpp"

namespace segforge {

/// C x C pixel counts, counts(t, p) = pixels with truth class t predicted as
/// class p. Accumulation is additive, so per-worker matrices merge exactly.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void accumulate(const ClassMask& truth, const ClassMask& pred);
    void merge(const ConfusionMatrix& other);

    uint64_t at(int truth, int pred) const;
    uint64_t& at(int truth, int pred);
    uint64_t total() const;
    int num_classes() const { return num_classes_; }

private:
    int num_classes_;
    std::vector<uint64_t> counts_; // truth-major
};

/// IoU_c = TP/(TP+FP+FN); nullopt when the class appears in neither truth nor
/// prediction (excluded from means).
std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm);

/// Dice_c = 2TP/(2TP+FP+FN); same undefined rule as per_class_iou.
std::vector<std::optional<double>> per_class_dice(const ConfusionMatrix& cm);

/// Arithmetic mean over defined entries with class index >= 1; the background
/// class never participates. Throws NumericError when no foreground entry is
/// defined.
double mean_foreground(const std::vector<std::optional<double>>& values);

/// Foreground class names used in reports: the 15 iSAID category
/// abbreviations when num_classes == 16, otherwise class1..class{C-1}.
std::vector<std::string> report_class_names(int num_classes);

struct ReportMetadata {
    int num_classes = 0;
    std::string model_name = "UNet CNN";
    std::optional<int64_t> params;
    std::optional<int64_t> flops;
    std::optional<double> inference_seconds; // per batch, see measure_inference
};

struct Report {
    std::string csv;  // header class,iou,dice; then miou,<v>, and mdice,,<v>
    std::string text; // aligned table, percentages with one decimal
};

Report render_report(const std::vector<std::optional<double>>& iou,
                     const std::vector<std::optional<double>>& dice,
                     const ReportMetadata& meta);

} // namespace segforge
