#include "segforge/metrics.hpp"

#include <array>
#include <cstdio>
#include <sstream>

#include "segforge/error.hpp"

namespace segforge {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
    if (num_classes < 1) throw ConfigError("ConfusionMatrix: num_classes must be >= 1");
    counts_.assign(static_cast<size_t>(num_classes) * num_classes, 0);
}

uint64_t ConfusionMatrix::at(int truth, int pred) const {
    return counts_[static_cast<size_t>(truth) * num_classes_ + pred];
}

uint64_t& ConfusionMatrix::at(int truth, int pred) {
    return counts_[static_cast<size_t>(truth) * num_classes_ + pred];
}

void ConfusionMatrix::accumulate(const ClassMask& truth, const ClassMask& pred) {
    if (truth.height != pred.height || truth.width != pred.width) {
        throw ShapeError("ConfusionMatrix::accumulate: mask dimensions differ");
    }
    for (size_t i = 0; i < truth.values.size(); ++i) {
        const uint8_t t = truth.values[i];
        const uint8_t p = pred.values[i];
        if (t >= num_classes_ || p >= num_classes_) {
            throw MaskRangeError("ConfusionMatrix::accumulate: class index out of range");
        }
        counts_[static_cast<size_t>(t) * num_classes_ + p]++;
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_) {
        throw ShapeError("ConfusionMatrix::merge: class counts differ");
    }
    for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (uint64_t c : counts_) t += c;
    return t;
}

namespace {
struct ClassTallies {
    uint64_t tp, fp, fn;
};

ClassTallies tallies(const ConfusionMatrix& cm, int c) {
    ClassTallies t{cm.at(c, c), 0, 0};
    for (int o = 0; o < cm.num_classes(); ++o) {
        if (o == c) continue;
        t.fp += cm.at(o, c);
        t.fn += cm.at(c, o);
    }
    return t;
}
} // namespace

std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm) {
    std::vector<std::optional<double>> out(static_cast<size_t>(cm.num_classes()));
    for (int c = 0; c < cm.num_classes(); ++c) {
        const ClassTallies t = tallies(cm, c);
        const uint64_t denom = t.tp + t.fp + t.fn;
        if (denom > 0) out[static_cast<size_t>(c)] = static_cast<double>(t.tp) / static_cast<double>(denom);
    }
    return out;
}

std::vector<std::optional<double>> per_class_dice(const ConfusionMatrix& cm) {
    std::vector<std::optional<double>> out(static_cast<size_t>(cm.num_classes()));
    for (int c = 0; c < cm.num_classes(); ++c) {
        const ClassTallies t = tallies(cm, c);
        const uint64_t denom = 2 * t.tp + t.fp + t.fn;
        if (denom > 0) out[static_cast<size_t>(c)] = static_cast<double>(2 * t.tp) / static_cast<double>(denom);
    }
    return out;
}

double mean_foreground(const std::vector<std::optional<double>>& values) {
    double sum = 0.0;
    int64_t n = 0;
    for (size_t c = 1; c < values.size(); ++c) {
        if (values[c].has_value()) {
            sum += *values[c];
            ++n;
        }
    }
    if (n == 0) throw NumericError("mean_foreground: no defined foreground classes");
    return sum / static_cast<double>(n);
}

std::vector<std::string> report_class_names(int num_classes) {
    // iSAID Table-I abbreviations, classes 1..15 in benchmark order.
    static const std::array<const char*, 15> isaid = {
        "PL", "BD", "BR", "GTF", "SV", "LV", "SH", "TC",
        "BC", "ST", "SBF", "RA", "HA", "SP", "HC"};
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(num_classes > 0 ? num_classes - 1 : 0));
    if (num_classes == 16) {
        for (const char* n : isaid) names.emplace_back(n);
    } else {
        for (int c = 1; c < num_classes; ++c) names.push_back("class" + std::to_string(c));
    }
    return names;
}

namespace {
std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string fraction_cell(const std::optional<double>& v) {
    return v.has_value() ? fmt("%.6f", *v) : std::string();
}

std::string percent_cell(const std::optional<double>& v) {
    return v.has_value() ? fmt("%.1f", *v * 100.0) : std::string("n/a");
}

std::optional<double> try_mean_foreground(const std::vector<std::optional<double>>& values) {
    for (size_t c = 1; c < values.size(); ++c) {
        if (values[c].has_value()) return mean_foreground(values);
    }
    return std::nullopt;
}

std::string human_params(int64_t p) {
    if (p >= 1000000) return fmt("%.1fM", static_cast<double>(p) / 1e6);
    return std::to_string(p);
}

std::string human_flops(int64_t f) {
    if (f >= 1000000000) return fmt("%.2f G", static_cast<double>(f) / 1e9);
    if (f >= 1000000) return fmt("%.2f M", static_cast<double>(f) / 1e6);
    return std::to_string(f);
}

void append_row(std::ostringstream& os, const std::vector<std::string>& cells, size_t width) {
    for (size_t i = 0; i < cells.size(); ++i) {
        std::string c = cells[i];
        if (c.size() < width) c.append(width - c.size(), ' ');
        os << c << (i + 1 < cells.size() ? " " : "");
    }
    os << "\n";
}
} // namespace

Report render_report(const std::vector<std::optional<double>>& iou,
                     const std::vector<std::optional<double>>& dice,
                     const ReportMetadata& meta) {
    const int c = meta.num_classes;
    if (static_cast<int>(iou.size()) != c || static_cast<int>(dice.size()) != c) {
        throw ShapeError("render_report: per-class arrays must have num_classes entries");
    }
    const std::vector<std::string> names = report_class_names(c);
    const std::optional<double> miou = try_mean_foreground(iou);
    const std::optional<double> mdice = try_mean_foreground(dice);

    std::ostringstream csv;
    csv << "class,iou,dice\n";
    for (int k = 1; k < c; ++k) {
        csv << names[static_cast<size_t>(k - 1)] << "," << fraction_cell(iou[static_cast<size_t>(k)])
            << "," << fraction_cell(dice[static_cast<size_t>(k)]) << "\n";
    }
    csv << "miou," << fraction_cell(miou) << ",\n";
    csv << "mdice,," << fraction_cell(mdice) << "\n";

    std::ostringstream text;
    text << "Model Name: " << meta.model_name << "\n";
    if (meta.params) text << "# of Parameters: " << human_params(*meta.params) << "\n";
    if (meta.flops) text << "FLOPS: " << human_flops(*meta.flops) << "\n";
    if (meta.inference_seconds) text << "Inference Time: " << fmt("%.2fs", *meta.inference_seconds) << "\n";
    text << "mIoU: " << percent_cell(miou) << "  mDice: " << percent_cell(mdice) << "\n";
    const size_t col = 6;
    text << "IoU per Category in %\n";
    append_row(text, names, col);
    std::vector<std::string> row;
    for (int k = 1; k < c; ++k) row.push_back(percent_cell(iou[static_cast<size_t>(k)]));
    append_row(text, row, col);
    text << "Dice per Category in %\n";
    append_row(text, names, col);
    row.clear();
    for (int k = 1; k < c; ++k) row.push_back(percent_cell(dice[static_cast<size_t>(k)]));
    append_row(text, row, col);

    return Report{csv.str(), text.str()};
}

} // namespace segforge
