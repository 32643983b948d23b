#include "newsforge/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace newsforge {

std::int64_t ConfusionMatrix::row_sum(int c) const {
    std::int64_t s = 0;
    for (int p = 0; p < kNumClasses; ++p) s += counts[c][p];
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int c) const {
    std::int64_t s = 0;
    for (int t = 0; t < kNumClasses; ++t) s += counts[t][c];
    return s;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (int t = 0; t < kNumClasses; ++t) s += row_sum(t);
    return s;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t s = 0;
    for (int c = 0; c < kNumClasses; ++c) s += counts[c][c];
    return s;
}

ConfusionMatrix confusion(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw LengthMismatchError(std::to_string(y_true.size()) + " true labels vs " +
                                  std::to_string(y_pred.size()) + " predictions");
    }
    if (y_true.empty()) throw LengthMismatchError("need at least one label pair");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = static_cast<int>(y_true[i]);
        const int p = static_cast<int>(y_pred[i]);
        if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses) {
            throw BadLabelError("label codes must lie in {0,1,2}, got true=" +
                                std::to_string(t) + " pred=" + std::to_string(p));
        }
        ++cm.counts[t][p];
    }
    return cm;
}

ClassificationReport report(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total < 1) throw EmptyMatrixError("confusion matrix has no observations");

    ClassificationReport r;
    r.total_support = total;
    r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

    for (int c = 0; c < kNumClasses; ++c) {
        const std::int64_t tp = cm.counts[c][c];
        const std::int64_t col = cm.col_sum(c);
        const std::int64_t row = cm.row_sum(c);
        ClassMetrics& m = r.per_class[c];
        m.support = row;
        if (col == 0) {
            r.precision_zero_division[c] = true;
        } else {
            m.precision = static_cast<double>(tp) / static_cast<double>(col);
        }
        if (row == 0) {
            r.recall_zero_division[c] = true;
        } else {
            m.recall = static_cast<double>(tp) / static_cast<double>(row);
        }
        if (m.precision + m.recall == 0.0) {
            r.f1_zero_division[c] = true;
        } else {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        }
        r.macro.precision += m.precision / kNumClasses;
        r.macro.recall += m.recall / kNumClasses;
        r.macro.f1 += m.f1 / kNumClasses;
        const double w = static_cast<double>(row) / static_cast<double>(total);
        r.weighted.precision += w * m.precision;
        r.weighted.recall += w * m.recall;
        r.weighted.f1 += w * m.f1;
    }
    return r;
}

std::string format_2dp(double value) {
    const double scaled = std::nearbyint(value * 100.0);  // ties to even
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", scaled / 100.0);
    return buf;
}

namespace {

std::string rjust(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

constexpr std::size_t kNameWidth = 12;
constexpr std::size_t kColWidth = 10;

std::string metric_row(const std::string& name, const std::string& a, const std::string& b,
                       const std::string& c, std::int64_t support) {
    return rjust(name, kNameWidth) + rjust(a, kColWidth) + rjust(b, kColWidth) +
           rjust(c, kColWidth) + rjust(std::to_string(support), kColWidth) + "\n";
}

} // namespace

std::string format_report(const ClassificationReport& r) {
    std::string out;
    out += rjust("", kNameWidth) + rjust("precision", kColWidth) + rjust("recall", kColWidth) +
           rjust("f1-score", kColWidth) + rjust("support", kColWidth) + "\n\n";
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = r.per_class[c];
        out += metric_row(std::to_string(c), format_2dp(m.precision), format_2dp(m.recall),
                          format_2dp(m.f1), m.support);
    }
    out += "\n";
    out += rjust("accuracy", kNameWidth) + std::string(2 * kColWidth, ' ') +
           rjust(format_2dp(r.accuracy), kColWidth) +
           rjust(std::to_string(r.total_support), kColWidth) + "\n";
    out += metric_row("macro avg", format_2dp(r.macro.precision), format_2dp(r.macro.recall),
                      format_2dp(r.macro.f1), r.total_support);
    out += metric_row("weighted avg", format_2dp(r.weighted.precision),
                      format_2dp(r.weighted.recall), format_2dp(r.weighted.f1), r.total_support);
    return out;
}

std::string report_to_json(const ClassificationReport& r) {
    nlohmann::json j;
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = r.per_class[c];
        j["classes"].push_back({{"label", c},
                                {"precision", m.precision},
                                {"recall", m.recall},
                                {"f1", m.f1},
                                {"support", m.support}});
    }
    j["accuracy"] = r.accuracy;
    j["macro"] = {{"precision", r.macro.precision},
                  {"recall", r.macro.recall},
                  {"f1", r.macro.f1}};
    j["weighted"] = {{"precision", r.weighted.precision},
                     {"recall", r.weighted.recall},
                     {"f1", r.weighted.f1}};
    j["total_support"] = r.total_support;
    j["zero_division"] = {{"precision", r.precision_zero_division},
                          {"recall", r.recall_zero_division},
                          {"f1", r.f1_zero_division}};
    j["text"] = format_report(r);
    return j.dump(2);
}

} // namespace newsforge
