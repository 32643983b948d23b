#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "newsforge/corpus.hpp"
#include "newsforge/errors.hpp"

namespace newsforge {

/// 3x3 counts, rows = true class, cols = predicted class.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t row_sum(int c) const;
    std::int64_t col_sum(int c) const;
    std::int64_t total() const;
    std::int64_t trace() const;
};

ConfusionMatrix confusion(const std::vector<Label>& y_true, const std::vector<Label>& y_pred);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct Averages {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    std::array<ClassMetrics, kNumClasses> per_class{};
    double accuracy = 0.0;
    Averages macro;
    Averages weighted;
    std::int64_t total_support = 0;
    // Zero-division convention: the metric is reported as 0 and flagged here.
    std::array<bool, kNumClasses> precision_zero_division{};
    std::array<bool, kNumClasses> recall_zero_division{};
    std::array<bool, kNumClasses> f1_zero_division{};
};

/// precision_c = cm[c][c]/colsum_c, recall_c = cm[c][c]/rowsum_c,
/// f1_c = 2PR/(P+R), accuracy = trace/total; macro averages are unweighted
/// means, weighted averages use supports. Throws EmptyMatrix when total = 0.
ClassificationReport report(const ConfusionMatrix& cm);

/// Fixed-width table: class rows "0","1","2", columns
/// precision/recall/f1-score/support with metrics at exactly 2 decimals
/// (round half to even), then an accuracy row (f1 column only) and macro /
/// weighted average rows.
std::string format_report(const ClassificationReport& r);

/// Full-precision JSON rendering of the report, including the formatted
/// text block.
std::string report_to_json(const ClassificationReport& r);

/// Helper shared with the formatter: value rendered at 2 decimals with
/// round-half-to-even.
std::string format_2dp(double value);

} // namespace newsforge
