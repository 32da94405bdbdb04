#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace enrichbench {

inline constexpr std::string_view kBaselineVariant = "baseline";
inline constexpr std::string_view kMetricAccuracy = "accuracy";
inline constexpr std::string_view kMetricCosineAp = "cosine_ap";

// best - baseline rounded half-up to 2 decimals. Both inputs must lie in
// [0, 100] (std::invalid_argument otherwise).
double improvement(double best, double baseline);

// Half-up rounding to 2 decimals, tolerant of binary representation error
// (8.210000000000008 -> 8.21). Never returns -0.0.
double round2(double x);

// Fixed two-decimal rendering used by every report format.
std::string format2(double x);

struct ResultRow {
    std::string variant_id;  // prompt id or "baseline"
    std::string dataset;
    std::string metric;            // "accuracy" or "cosine_ap"
    std::optional<double> score;   // in [0, 100]; empty when the cell failed
    std::string error;             // set iff score is empty

    bool ok() const noexcept { return score.has_value(); }
    bool operator==(const ResultRow&) const = default;
};

// Published scores of an external model, shown for comparison only.
struct ReferenceRow {
    std::string label;
    std::map<std::string, double> scores;  // dataset -> score

    bool operator==(const ReferenceRow&) const = default;
};

struct DatasetImprovement {
    std::string dataset;
    std::string metric;
    std::string best_variant;
    double best_score = 0.0;
    double baseline_score = 0.0;
    double delta = 0.0;  // improvement(best_score, baseline_score)
};

// Scores per (variant, dataset). Improvements are derived, never stored:
// defined for a dataset when it has a successful baseline row and at least
// one successful prompt-variant row. The best variant is the highest score,
// earliest row on ties.
class ResultTable {
public:
    // Throws std::invalid_argument on a duplicate (variant, dataset), an
    // unknown metric, a score outside [0, 100], a metric that disagrees with
    // the dataset's earlier rows, or a failed row without an error message.
    void add_row(ResultRow row);
    void add_reference(ReferenceRow ref);

    const std::vector<ResultRow>& rows() const noexcept { return rows_; }
    const std::vector<ReferenceRow>& references() const noexcept { return references_; }

    std::vector<std::string> datasets() const;  // first-appearance order
    std::vector<std::string> variants() const;  // first-appearance order
    const ResultRow* find(std::string_view variant, std::string_view dataset) const;
    std::optional<std::string> metric_of(std::string_view dataset) const;

    std::vector<DatasetImprovement> improvements() const;
    bool complete() const;  // every row ok
    bool empty() const noexcept { return rows_.empty(); }

    bool operator==(const ResultTable&) const = default;

private:
    std::vector<ResultRow> rows_;
    std::vector<ReferenceRow> references_;
};

// JSON document described in docs/results-schema.md.
std::string results_to_json(const ResultTable& table);
ResultTable results_from_json(std::string_view json_text);

}  // namespace enrichbench
