#pragma once

#include <string>
#include <string_view>

#include "enrichbench/results.hpp"
#include "enrichbench/store.hpp"

namespace enrichbench {

struct RunMetadata {
    std::string config_digest;  // sha256 of the experiment config bytes
    std::string chat_provider_id;
    std::string chat_model_id;
    std::string embed_provider_id;
    std::string embed_model_id;
    store::Stats cache_stats;
    std::string started_at;
    std::string finished_at;
};

std::string metadata_to_json(const RunMetadata& meta);

struct ReportDocument {
    ResultTable table;
    RunMetadata metadata;
    std::string markdown;
    std::string csv;
};

// Markdown comparison table: columns [Model, datasets...]; rows are the
// prompt variants in first-appearance order, then "baseline", then
// reference rows, then "Improvement" when any dataset has one. Scores use
// two decimals; empty cells are "n/a", failed cells "failed".
std::string render_markdown(const ResultTable& table);

// Long-form CSV mirror, lossless:
//   kind,variant,dataset,metric,score,status,detail
// kind is "row", "reference" or "improvement". Improvement lines repeat the
// derived values and are ignored by parse_results_csv.
std::string render_csv(const ResultTable& table);
ResultTable parse_results_csv(std::string_view csv);

// Throws std::invalid_argument for an empty table.
ReportDocument render_report(const ResultTable& table, RunMetadata metadata = {});

}  // namespace enrichbench
