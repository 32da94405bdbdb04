#include "enrichbench/results.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

using nlohmann::ordered_json;

namespace enrichbench {

namespace {

constexpr std::string_view kSchema = "enrichbench.results/v1";

bool in_percent_range(double x) { return std::isfinite(x) && x >= 0.0 && x <= 100.0; }

}  // namespace

double round2(double x) {
    const double scaled = x * 100.0;
    const double slack = 1e-9 * std::max(1.0, std::abs(scaled));
    const double r = std::floor(scaled + 0.5 + slack) / 100.0;
    return r == 0.0 ? 0.0 : r;
}

double improvement(double best, double baseline) {
    if (!in_percent_range(best) || !in_percent_range(baseline)) {
        throw std::invalid_argument("improvement inputs must lie in [0, 100]");
    }
    return round2(best - baseline);
}

std::string format2(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round2(x));
    return buf;
}

void ResultTable::add_row(ResultRow row) {
    if (row.variant_id.empty() || row.dataset.empty()) {
        throw std::invalid_argument("result rows need a variant and a dataset");
    }
    if (row.metric != kMetricAccuracy && row.metric != kMetricCosineAp) {
        throw std::invalid_argument("unknown metric " + row.metric);
    }
    if (row.score && !in_percent_range(*row.score)) {
        throw std::invalid_argument("score out of [0, 100] for " + row.variant_id + "/" + row.dataset);
    }
    if (!row.score && row.error.empty()) throw std::invalid_argument("failed rows need an error message");
    if (row.score) row.error.clear();
    if (find(row.variant_id, row.dataset)) {
        throw std::invalid_argument("duplicate row " + row.variant_id + "/" + row.dataset);
    }
    if (auto metric = metric_of(row.dataset); metric && *metric != row.metric) {
        throw std::invalid_argument("dataset " + row.dataset + " mixes metrics");
    }
    rows_.push_back(std::move(row));
}

void ResultTable::add_reference(ReferenceRow ref) {
    if (ref.label.empty()) throw std::invalid_argument("reference rows need a label");
    for (const auto& [dataset, score] : ref.scores) {
        if (!in_percent_range(score)) throw std::invalid_argument("reference score out of range for " + dataset);
    }
    references_.push_back(std::move(ref));
}

std::vector<std::string> ResultTable::datasets() const {
    std::vector<std::string> out;
    for (const auto& r : rows_) {
        if (std::find(out.begin(), out.end(), r.dataset) == out.end()) out.push_back(r.dataset);
    }
    return out;
}

std::vector<std::string> ResultTable::variants() const {
    std::vector<std::string> out;
    for (const auto& r : rows_) {
        if (std::find(out.begin(), out.end(), r.variant_id) == out.end()) out.push_back(r.variant_id);
    }
    return out;
}

const ResultRow* ResultTable::find(std::string_view variant, std::string_view dataset) const {
    for (const auto& r : rows_) {
        if (r.variant_id == variant && r.dataset == dataset) return &r;
    }
    return nullptr;
}

std::optional<std::string> ResultTable::metric_of(std::string_view dataset) const {
    for (const auto& r : rows_) {
        if (r.dataset == dataset) return r.metric;
    }
    return std::nullopt;
}

std::vector<DatasetImprovement> ResultTable::improvements() const {
    std::vector<DatasetImprovement> out;
    for (const auto& dataset : datasets()) {
        const auto* base = find(kBaselineVariant, dataset);
        if (base == nullptr || !base->ok()) continue;
        const ResultRow* best = nullptr;
        for (const auto& r : rows_) {
            if (r.dataset != dataset || r.variant_id == kBaselineVariant || !r.ok()) continue;
            if (best == nullptr || *r.score > *best->score) best = &r;
        }
        if (best == nullptr) continue;
        out.push_back({dataset, base->metric, best->variant_id, *best->score, *base->score,
                       improvement(*best->score, *base->score)});
    }
    return out;
}

bool ResultTable::complete() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const ResultRow& r) { return r.ok(); });
}

std::string results_to_json(const ResultTable& table) {
    ordered_json j;
    j["schema"] = kSchema;
    j["datasets"] = ordered_json::array();
    for (const auto& d : table.datasets()) {
        j["datasets"].push_back({{"name", d}, {"metric", *table.metric_of(d)}});
    }
    j["rows"] = ordered_json::array();
    for (const auto& r : table.rows()) {
        ordered_json row;
        row["variant"] = r.variant_id;
        row["dataset"] = r.dataset;
        row["metric"] = r.metric;
        if (r.ok()) {
            row["status"] = "ok";
            row["score"] = *r.score;
        } else {
            row["status"] = "failed";
            row["error"] = r.error;
        }
        j["rows"].push_back(std::move(row));
    }
    j["references"] = ordered_json::array();
    for (const auto& ref : table.references()) {
        ordered_json scores = ordered_json::object();
        for (const auto& [d, s] : ref.scores) scores[d] = s;
        j["references"].push_back({{"label", ref.label}, {"scores", std::move(scores)}});
    }
    j["improvements"] = ordered_json::array();
    for (const auto& imp : table.improvements()) {
        j["improvements"].push_back({{"dataset", imp.dataset},
                                     {"metric", imp.metric},
                                     {"best_variant", imp.best_variant},
                                     {"best_score", imp.best_score},
                                     {"baseline_score", imp.baseline_score},
                                     {"improvement", imp.delta}});
    }
    return j.dump(2) + "\n";
}

ResultTable results_from_json(std::string_view json_text) {
    ResultTable table;
    try {
        const auto j = ordered_json::parse(json_text);
        if (j.at("schema").get<std::string>() != kSchema) {
            throw std::invalid_argument("unsupported results schema");
        }
        for (const auto& row : j.at("rows")) {
            ResultRow r;
            r.variant_id = row.at("variant").get<std::string>();
            r.dataset = row.at("dataset").get<std::string>();
            r.metric = row.at("metric").get<std::string>();
            if (row.at("status").get<std::string>() == "ok") {
                r.score = row.at("score").get<double>();
            } else {
                r.error = row.at("error").get<std::string>();
            }
            table.add_row(std::move(r));
        }
        for (const auto& ref : j.value("references", ordered_json::array())) {
            ReferenceRow rr;
            rr.label = ref.at("label").get<std::string>();
            for (const auto& [d, s] : ref.at("scores").items()) rr.scores[d] = s.get<double>();
            table.add_reference(std::move(rr));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed results JSON: ") + e.what());
    }
    return table;
}

}  // namespace enrichbench
