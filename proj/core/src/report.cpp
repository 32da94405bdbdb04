#include "enrichbench/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace enrichbench {

namespace {

std::string shortest(double x) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("cannot format double");
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw std::invalid_argument("bad number in CSV: " + std::string(s));
    }
    return v;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quote in CSV");
    if (any || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out.push_back(' ');
        else out.push_back(c);
    }
    return out;
}

void md_line(std::ostringstream& out, const std::vector<std::string>& cells) {
    out << '|';
    for (const auto& c : cells) out << ' ' << md_cell(c) << " |";
    out << '\n';
}

}  // namespace

std::string metadata_to_json(const RunMetadata& meta) {
    nlohmann::ordered_json j;
    j["config_digest"] = meta.config_digest;
    j["chat_provider_id"] = meta.chat_provider_id;
    j["chat_model_id"] = meta.chat_model_id;
    j["embed_provider_id"] = meta.embed_provider_id;
    j["embed_model_id"] = meta.embed_model_id;
    j["cache_stats"] = {{"entries", meta.cache_stats.entries},
                        {"bytes", meta.cache_stats.bytes},
                        {"hit_count", meta.cache_stats.hit_count},
                        {"miss_count", meta.cache_stats.miss_count}};
    j["started_at"] = meta.started_at;
    j["finished_at"] = meta.finished_at;
    return j.dump(2) + "\n";
}

std::string render_markdown(const ResultTable& table) {
    const auto datasets = table.datasets();
    std::ostringstream out;

    std::vector<std::string> header{"Model"};
    header.insert(header.end(), datasets.begin(), datasets.end());
    md_line(out, header);
    md_line(out, std::vector<std::string>(header.size(), "---"));

    const auto variant_line = [&](const std::string& variant) {
        std::vector<std::string> cells{variant};
        for (const auto& d : datasets) {
            const auto* r = table.find(variant, d);
            cells.push_back(r == nullptr ? "n/a" : r->ok() ? format2(*r->score) : "failed");
        }
        md_line(out, cells);
    };
    auto variants = table.variants();
    std::stable_partition(variants.begin(), variants.end(),
                          [](const std::string& v) { return v != kBaselineVariant; });
    for (const auto& v : variants) variant_line(v);

    for (const auto& ref : table.references()) {
        std::vector<std::string> cells{ref.label};
        for (const auto& d : datasets) {
            auto it = ref.scores.find(d);
            cells.push_back(it == ref.scores.end() ? "n/a" : format2(it->second));
        }
        md_line(out, cells);
    }

    const auto improvements = table.improvements();
    if (!improvements.empty()) {
        std::vector<std::string> cells{"Improvement"};
        for (const auto& d : datasets) {
            auto it = std::find_if(improvements.begin(), improvements.end(),
                                   [&](const DatasetImprovement& i) { return i.dataset == d; });
            cells.push_back(it == improvements.end() ? "n/a" : format2(it->delta));
        }
        md_line(out, cells);
    }
    return out.str();
}

std::string render_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "kind,variant,dataset,metric,score,status,detail\n";
    for (const auto& r : table.rows()) {
        out << "row," << csv_field(r.variant_id) << ',' << csv_field(r.dataset) << ',' << r.metric << ','
            << (r.ok() ? shortest(*r.score) : "") << ',' << (r.ok() ? "ok" : "failed") << ','
            << csv_field(r.error) << '\n';
    }
    for (const auto& ref : table.references()) {
        for (const auto& [d, s] : ref.scores) {
            out << "reference," << csv_field(ref.label) << ',' << csv_field(d) << ",," << shortest(s) << ",ok,\n";
        }
    }
    for (const auto& imp : table.improvements()) {
        out << "improvement," << csv_field(imp.best_variant) << ',' << csv_field(imp.dataset) << ','
            << imp.metric << ',' << format2(imp.delta) << ",ok,"
            << csv_field("best=" + shortest(imp.best_score) + ";baseline=" + shortest(imp.baseline_score))
            << '\n';
    }
    return out.str();
}

ResultTable parse_results_csv(std::string_view csv) {
    auto records = parse_csv_records(csv);
    if (records.empty() || records.front() != std::vector<std::string>{"kind", "variant", "dataset", "metric",
                                                                        "score", "status", "detail"}) {
        throw std::invalid_argument("CSV header mismatch");
    }
    ResultTable table;
    std::vector<ReferenceRow> refs;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != 7) throw std::invalid_argument("CSV line " + std::to_string(i + 1) + " has wrong arity");
        if (rec[0] == "row") {
            ResultRow r{rec[1], rec[2], rec[3], std::nullopt, rec[6]};
            if (rec[5] == "ok") r.score = parse_double(rec[4]);
            table.add_row(std::move(r));
        } else if (rec[0] == "reference") {
            auto it = std::find_if(refs.begin(), refs.end(), [&](const ReferenceRow& r) { return r.label == rec[1]; });
            if (it == refs.end()) {
                refs.push_back({rec[1], {}});
                it = std::prev(refs.end());
            }
            it->scores[rec[2]] = parse_double(rec[4]);
        } else if (rec[0] != "improvement") {
            throw std::invalid_argument("unknown CSV row kind " + rec[0]);
        }
    }
    for (auto& r : refs) table.add_reference(std::move(r));
    return table;
}

ReportDocument render_report(const ResultTable& table, RunMetadata metadata) {
    if (table.empty()) throw std::invalid_argument("cannot render an empty result table");
    return ReportDocument{table, std::move(metadata), render_markdown(table), render_csv(table)};
}

}  // namespace enrichbench
