#include "enrichbench/datasets.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "enrichbench/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace enrichbench::datasets {

namespace {

template <typename OnRow>
void for_each_jsonl_object(const fs::path& path, OnRow&& on_row) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json row = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (row.is_discarded()) throw ParseError(line_no, "invalid JSON");
        if (!row.is_object()) throw SchemaError(line_no, "expected a JSON object");
        on_row(row, line_no);
    }
}

std::string string_field(const json& row, const char* field, std::size_t line_no) {
    if (!row.contains(field)) throw SchemaError(line_no, std::string("missing field \"") + field + "\"");
    const auto& v = row.at(field);
    if (!v.is_string()) throw SchemaError(line_no, std::string("field \"") + field + "\" must be a string");
    return v.get<std::string>();
}

std::string id_field(const json& row, std::size_t line_no) {
    if (!row.contains("id")) throw SchemaError(line_no, "missing field \"id\"");
    const auto& v = row.at("id");
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw SchemaError(line_no, "field \"id\" must be a string or integer");
}

std::string label_field(const json& row, std::size_t line_no) {
    if (!row.contains("label")) throw SchemaError(line_no, "missing field \"label\"");
    const auto& v = row.at("label");
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw SchemaError(line_no, "field \"label\" must be a string or integer");
}

std::string default_name(const fs::path& path, std::string name) {
    return name.empty() ? path.stem().string() : name;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError("short write to " + path.string());
}

// Word lists for the synthetic pair generator.
constexpr std::array<std::string_view, 48> kSubjects = {
    "customer", "agent",    "bank",     "card",     "account",  "payment",  "transfer", "refund",
    "merchant", "app",      "branch",   "manager",  "loan",     "deposit",  "balance",  "statement",
    "teacher",  "student",  "library",  "museum",   "garden",   "kitchen",  "train",    "airport",
    "doctor",   "nurse",    "hospital", "pharmacy", "river",    "mountain", "forest",   "village",
    "engineer", "server",   "database", "network",  "printer",  "laptop",   "router",   "keyboard",
    "artist",   "painting", "concert",  "guitar",   "stadium",  "coach",    "player",   "referee"};
constexpr std::array<std::string_view, 40> kVerbs = {
    "approved",  "declined", "delayed",  "reported", "cancelled", "updated",  "reviewed", "opened",
    "closed",    "blocked",  "visited",  "painted",  "repaired",  "borrowed", "returned", "ordered",
    "replaced",  "checked",  "moved",    "cleaned",  "followed",  "crossed",  "watched",  "trained",
    "inspected", "signed",   "posted",   "printed",  "restarted", "shipped",  "charged",  "verified",
    "praised",   "ignored",  "booked",   "missed",   "scheduled", "tested",   "joined",   "left"};
constexpr std::array<std::string_view, 36> kModifiers = {
    "yesterday", "today",   "again",    "quickly", "slowly",   "twice",    "early",     "late",
    "online",    "abroad",  "downtown", "overnight", "suddenly", "finally", "recently", "carefully",
    "loudly",    "quietly", "gladly",   "barely",  "nearly",   "fully",    "partly",    "openly",
    "monday",    "tuesday", "friday",   "weekend", "morning",  "evening",  "tonight",   "noon",
    "north",     "south",   "east",     "west"};

struct Rng {
    std::uint64_t state;
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    template <std::size_t N>
    std::string_view pick(const std::array<std::string_view, N>& words) {
        return words[next() % N];
    }
};

std::vector<std::string_view> sentence(Rng& rng) {
    return {"the", rng.pick(kSubjects), rng.pick(kVerbs), "the", rng.pick(kSubjects),
            rng.pick(kModifiers), rng.pick(kModifiers)};
}

std::string join(const std::vector<std::string_view>& words) {
    std::string out;
    for (auto w : words) {
        if (!out.empty()) out.push_back(' ');
        out.append(w);
    }
    return out;
}

}  // namespace

ClassificationDataset load_classification(const fs::path& path, std::string name) {
    ClassificationDataset ds;
    ds.name = default_name(path, std::move(name));
    std::unordered_set<std::string> train_ids;
    std::unordered_set<std::string> test_ids;
    std::set<std::string> labels;
    for_each_jsonl_object(path, [&](const json& row, std::size_t line_no) {
        LabeledText item{id_field(row, line_no), string_field(row, "text", line_no), label_field(row, line_no)};
        const auto split = string_field(row, "split", line_no);
        auto* ids = split == "train" ? &train_ids : split == "test" ? &test_ids : nullptr;
        if (ids == nullptr) throw SchemaError(line_no, "split must be \"train\" or \"test\", got \"" + split + "\"");
        if (!ids->insert(item.doc_id).second) {
            throw SchemaError(line_no, "duplicate id \"" + item.doc_id + "\" in " + split + " split");
        }
        labels.insert(item.label);
        (split == "train" ? ds.train : ds.test).push_back(std::move(item));
    });
    if (ds.train.empty()) throw EmptySplit("dataset " + ds.name + " has no train rows");
    if (ds.test.empty()) throw EmptySplit("dataset " + ds.name + " has no test rows");
    ds.label_set.assign(labels.begin(), labels.end());
    return ds;
}

PairDataset load_pairs(const fs::path& path, std::string name) {
    PairDataset ds;
    ds.name = default_name(path, std::move(name));
    std::unordered_set<std::string> ids;
    for_each_jsonl_object(path, [&](const json& row, std::size_t line_no) {
        TextPair pair{id_field(row, line_no), string_field(row, "text_a", line_no),
                      string_field(row, "text_b", line_no), 0};
        if (!row.contains("label")) throw SchemaError(line_no, "missing field \"label\"");
        const auto& label = row.at("label");
        if (!label.is_number_integer() || (label.get<long long>() != 0 && label.get<long long>() != 1)) {
            throw SchemaError(line_no, "label must be 0 or 1");
        }
        pair.gold = label.get<int>();
        if (!ids.insert(pair.pair_id).second) throw SchemaError(line_no, "duplicate id \"" + pair.pair_id + "\"");
        ds.pairs.push_back(std::move(pair));
    });
    const auto positives = std::count_if(ds.pairs.begin(), ds.pairs.end(), [](const TextPair& p) { return p.gold == 1; });
    if (positives == 0 || positives == static_cast<long>(ds.pairs.size())) {
        throw DegenerateLabels("pair dataset " + ds.name + " needs both positive and negative pairs");
    }
    return ds;
}

void write_classification(const ClassificationDataset& ds, const fs::path& path) {
    std::vector<std::string> lines;
    for (const auto* split : {&ds.train, &ds.test}) {
        const char* split_name = split == &ds.train ? "train" : "test";
        for (const auto& item : *split) {
            ordered_json j;
            j["id"] = item.doc_id;
            j["text"] = item.text;
            j["label"] = item.label;
            j["split"] = split_name;
            lines.push_back(j.dump());
        }
    }
    write_lines(path, lines);
}

void write_pairs(const PairDataset& ds, const fs::path& path) {
    std::vector<std::string> lines;
    for (const auto& p : ds.pairs) {
        ordered_json j;
        j["id"] = p.pair_id;
        j["text_a"] = p.text_a;
        j["text_b"] = p.text_b;
        j["label"] = p.gold;
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

PairDataset synthetic_pairset(int n_pos, int n_neg, std::uint64_t seed) {
    if (n_pos < 1 || n_neg < 1) throw std::invalid_argument("synthetic_pairset needs n_pos, n_neg >= 1");
    Rng rng{seed};
    PairDataset ds;
    ds.name = "synthetic-" + std::to_string(n_pos) + "-" + std::to_string(n_neg) + "-s" + std::to_string(seed);
    for (int k = 0; k < n_pos; ++k) {
        auto a = sentence(rng);
        auto b = a;
        // Paraphrase-like edit: swap the two trailing modifiers, replace one
        // content word.
        std::swap(b[5], b[6]);
        const std::size_t slot = (rng.next() % 2 == 0) ? 2 : 4;
        b[slot] = slot == 2 ? rng.pick(kVerbs) : rng.pick(kSubjects);
        ds.pairs.push_back({"syn-pos-" + std::to_string(k), join(a), join(b), 1});
    }
    for (int k = 0; k < n_neg; ++k) {
        const auto a = sentence(rng);
        const auto b = sentence(rng);
        ds.pairs.push_back({"syn-neg-" + std::to_string(k), join(a), join(b), 0});
    }
    return ds;
}

}  // namespace enrichbench::datasets
