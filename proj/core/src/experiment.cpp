#include "enrichbench/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "enrichbench/errors.hpp"
#include "enrichbench/log.hpp"
#include "enrichbench/metrics.hpp"
#include "enrichbench/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace enrichbench {

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() ? base / path : path;
}

std::string read_all(const fs::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + std::string(what) + " " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

// Inline object or path to a JSON file.
std::string sub_document(const json& node, const fs::path& base, std::string_view what, fs::path* origin) {
    if (node.is_string()) {
        const auto path = resolve(base, node.get<std::string>());
        if (origin) *origin = path.parent_path();
        return read_all(path, what);
    }
    if (origin) *origin = base;
    return node.dump();
}

std::vector<textprep::Step> parse_steps(const json& node) {
    std::vector<textprep::Step> steps;
    for (const auto& s : node) {
        auto step = textprep::parse_step(s.get<std::string>());
        if (!step) throw ConfigError("unknown preprocessing step " + s.get<std::string>());
        if (std::find(steps.begin(), steps.end(), *step) == steps.end()) steps.push_back(*step);
    }
    std::sort(steps.begin(), steps.end());
    return steps;
}

// Dataset with preprocessing applied, ready for the cells.
struct PreparedDataset {
    DatasetSpec spec;
    datasets::PairDataset pairs;
    datasets::ClassificationDataset classes;
    // Texts handed to the rewriting model (cleaned, or raw when enrichment
    // happens before preprocessing) and baseline texts, in dataset order:
    // pairs -> a0, b0, a1, b1, ...; classification -> train..., test...
    std::vector<Document> enrich_inputs;
    std::vector<std::string> baseline_texts;
    std::vector<bool> rewritable;  // per text: does a prompt variant rewrite it
};

PreparedDataset prepare(const DatasetSpec& spec, bool preprocess_before_enrich) {
    PreparedDataset ds;
    ds.spec = spec;
    std::vector<std::pair<std::string, std::string>> items;  // (id, raw text)
    if (spec.task == TaskKind::pair) {
        if (spec.synthetic) {
            ds.pairs = datasets::synthetic_pairset(spec.synthetic->n_pos, spec.synthetic->n_neg, spec.synthetic->seed);
            ds.pairs.name = spec.name;
        } else {
            ds.pairs = datasets::load_pairs(spec.path, spec.name);
        }
        for (const auto& p : ds.pairs.pairs) {
            items.emplace_back(p.pair_id + "#a", p.text_a);
            items.emplace_back(p.pair_id + "#b", p.text_b);
            ds.rewritable.push_back(spec.sides != EnrichSides::b);
            ds.rewritable.push_back(spec.sides != EnrichSides::a);
        }
    } else {
        ds.classes = datasets::load_classification(spec.path, spec.name);
        for (const auto* split : {&ds.classes.train, &ds.classes.test}) {
            for (const auto& item : *split) {
                items.emplace_back(item.doc_id, item.text);
                ds.rewritable.push_back(true);
            }
        }
    }
    for (const auto& [id, raw] : items) {
        auto clean = textprep::preprocess(raw, spec.steps);
        if (clean.value.empty()) {
            throw ConfigError("dataset " + spec.name + ": item " + id + " is empty after preprocessing");
        }
        ds.baseline_texts.push_back(clean.value);
        ds.enrich_inputs.push_back(
            Document{id, preprocess_before_enrich ? std::move(clean) : textprep::CleanText{raw, {}}, std::nullopt});
    }
    return ds;
}

struct CellOutcome {
    std::optional<double> score;
    std::string error;
    std::size_t fallbacks = 0;
};

}  // namespace

std::string DatasetSpec::metric() const {
    return std::string(task == TaskKind::pair ? kMetricCosineAp : kMetricAccuracy);
}

PromptRegistry ExperimentConfig::registry() const {
    PromptRegistry reg;
    for (const auto& p : extra_prompts) reg.add(p);
    return reg;
}

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw ConfigError("experiment needs at least one dataset");
    if (variants.empty()) throw ConfigError("experiment needs at least one variant");
    std::set<std::string> names;
    for (const auto& d : datasets) {
        if (d.name.empty()) throw ConfigError("dataset entries need a name");
        if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name " + d.name);
        if (d.task == TaskKind::classification && d.synthetic) {
            throw ConfigError("synthetic data is only available for pair datasets");
        }
        if (!d.synthetic && d.path.empty()) throw ConfigError("dataset " + d.name + " needs a path");
    }
    const auto reg = registry();
    std::set<std::string> seen;
    for (const auto& v : variants) {
        if (!seen.insert(v).second) throw ConfigError("duplicate variant " + v);
        if (v != kBaselineVariant && !reg.find(v)) throw ConfigError("unknown prompt variant " + v);
    }
    if (max_parallel_cells < 1) throw ConfigError("max_parallel_cells must be >= 1");
    chat.validate();
    embed.validate();
}

ExperimentConfig experiment_config_from_json(std::string_view json_text, const fs::path& base_dir) {
    ExperimentConfig cfg;
    try {
        const auto j = json::parse(json_text);
        for (const auto& d : j.at("datasets")) {
            DatasetSpec spec;
            spec.name = d.at("name").get<std::string>();
            const auto task = d.value("task", std::string("pair"));
            if (task == "pair") spec.task = TaskKind::pair;
            else if (task == "classification") spec.task = TaskKind::classification;
            else throw ConfigError("dataset " + spec.name + ": unknown task " + task);
            if (d.contains("metric") && d.at("metric").get<std::string>() != spec.metric()) {
                throw ConfigError("dataset " + spec.name + ": " + task + " task is scored with " + spec.metric());
            }
            if (d.contains("path")) spec.path = resolve(base_dir, d.at("path").get<std::string>());
            if (d.contains("synthetic")) {
                const auto& s = d.at("synthetic");
                spec.synthetic = SyntheticPairs{s.value("n_pos", 50), s.value("n_neg", 50), s.value("seed", std::uint64_t{7})};
            }
            spec.steps = d.contains("preprocess") ? parse_steps(d.at("preprocess"))
                         : spec.task == TaskKind::pair ? textprep::default_pair_steps()
                                                       : textprep::default_classification_steps();
            const auto sides = d.value("enrich_sides", std::string("both"));
            if (sides == "both") spec.sides = EnrichSides::both;
            else if (sides == "a") spec.sides = EnrichSides::a;
            else if (sides == "b") spec.sides = EnrichSides::b;
            else throw ConfigError("enrich_sides must be both, a or b");
            cfg.datasets.push_back(std::move(spec));
        }
        cfg.variants = j.value("variants", std::vector<std::string>{"baseline", "paper-1", "paper-2", "paper-3", "paper-4"});
        for (const auto& p : j.value("prompts", json::array())) {
            if (p.is_string()) {
                cfg.extra_prompts.push_back(load_prompt_file(resolve(base_dir, p.get<std::string>())));
            } else {
                cfg.extra_prompts.push_back({p.at("id").get<std::string>(), p.at("system_text").get<std::string>(),
                                             p.value("description", std::string{})});
            }
        }
        if (j.contains("chat_provider")) {
            fs::path origin;
            cfg.chat = chat_config_from_json(sub_document(j.at("chat_provider"), base_dir, "chat provider config", &origin));
            if (!cfg.chat.rulebook_path.empty() && cfg.chat.rulebook_path.is_relative()) {
                cfg.chat.rulebook_path = origin / cfg.chat.rulebook_path;
            }
        }
        if (j.contains("embed_provider")) {
            cfg.embed = embed_config_from_json(sub_document(j.at("embed_provider"), base_dir, "embedding provider config", nullptr));
        }
        cfg.preprocess_before_enrich = j.value("preprocess_before_enrich", true);
        cfg.fallback = parse_fallback(j.value("fallback", std::string("passthrough")));
        cfg.max_input_chars = j.value("max_input_chars", cfg.max_input_chars);
        if (j.contains("classifier")) {
            const auto& c = j.at("classifier");
            cfg.classifier.learning_rate = c.value("learning_rate", cfg.classifier.learning_rate);
            cfg.classifier.epochs = c.value("epochs", cfg.classifier.epochs);
            cfg.classifier.l2 = c.value("l2", cfg.classifier.l2);
            cfg.classifier.seed = c.value("seed", cfg.classifier.seed);
        }
        if (j.contains("cache_dir")) cfg.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
        if (j.contains("output")) {
            const auto& o = j.at("output");
            const auto opt = [&](const char* key) -> std::optional<fs::path> {
                if (!o.contains(key)) return std::nullopt;
                return resolve(base_dir, o.at(key).get<std::string>());
            };
            cfg.output = {opt("table_json"), opt("markdown"), opt("csv"), opt("metadata")};
        }
        for (const auto& r : j.value("references", json::array())) {
            ReferenceRow ref{r.at("label").get<std::string>(), r.at("scores").get<std::map<std::string, double>>()};
            cfg.references.push_back(std::move(ref));
        }
        cfg.max_parallel_cells = j.value("max_parallel_cells", cfg.max_parallel_cells);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    return experiment_config_from_json(read_all(path, "experiment config"), path.parent_path());
}

double pair_task_score(const datasets::PairDataset& pairs, std::span<const std::string> texts_a,
                       std::span<const std::string> texts_b, EmbeddingService& embedder) {
    const std::size_t n = pairs.pairs.size();
    if (texts_a.size() != n || texts_b.size() != n) throw std::invalid_argument("pair texts misaligned with dataset");
    std::vector<std::string> all;
    all.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        all.push_back(texts_a[i]);
        all.push_back(texts_b[i]);
    }
    const auto vectors = embedder.embed_batch(all);
    std::vector<ScoredPair> scored;
    scored.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        scored.push_back({pairs.pairs[i].pair_id, cosine_similarity(vectors[2 * i], vectors[2 * i + 1]),
                          pairs.pairs[i].gold});
    }
    return 100.0 * average_precision(scored);
}

double classification_task_score(std::span<const std::string> train_texts, std::span<const std::string> train_labels,
                                 std::span<const std::string> test_texts, std::span<const std::string> test_labels,
                                 EmbeddingService& embedder, const ClassifierHyper& hyper) {
    std::vector<std::string> all(train_texts.begin(), train_texts.end());
    all.insert(all.end(), test_texts.begin(), test_texts.end());
    const auto vectors = embedder.embed_batch(all);
    const std::span<const EmbeddingVector> v(vectors);
    const auto train = labeled(v.first(train_texts.size()), train_labels);
    const auto test = labeled(v.subspan(train_texts.size()), test_labels);
    const auto model = fit_classifier(train, hyper);
    return accuracy(model, test);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, store::Store& cache, const ExperimentOverrides& overrides) {
    cfg.validate();
    const auto registry = cfg.registry();

    std::vector<PreparedDataset> prepared;
    for (const auto& spec : cfg.datasets) {
        if (!spec.synthetic && !fs::exists(spec.path)) {
            throw ConfigError("dataset " + spec.name + " not found at " + spec.path.string());
        }
        prepared.push_back(prepare(spec, cfg.preprocess_before_enrich));
    }

    EnrichOptions enrich_options;
    enrich_options.fallback = cfg.fallback;
    enrich_options.max_input_chars = cfg.max_input_chars;
    if (overrides.sleeper) enrich_options.sleeper = *overrides.sleeper;

    const bool needs_chat = std::any_of(cfg.variants.begin(), cfg.variants.end(),
                                        [](const std::string& v) { return v != kBaselineVariant; });
    std::unique_ptr<Enricher> enricher;
    if (needs_chat) {
        auto chat = overrides.chat ? overrides.chat : make_chat_provider(cfg.chat);
        enricher = std::make_unique<Enricher>(cfg.chat, std::move(chat), cache, enrich_options);
    }
    auto embedder = overrides.embedder ? overrides.embedder : make_embedder(cfg.embed);
    EmbeddingService embeddings(cfg.embed, std::move(embedder), cache,
                                overrides.sleeper ? *overrides.sleeper : real_sleeper());

    struct Cell {
        std::size_t variant;
        std::size_t dataset;
    };
    std::vector<Cell> cells;
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
        for (std::size_t d = 0; d < prepared.size(); ++d) cells.push_back({v, d});
    }

    std::vector<CellOutcome> outcomes(cells.size());
    bounded_for_each(cells.size(), static_cast<std::size_t>(cfg.max_parallel_cells), [&](std::size_t c) {
        const auto& variant = cfg.variants[cells[c].variant];
        const auto& ds = prepared[cells[c].dataset];
        auto& outcome = outcomes[c];
        try {
            std::vector<std::string> texts = ds.baseline_texts;
            if (variant != kBaselineVariant) {
                std::vector<Document> to_rewrite;
                std::vector<std::size_t> positions;
                for (std::size_t i = 0; i < ds.enrich_inputs.size(); ++i) {
                    if (!ds.rewritable[i]) continue;
                    to_rewrite.push_back(ds.enrich_inputs[i]);
                    positions.push_back(i);
                }
                const auto records = enricher->enrich_batch(to_rewrite, *registry.find(variant));
                for (std::size_t k = 0; k < records.size(); ++k) {
                    outcome.fallbacks += records[k].fallback_used ? 1 : 0;
                    auto final_text = cfg.preprocess_before_enrich
                                          ? records[k].enriched
                                          : textprep::preprocess(records[k].enriched, ds.spec.steps).value;
                    if (final_text.empty()) {
                        throw std::runtime_error("rewritten text for " + records[k].doc_id + " is empty after preprocessing");
                    }
                    texts[positions[k]] = std::move(final_text);
                }
            }
            if (ds.spec.task == TaskKind::pair) {
                std::vector<std::string> a, b;
                for (std::size_t i = 0; i < texts.size(); i += 2) {
                    a.push_back(texts[i]);
                    b.push_back(texts[i + 1]);
                }
                outcome.score = pair_task_score(ds.pairs, a, b, embeddings);
            } else {
                const std::size_t n_train = ds.classes.train.size();
                std::vector<std::string> train_labels, test_labels;
                for (const auto& t : ds.classes.train) train_labels.push_back(t.label);
                for (const auto& t : ds.classes.test) test_labels.push_back(t.label);
                const std::span<const std::string> all(texts);
                outcome.score = classification_task_score(all.first(n_train), train_labels, all.subspan(n_train),
                                                          test_labels, embeddings, cfg.classifier);
            }
        } catch (const std::exception& e) {
            outcome.score.reset();
            outcome.error = e.what();
        }
    });

    ExperimentResult result;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& ds = prepared[cells[c].dataset];
        auto& outcome = outcomes[c];
        result.fallback_records += outcome.fallbacks;
        result.table.add_row({cfg.variants[cells[c].variant], ds.spec.name, ds.spec.metric(), outcome.score,
                              outcome.score ? std::string{} : outcome.error});
    }
    for (const auto& ref : cfg.references) result.table.add_reference(ref);
    result.chat_calls = enricher ? enricher->network_calls() : 0;
    result.embed_calls = embeddings.network_calls();
    if (result.fallback_records > 0) {
        log::warn(std::to_string(result.fallback_records) + " rewrite(s) fell back to the original text");
    }
    return result;
}

}  // namespace enrichbench
