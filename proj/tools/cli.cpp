#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "enrichbench/embed.hpp"
#include "enrichbench/errors.hpp"
#include "enrichbench/experiment.hpp"
#include "enrichbench/hash.hpp"
#include "enrichbench/log.hpp"
#include "enrichbench/prompts.hpp"
#include "enrichbench/report.hpp"
#include "enrichbench/store.hpp"
#include "enrichbench/timeutil.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace enrichbench::cli {

namespace {

struct InputDoc {
    std::string id;
    std::string text;
    ordered_json label;  // null when absent
    std::vector<textprep::Step> applied_steps;
};

std::string read_file(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw ConfigError("input file not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::string id_of(const ordered_json& v, std::size_t line) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw SchemaError(line, "id must be a string or integer");
}

// JSONL documents {id, text, label?}. Enrichment records are accepted too:
// their doc_id and enriched text are used.
std::vector<InputDoc> read_documents(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<InputDoc> docs;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw ParseError(n, e.what());
        }
        if (!j.is_object()) throw SchemaError(n, "expected a JSON object");
        InputDoc d;
        const bool record = j.contains("doc_id") && j.contains("enriched");
        const char* id_key = record ? "doc_id" : "id";
        const char* text_key = record ? "enriched" : "text";
        if (!j.contains(id_key)) throw SchemaError(n, std::string("missing field ") + id_key);
        if (!j.contains(text_key) || !j.at(text_key).is_string()) {
            throw SchemaError(n, std::string("missing string field ") + text_key);
        }
        d.id = id_of(j.at(id_key), n);
        d.text = j.at(text_key).get<std::string>();
        if (j.contains("label")) d.label = j.at("label");
        if (!record && j.contains("applied_steps")) {
            for (const auto& s : j.at("applied_steps")) {
                auto step = s.is_string() ? textprep::parse_step(s.get<std::string>()) : std::nullopt;
                if (!step) throw SchemaError(n, "unknown preprocessing step");
                d.applied_steps.push_back(*step);
            }
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

// Writes to the file when given, stdout otherwise.
void emit(const std::optional<fs::path>& path, const std::string& text, std::ostream& out) {
    if (!path) {
        out << text;
        return;
    }
    if (path->has_parent_path()) fs::create_directories(path->parent_path());
    std::ofstream f(*path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path->string());
    f << text;
    if (!f.flush()) throw IoError("write failed: " + path->string());
}

template <typename Fn>
int guarded(std::ostream& err, const char* command, Fn&& fn) {
    try {
        return fn();
    } catch (const BatchError& e) {
        for (const auto& f : e.failures()) err << command << ": item " << f.index << ": " << f.message << "\n";
        err << command << ": " << e.failures().size() << " item(s) failed\n";
        return kProvider;
    } catch (const ProviderError& e) {
        err << command << ": provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const ConfigError& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const SchemaError& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const EmptySplit& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const DegenerateLabels& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace

int cmd_preprocess(const PreprocessArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "preprocess", [&] {
        const auto docs = read_documents(args.in);
        auto steps = args.steps;
        std::sort(steps.begin(), steps.end());
        steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

        std::vector<std::size_t> changed(steps.size(), 0);
        std::size_t empty = 0;
        std::string text;
        for (const auto& d : docs) {
            std::string current = d.text;
            for (std::size_t s = 0; s < steps.size(); ++s) {
                auto next = textprep::preprocess(current, {steps[s]}).value;
                if (next != current) ++changed[s];
                current = std::move(next);
            }
            const auto clean = textprep::preprocess(d.text, steps);
            if (clean.value.empty()) ++empty;
            ordered_json j;
            j["id"] = d.id;
            j["text"] = clean.value;
            if (!d.label.is_null()) j["label"] = d.label;
            ordered_json applied = ordered_json::array();
            for (auto s : clean.applied_steps) applied.push_back(textprep::step_name(s));
            j["applied_steps"] = std::move(applied);
            text += j.dump();
            text += '\n';
        }
        emit(args.out, text, out);
        err << "preprocess: " << docs.size() << " rows\n";
        for (std::size_t s = 0; s < steps.size(); ++s) {
            err << "  " << textprep::step_name(steps[s]) << ": " << changed[s] << " changed\n";
        }
        if (empty > 0) err << "  empty after preprocessing: " << empty << "\n";
        return kOk;
    });
}

int cmd_enrich(const EnrichArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "enrich", [&] {
        PromptRegistry registry;
        std::string prompt_id = args.prompt_id;
        if (args.prompt_file) {
            auto p = load_prompt_file(*args.prompt_file);
            if (prompt_id.empty()) prompt_id = p.id;
            registry.add(std::move(p));
        }
        if (prompt_id.empty()) throw ConfigError("a prompt id (--prompt) or prompt file (--prompt-file) is required");
        const auto prompt = registry.find(prompt_id);
        if (!prompt) throw ConfigError("unknown prompt " + prompt_id);

        ChatProviderConfig cfg = args.provider_config ? load_chat_config(*args.provider_config) : ChatProviderConfig{};
        if (args.max_in_flight) cfg.max_in_flight = *args.max_in_flight;
        cfg.validate();

        const auto raw = read_documents(args.in);
        store::Store cache(store::resolve_cache_dir(args.cache_dir));
        EnrichOptions options;
        if (args.fallback) options.fallback = *args.fallback;
        if (args.seed) options.jitter_seed = *args.seed;
        Enricher enricher(cfg, cache, options);

        std::string text;
        std::size_t fallbacks = 0;
        if (!raw.empty()) {
            std::vector<Document> docs;
            docs.reserve(raw.size());
            for (const auto& d : raw) docs.push_back({d.id, textprep::CleanText{d.text, d.applied_steps}, std::nullopt});
            for (const auto& r : enricher.enrich_batch(docs, *prompt)) {
                fallbacks += r.fallback_used ? 1 : 0;
                text += to_json_line(r);
                text += '\n';
            }
        }
        emit(args.out, text, out);
        err << "enrich: " << raw.size() << " records, " << enricher.network_calls() << " provider calls, "
            << fallbacks << " fallbacks\n";
        return kOk;
    });
}

int cmd_embed(const EmbedArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "embed", [&] {
        EmbedProviderConfig cfg = args.provider_config ? load_embed_config(*args.provider_config) : EmbedProviderConfig{};
        if (args.max_in_flight) cfg.max_in_flight = *args.max_in_flight;
        if (args.seed) cfg.mock_seed = *args.seed;
        cfg.validate();

        const auto docs = read_documents(args.in);
        store::Store cache(store::resolve_cache_dir(args.cache_dir));
        EmbeddingService service(cfg, cache);

        std::string text;
        if (!docs.empty()) {
            std::vector<std::string> texts;
            for (const auto& d : docs) texts.push_back(d.text);
            const auto vectors = service.embed_batch(texts);
            for (std::size_t i = 0; i < docs.size(); ++i) {
                ordered_json j;
                j["id"] = docs[i].id;
                j["provider_id"] = vectors[i].provider_id;
                j["model_id"] = vectors[i].model_id;
                j["dim"] = vectors[i].dim();
                j["source_hash"] = vectors[i].source_hash.hex();
                j["values"] = vectors[i].values;
                text += j.dump();
                text += '\n';
            }
        }
        emit(args.out, text, out);
        err << "embed: " << docs.size() << " vectors, " << service.network_calls() << " provider calls\n";
        return kOk;
    });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "eval", [&] {
        const auto config_bytes = read_file(args.config);
        auto cfg = load_experiment_config(args.config);
        if (args.fallback) cfg.fallback = *args.fallback;
        if (args.max_in_flight) {
            cfg.chat.max_in_flight = *args.max_in_flight;
            cfg.embed.max_in_flight = *args.max_in_flight;
        }
        if (args.seed) cfg.classifier.seed = *args.seed;
        cfg.validate();

        OutputPaths paths = cfg.output;
        if (args.out) {
            paths = {*args.out / "results.json", *args.out / "report.md", *args.out / "report.csv",
                     *args.out / "run.json"};
        }

        std::optional<std::string> cache_flag = args.cache_dir;
        if (!cache_flag && cfg.cache_dir) cache_flag = cfg.cache_dir->string();
        store::Store cache(store::resolve_cache_dir(cache_flag));

        RunMetadata meta;
        meta.config_digest = Digest::of(config_bytes).hex();
        meta.chat_provider_id = cfg.chat.provider_id;
        meta.chat_model_id = cfg.chat.model_id;
        meta.embed_provider_id = cfg.embed.provider_id;
        meta.embed_model_id = cfg.embed.effective_model_id();
        meta.started_at = utc_now();
        auto result = run_experiment(cfg, cache);
        meta.finished_at = utc_now();
        meta.cache_stats = cache.stats();

        const auto doc = render_report(result.table, meta);
        if (paths.table_json) emit(paths.table_json, results_to_json(doc.table), out);
        if (paths.markdown) emit(paths.markdown, doc.markdown, out);
        if (paths.csv) emit(paths.csv, doc.csv, out);
        if (paths.metadata) emit(paths.metadata, metadata_to_json(doc.metadata), out);
        if (!paths.table_json && !paths.markdown && !paths.csv) out << doc.markdown;

        std::size_t ok = 0;
        for (const auto& row : result.table.rows()) {
            if (row.ok()) {
                ++ok;
            } else {
                err << "eval: " << row.variant_id << " on " << row.dataset << " failed: " << row.error << "\n";
            }
        }
        err << "eval: " << ok << "/" << result.table.rows().size() << " cells computed, " << result.chat_calls
            << " chat calls, " << result.embed_calls << " embedding calls\n";
        return result.table.complete() ? kOk : kPartial;
    });
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "report", [&] {
        const auto text = read_file(args.results);
        const auto table = args.results.extension() == ".csv" ? parse_results_csv(text) : results_from_json(text);
        if (table.empty()) throw ConfigError("results table is empty");
        const auto doc = render_report(table);
        if (args.format == "markdown") emit(args.out, doc.markdown, out);
        else if (args.format == "csv") emit(args.out, doc.csv, out);
        else if (args.format == "json") emit(args.out, results_to_json(table), out);
        else throw ConfigError("unknown report format " + args.format);
        return kOk;
    });
}

int cmd_prompts(const std::optional<std::string>& show, std::ostream& out, std::ostream& err) {
    PromptRegistry registry;
    if (show) {
        const auto p = registry.find(*show);
        if (!p) {
            err << "prompts: unknown prompt " << *show << "\n";
            return kUsage;
        }
        out << p->system_text << "\n";
        return kOk;
    }
    for (const auto& p : registry.all()) out << p.id << "\t" << p.description << "\n";
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto previous = log::set_warning_sink([&](std::string_view msg) { err << "warning: " << msg << "\n"; });
    struct Restore {
        log::Sink sink;
        ~Restore() { log::set_warning_sink(std::move(sink)); }
    } restore{std::move(previous)};

    CLI::App app{"Prompt-based text enrichment benchmark"};
    app.name("enrichbench");
    app.require_subcommand(1);

    const std::map<std::string, FallbackPolicy> fallbacks{{"fail", FallbackPolicy::fail},
                                                          {"passthrough", FallbackPolicy::passthrough}};

    PreprocessArgs pre;
    std::vector<std::string> step_names{"strip_noise", "lowercase"};
    auto* sub_pre = app.add_subcommand("preprocess", "Clean a JSONL document file");
    sub_pre->add_option("--in", pre.in, "Input JSONL {id, text, label?}")->required();
    sub_pre->add_option("--out", pre.out, "Output JSONL (stdout when omitted)");
    sub_pre->add_option("--steps", step_names, "Comma-separated steps, or 'none'")->delimiter(',');

    EnrichArgs enr;
    auto* sub_enr = app.add_subcommand("enrich", "Rewrite documents with a prompt template");
    sub_enr->add_option("--in", enr.in, "Input JSONL")->required();
    sub_enr->add_option("--prompt", enr.prompt_id, "Prompt id");
    sub_enr->add_option("--prompt-file", enr.prompt_file, "User prompt JSON file");
    sub_enr->add_option("--provider-config", enr.provider_config, "Chat provider JSON config");
    sub_enr->add_option("--cache-dir", enr.cache_dir, "Cache root");
    sub_enr->add_option("--out", enr.out, "Output JSONL (stdout when omitted)");
    sub_enr->add_option("--fallback", enr.fallback, "fail | passthrough")->transform(CLI::CheckedTransformer(fallbacks));
    sub_enr->add_option("--max-in-flight", enr.max_in_flight, "Concurrent provider requests")->check(CLI::PositiveNumber);
    sub_enr->add_option("--seed", enr.seed, "Retry jitter seed");

    EmbedArgs emb;
    auto* sub_emb = app.add_subcommand("embed", "Embed documents");
    sub_emb->add_option("--in", emb.in, "Input JSONL")->required();
    sub_emb->add_option("--provider-config", emb.provider_config, "Embedding provider JSON config");
    sub_emb->add_option("--cache-dir", emb.cache_dir, "Cache root");
    sub_emb->add_option("--out", emb.out, "Output JSONL (stdout when omitted)");
    sub_emb->add_option("--max-in-flight", emb.max_in_flight, "Concurrent provider requests")->check(CLI::PositiveNumber);
    sub_emb->add_option("--seed", emb.seed, "Mock embedder seed");

    EvalArgs ev;
    auto* sub_ev = app.add_subcommand("eval", "Run an experiment config");
    sub_ev->add_option("--config", ev.config, "Experiment JSON config")->required();
    sub_ev->add_option("--cache-dir", ev.cache_dir, "Cache root");
    sub_ev->add_option("--out", ev.out, "Output directory");
    sub_ev->add_option("--fallback", ev.fallback, "fail | passthrough")->transform(CLI::CheckedTransformer(fallbacks));
    sub_ev->add_option("--max-in-flight", ev.max_in_flight, "Concurrent provider requests")->check(CLI::PositiveNumber);
    sub_ev->add_option("--seed", ev.seed, "Classifier seed");

    ReportArgs rep;
    auto* sub_rep = app.add_subcommand("report", "Render a results table");
    sub_rep->add_option("--results", rep.results, "Results JSON (or CSV)")->required();
    sub_rep->add_option("--format", rep.format, "markdown | csv | json")
        ->check(CLI::IsMember({"markdown", "csv", "json"}));
    sub_rep->add_option("--out", rep.out, "Output file (stdout when omitted)");

    std::optional<std::string> show;
    auto* sub_prompts = app.add_subcommand("prompts", "List built-in prompt templates");
    sub_prompts->add_option("--show", show, "Print one template's system text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (*sub_pre) {
        pre.steps.clear();
        for (const auto& name : step_names) {
            if (name == "none") continue;
            auto step = textprep::parse_step(name);
            if (!step) {
                err << "preprocess: unknown step " << name << "\n";
                return kUsage;
            }
            pre.steps.push_back(*step);
        }
        return cmd_preprocess(pre, out, err);
    }
    if (*sub_enr) return cmd_enrich(enr, out, err);
    if (*sub_emb) return cmd_embed(emb, out, err);
    if (*sub_ev) return cmd_eval(ev, out, err);
    if (*sub_rep) return cmd_report(rep, out, err);
    return cmd_prompts(show, out, err);
}

}  // namespace enrichbench::cli
