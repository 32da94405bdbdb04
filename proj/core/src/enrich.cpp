#include "enrichbench/enrich.hpp"

#include <json.hpp>

#include <stdexcept>

#include "enrichbench/errors.hpp"
#include "enrichbench/parallel.hpp"
#include "enrichbench/timeutil.hpp"

using nlohmann::ordered_json;

namespace enrichbench {

namespace {

std::size_t count_code_points(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

void require_text(const Document& doc) {
    if (doc.text.value.empty()) {
        throw std::invalid_argument("document " + doc.id + " has no text to enrich");
    }
}

}  // namespace

std::string_view fallback_name(FallbackPolicy policy) noexcept {
    return policy == FallbackPolicy::fail ? "fail" : "passthrough";
}

FallbackPolicy parse_fallback(std::string_view name) {
    if (name == "fail") return FallbackPolicy::fail;
    if (name == "passthrough") return FallbackPolicy::passthrough;
    throw ConfigError("fallback must be \"fail\" or \"passthrough\", got " + std::string(name));
}

std::string to_json_line(const EnrichmentRecord& r) {
    ordered_json steps = ordered_json::array();
    for (auto s : r.original.applied_steps) steps.push_back(textprep::step_name(s));
    ordered_json j;
    j["doc_id"] = r.doc_id;
    j["original"] = r.original.value;
    j["applied_steps"] = std::move(steps);
    j["enriched"] = r.enriched;
    j["prompt_id"] = r.prompt_id;
    j["provider_id"] = r.provider_id;
    j["model_id"] = r.model_id;
    j["created_at"] = r.created_at;
    j["attempt_count"] = r.attempt_count;
    j["fallback_used"] = r.fallback_used;
    j["length_flagged"] = r.length_flagged;
    return j.dump();
}

EnrichmentRecord record_from_json(std::string_view line) {
    const auto j = ordered_json::parse(line);
    EnrichmentRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.original.value = j.at("original").get<std::string>();
    for (const auto& s : j.at("applied_steps")) {
        auto step = textprep::parse_step(s.get<std::string>());
        if (!step) throw std::invalid_argument("unknown preprocessing step in record");
        r.original.applied_steps.push_back(*step);
    }
    r.enriched = j.at("enriched").get<std::string>();
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.provider_id = j.at("provider_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.attempt_count = j.at("attempt_count").get<int>();
    r.fallback_used = j.at("fallback_used").get<bool>();
    r.length_flagged = j.value("length_flagged", false);
    return r;
}

Enricher::Enricher(ChatProviderConfig cfg, store::Store& cache, EnrichOptions options)
    : Enricher(cfg, make_chat_provider(cfg), cache, std::move(options)) {}

Enricher::Enricher(ChatProviderConfig cfg, std::shared_ptr<ChatProvider> provider, store::Store& cache,
                   EnrichOptions options)
    : cfg_(std::move(cfg)), provider_(std::move(provider)), cache_(cache), options_(std::move(options)) {
    cfg_.validate();
    if (!provider_) throw ConfigError("enricher needs a chat provider");
    retry_.max_retries = cfg_.max_retries;
    retry_.initial_backoff = cfg_.initial_backoff;
    retry_.max_backoff = cfg_.max_backoff;
    retry_.jitter_seed = options_.jitter_seed;
}

store::CacheKey Enricher::cache_key(const textprep::CleanText& original, const PromptTemplate& prompt) const {
    return store::CacheKey::chat(cfg_.provider_id, cfg_.model_id, prompt.id, Digest::of(original.value));
}

EnrichmentRecord Enricher::enrich(const Document& doc, const PromptTemplate& prompt) {
    require_text(doc);
    return enrich_one(doc, prompt, 0);
}

EnrichmentRecord Enricher::enrich_one(const Document& doc, const PromptTemplate& prompt,
                                      std::uint64_t stream) {
    EnrichmentRecord record;
    record.doc_id = doc.id;
    record.original = doc.text;
    record.prompt_id = prompt.id;
    record.provider_id = cfg_.provider_id;
    record.model_id = cfg_.model_id;
    record.length_flagged = count_code_points(doc.text.value) > options_.max_input_chars;

    const auto key = cache_key(doc.text, prompt);
    if (auto hit = cache_.get(key)) {
        record.enriched = std::move(hit->payload);
        record.created_at = hit->created_at;
        if (auto it = hit->attributes.find("attempt_count"); it != hit->attributes.end()) {
            record.attempt_count = std::stoi(it->second);
        }
        return record;
    }

    const ChatRequest request{cfg_.model_id, prompt.system_text, doc.text.value, cfg_.temperature};
    auto outcome = call_with_retries<std::string>(retry_, options_.sleeper, stream, [&] {
        network_calls_.fetch_add(1);
        return provider_->complete(request);
    });
    record.attempt_count = outcome.attempts;

    if (outcome.value) {
        record.enriched = std::move(*outcome.value);
        const auto entry = cache_.put(key, record.enriched,
                                      {{"attempt_count", std::to_string(record.attempt_count)},
                                       {"doc_id", doc.id}});
        record.created_at = entry.created_at;
        return record;
    }
    if (options_.fallback == FallbackPolicy::fail) throw *outcome.error;

    record.enriched = doc.text.value;
    record.fallback_used = true;
    record.created_at = utc_now();
    return record;
}

std::vector<EnrichmentRecord> Enricher::enrich_batch(std::span<const Document> docs,
                                                     const PromptTemplate& prompt) {
    if (docs.empty()) throw std::invalid_argument("enrich_batch needs at least one document");
    for (const auto& doc : docs) require_text(doc);

    std::vector<std::optional<EnrichmentRecord>> slots(docs.size());
    std::vector<std::optional<BatchError::Failure>> failures(docs.size());
    bounded_for_each(docs.size(), static_cast<std::size_t>(cfg_.max_in_flight), [&](std::size_t i) {
        try {
            slots[i] = enrich_one(docs[i], prompt, i);
        } catch (const ProviderError& e) {
            failures[i] = BatchError::Failure{i, e.what(), e.status()};
        } catch (const std::exception& e) {
            failures[i] = BatchError::Failure{i, e.what(), -1};
        }
    });

    std::vector<BatchError::Failure> failed;
    for (auto& f : failures) {
        if (f) failed.push_back(std::move(*f));
    }
    if (!failed.empty()) throw BatchError(std::move(failed));

    std::vector<EnrichmentRecord> out;
    out.reserve(docs.size());
    for (auto& slot : slots) out.push_back(std::move(*slot));
    return out;
}

}  // namespace enrichbench
