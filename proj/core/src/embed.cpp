#include "enrichbench/embed.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "enrichbench/errors.hpp"
#include "enrichbench/log.hpp"
#include "enrichbench/parallel.hpp"

namespace enrichbench {

namespace {

std::vector<float> to_f32(const std::vector<double>& values) {
    std::vector<float> out;
    out.reserve(values.size());
    for (double v : values) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw ProviderError(0, "embedding value not representable as float32", false);
        out.push_back(f);
    }
    return out;
}

}  // namespace

EmbeddingService::EmbeddingService(EmbedProviderConfig cfg, store::Store& cache)
    : EmbeddingService(cfg, make_embedder(cfg), cache) {}

EmbeddingService::EmbeddingService(EmbedProviderConfig cfg, std::shared_ptr<Embedder> embedder,
                                   store::Store& cache, Sleeper sleeper)
    : cfg_(std::move(cfg)), embedder_(std::move(embedder)), cache_(cache), sleeper_(std::move(sleeper)) {
    cfg_.validate();
    if (!embedder_) throw ConfigError("embedding service needs an embedder");
    model_id_ = cfg_.effective_model_id();
    retry_.max_retries = cfg_.max_retries;
    retry_.initial_backoff = cfg_.initial_backoff;
    retry_.max_backoff = cfg_.max_backoff;
}

store::CacheKey EmbeddingService::cache_key(const Digest& text_hash) const {
    return store::CacheKey::embed(cfg_.provider_id, model_id_, text_hash);
}

std::vector<EmbeddingVector> EmbeddingService::embed_batch(std::span<const std::string> texts) {
    if (texts.empty()) throw std::invalid_argument("embed_batch needs at least one text");

    // Unique texts in first-seen order.
    std::unordered_map<std::string_view, std::size_t> slot_of;
    std::vector<std::string_view> unique;
    std::vector<std::size_t> slot_for_input(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) throw std::invalid_argument("cannot embed empty text at index " + std::to_string(i));
        auto [it, inserted] = slot_of.try_emplace(texts[i], unique.size());
        if (inserted) unique.push_back(texts[i]);
        slot_for_input[i] = it->second;
    }

    std::vector<Digest> hashes;
    hashes.reserve(unique.size());
    for (auto t : unique) hashes.push_back(Digest::of(t));

    std::vector<std::optional<std::vector<float>>> values(unique.size());
    std::vector<std::size_t> misses;
    for (std::size_t u = 0; u < unique.size(); ++u) {
        if (auto hit = cache_.get(cache_key(hashes[u]))) {
            if (auto payload = store::decode_vector_payload(hit->payload);
                payload && payload->model_id == model_id_) {
                values[u] = std::move(payload->values);
                continue;
            }
            log::warn("embedding cache entry for " + hashes[u].hex() + " is malformed; re-embedding");
        }
        misses.push_back(u);
    }

    const std::size_t batch = static_cast<std::size_t>(cfg_.batch_size);
    const std::size_t chunks = (misses.size() + batch - 1) / batch;
    std::vector<std::optional<ProviderError>> chunk_errors(chunks);
    std::vector<std::optional<std::string>> chunk_other_errors(chunks);
    bounded_for_each(chunks, static_cast<std::size_t>(cfg_.max_in_flight), [&](std::size_t c) {
        try {
            const std::size_t begin = c * batch;
            const std::size_t end = std::min(misses.size(), begin + batch);
            std::vector<std::string> inputs;
            inputs.reserve(end - begin);
            for (std::size_t k = begin; k < end; ++k) inputs.emplace_back(unique[misses[k]]);

            auto outcome = call_with_retries<std::vector<std::vector<double>>>(
                retry_, sleeper_, c, [&] {
                    network_calls_.fetch_add(1);
                    auto out = embedder_->embed(inputs);
                    if (out.size() != inputs.size()) {
                        throw ProviderError(0, "embedder returned wrong number of vectors", true);
                    }
                    return out;
                });
            if (!outcome.value) {
                chunk_errors[c] = *outcome.error;
                return;
            }
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t u = misses[k];
                auto f32 = to_f32((*outcome.value)[k - begin]);
                if (f32.empty()) throw ProviderError(0, "embedder returned an empty vector", false);
                cache_.put(cache_key(hashes[u]), store::encode_vector_payload(model_id_, f32));
                values[u] = std::move(f32);
            }
        } catch (const ProviderError& e) {
            chunk_errors[c] = e;
        } catch (const std::exception& e) {
            chunk_other_errors[c] = e.what();
        }
    });
    for (std::size_t c = 0; c < chunks; ++c) {
        if (chunk_errors[c]) throw *chunk_errors[c];
        if (chunk_other_errors[c]) throw Error("embedding failed: " + *chunk_other_errors[c]);
    }

    std::size_t dim = run_dim_.load();
    for (const auto& v : values) {
        if (dim == 0) dim = v->size();
        if (v->size() != dim) throw DimensionMismatch(dim, v->size());
    }
    std::size_t expected = 0;
    if (!run_dim_.compare_exchange_strong(expected, dim) && expected != dim) {
        throw DimensionMismatch(expected, dim);
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto u = slot_for_input[i];
        EmbeddingVector ev;
        ev.values.assign(values[u]->begin(), values[u]->end());
        ev.provider_id = cfg_.provider_id;
        ev.model_id = model_id_;
        ev.source_hash = hashes[u];
        out.push_back(std::move(ev));
    }
    return out;
}

}  // namespace enrichbench
