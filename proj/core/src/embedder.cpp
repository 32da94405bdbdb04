#include "enrichbench/embedder.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "enrichbench/errors.hpp"
#include "enrichbench/textprep.hpp"
#include "enrichbench/vector_math.hpp"
#include "http.hpp"

using nlohmann::json;

namespace enrichbench {

namespace {

std::uint64_t fnv1a(std::uint64_t seed, std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
    for (unsigned char c : bytes) mix(c);
    // splitmix64 finalizer spreads low-entropy FNV output across all bits.
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

}  // namespace

std::string_view embed_kind_name(EmbedProviderKind kind) noexcept {
    return kind == EmbedProviderKind::mock ? "mock" : "openai-compatible";
}

EmbedProviderKind parse_embed_kind(std::string_view name) {
    if (name == "mock") return EmbedProviderKind::mock;
    if (name == "openai-compatible") return EmbedProviderKind::openai_compatible;
    throw ConfigError("unknown embedding provider kind: " + std::string(name));
}

void EmbedProviderConfig::validate() const {
    if (provider_id.empty()) throw ConfigError("embedding provider_id must be non-empty");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_retries < 0 || max_retries > 10) throw ConfigError("max_retries must be in [0, 10]");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (kind == EmbedProviderKind::mock && mock_dim < 2) throw ConfigError("mock dim must be >= 2");
    if (kind != EmbedProviderKind::mock && model_id.empty()) {
        throw ConfigError("embedding model_id must be non-empty");
    }
}

std::string EmbedProviderConfig::effective_model_id() const {
    if (!model_id.empty() || kind != EmbedProviderKind::mock) return model_id;
    return "hash-d" + std::to_string(mock_dim) + "-s" + std::to_string(mock_seed);
}

EmbedProviderConfig embed_config_from_json(std::string_view json_text) {
    EmbedProviderConfig cfg;
    try {
        const auto j = json::parse(json_text);
        cfg.kind = parse_embed_kind(j.value("kind", std::string(embed_kind_name(cfg.kind))));
        cfg.provider_id = j.value("provider_id", std::string(embed_kind_name(cfg.kind)));
        cfg.model_id = j.value("model_id", std::string{});
        cfg.endpoint = j.value("endpoint", std::string{});
        cfg.auth_ref = j.value("auth_ref", std::string{});
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
        cfg.max_retries = j.value("max_retries", cfg.max_retries);
        cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
        cfg.initial_backoff =
            std::chrono::milliseconds(j.value("initial_backoff_ms", cfg.initial_backoff.count()));
        cfg.max_backoff = std::chrono::milliseconds(j.value("max_backoff_ms", cfg.max_backoff.count()));
        cfg.mock_dim = j.value("dim", cfg.mock_dim);
        cfg.mock_seed = j.value("seed", cfg.mock_seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid embedding provider config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

EmbedProviderConfig load_embed_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open provider config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return embed_config_from_json(buf.str());
}

std::shared_ptr<Embedder> make_embedder(const EmbedProviderConfig& cfg) {
    cfg.validate();
    if (cfg.kind == EmbedProviderKind::mock) {
        return std::make_shared<MockEmbedder>(cfg.mock_dim, cfg.mock_seed);
    }
    detail::parse_endpoint(cfg.endpoint);
    return std::make_shared<HttpEmbedder>(cfg, detail::credential_from_env(cfg.auth_ref));
}

MockEmbedder::MockEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 2) throw ConfigError("mock embedder dim must be >= 2");
}

std::vector<double> MockEmbedder::embed_one(std::string_view text) const {
    std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
    const auto bucket_of = [&](std::uint64_t h) { return static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_)); };
    for (const auto& token : textprep::tokenize(text)) {
        const auto h = fnv1a(seed_, token);
        v[bucket_of(h)] += (h >> 63) ? -1.0 : 1.0;
    }
    bool all_zero = true;
    for (double x : v) all_zero = all_zero && x == 0.0;
    // Whitespace-only text, or tokens whose signs cancelled exactly.
    if (all_zero) v[bucket_of(fnv1a(seed_, text))] = 1.0;
    return l2_normalize(std::span<const double>(v));
}

std::vector<std::vector<double>> MockEmbedder::embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

HttpEmbedder::HttpEmbedder(EmbedProviderConfig cfg, std::string credential)
    : cfg_(std::move(cfg)), credential_(std::move(credential)) {}

std::string HttpEmbedder::build_request_body(std::string_view model_id, std::span<const std::string> texts) {
    json body = {{"model", model_id}, {"input", json::array()}};
    for (const auto& t : texts) body["input"].push_back(t);
    return body.dump();
}

std::vector<std::vector<double>> HttpEmbedder::parse_response_body(std::string_view body, std::size_t expected) try {
    const auto j = json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array()) {
        throw ProviderError(0, "embedding response has no data array", true);
    }
    const auto& data = j["data"];
    if (data.size() != expected) {
        throw ProviderError(0, "embedding response has " + std::to_string(data.size()) +
                                   " entries for " + std::to_string(expected) + " inputs",
                            true);
    }
    std::vector<std::vector<double>> out(expected);
    std::vector<bool> seen(expected, false);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& item = data[k];
        const std::size_t index = item.contains("index") ? item["index"].get<std::size_t>() : k;
        if (index >= expected || seen[index]) throw ProviderError(0, "bad embedding index", true);
        seen[index] = true;
        const auto& emb = item.at("embedding");
        if (!emb.is_array() || emb.empty()) throw ProviderError(0, "empty embedding", true);
        out[index].reserve(emb.size());
        for (const auto& x : emb) {
            if (!x.is_number()) throw ProviderError(0, "non-numeric embedding value", true);
            const double v = x.get<double>();
            if (!std::isfinite(v)) throw ProviderError(0, "non-finite embedding value", true);
            out[index].push_back(v);
        }
    }
    return out;
} catch (const json::exception& e) {
    throw ProviderError(0, std::string("malformed embedding response: ") + e.what(), true);
}

std::vector<std::vector<double>> HttpEmbedder::embed(std::span<const std::string> texts) {
    const auto endpoint = detail::parse_endpoint(cfg_.endpoint);
    const auto response = detail::post_json(endpoint, credential_,
                                            build_request_body(cfg_.model_id, texts), cfg_.timeout);
    if (response.status < 200 || response.status >= 300) detail::throw_http_error(response);
    return parse_response_body(response.body, texts.size());
}

}  // namespace enrichbench
