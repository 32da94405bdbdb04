#include "enrichbench/embed.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>
#include <support.hpp>

#include <atomic>
#include <cmath>
#include <cstring>

#include "enrichbench/errors.hpp"
#include "enrichbench/log.hpp"

using namespace enrichbench;
using testsupport::TempDir;

namespace {

const Sleeper no_sleep = [](std::chrono::milliseconds) {};

double mock_cosine(MockEmbedder& m, const std::string& a, const std::string& b) {
    const std::vector<std::string> texts{a, b};
    const auto v = m.embed(texts);
    return cosine_similarity(v[0], v[1]);
}

class CountingEmbedder final : public Embedder {
public:
    explicit CountingEmbedder(int dim) : inner_(dim, 42) {}
    std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
        ++calls;
        batch_sizes.push_back(texts.size());
        return inner_.embed(texts);
    }
    std::atomic<int> calls{0};
    std::vector<std::size_t> batch_sizes;

private:
    MockEmbedder inner_;
};

class ScriptedEmbedder final : public Embedder {
public:
    explicit ScriptedEmbedder(std::vector<std::vector<std::vector<double>>> replies) : replies_(std::move(replies)) {}
    std::vector<std::vector<double>> embed(std::span<const std::string>) override {
        if (next_ >= replies_.size()) throw ProviderError(503, "down", true);
        return replies_[next_++];
    }

private:
    std::vector<std::vector<std::vector<double>>> replies_;
    std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("mock embedder is deterministic and normalized") {
    MockEmbedder m(256, 42);
    const std::vector<std::string> texts{"a b c", "a b c", "card declined twice"};
    const auto v = m.embed(texts);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == v[1]);
    CHECK(v[0].size() == 256);
    CHECK(std::fabs(l2_norm(v[2]) - 1.0) < 1e-12);
    MockEmbedder again(256, 42);
    CHECK(again.embed(texts) == v);
    MockEmbedder other_seed(256, 43);
    CHECK(other_seed.embed(texts)[2] != v[2]);
    CHECK(mock_cosine(m, "a b c", "a b c") == 1.0);
}

TEST_CASE("mock embedder: shared tokens score higher (frozen values)") {
    MockEmbedder m(256, 42);
    const double near = mock_cosine(m, "a b c", "a b d");
    const double far = mock_cosine(m, "a b c", "x y z");
    CHECK(near > far);
    // Two of three tokens shared and no bucket collisions for seed 42.
    CHECK(std::fabs(near - 0.66666666666666674) < 1e-15);
    CHECK(far == 0.0);
}

TEST_CASE("mock embedder handles whitespace-only text") {
    MockEmbedder m(8, 1);
    const std::vector<std::string> texts{"   "};
    const auto v = m.embed(texts);
    CHECK(std::fabs(l2_norm(v[0]) - 1.0) < 1e-12);
}

TEST_CASE("embed_batch shapes, order and source hashes") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbedProviderConfig cfg;
    cfg.mock_dim = 64;
    EmbeddingService svc(cfg, cache);
    const std::vector<std::string> texts{"one", "two", "three", "four", "five"};
    const auto v = svc.embed_batch(texts);
    REQUIRE(v.size() == 5);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v[i].dim() == 64);
        CHECK(v[i].source_hash == Digest::of(texts[i]));
        CHECK(v[i].provider_id == "mock");
        CHECK(v[i].model_id == "hash-d64-s42");
    }
}

TEST_CASE("embed_batch: cache-first, dedupe, batching") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbedProviderConfig cfg;
    cfg.batch_size = 4;
    cfg.max_in_flight = 1;
    auto counting = std::make_shared<CountingEmbedder>(32);
    EmbeddingService svc(cfg, counting, cache, no_sleep);
    std::vector<std::string> texts;
    for (int i = 0; i < 10; ++i) texts.push_back("text " + std::to_string(i % 7));
    const auto cold = svc.embed_batch(texts);
    CHECK(counting->calls == 2);  // 7 unique texts in batches of 4
    CHECK(counting->batch_sizes == std::vector<std::size_t>{4, 3});
    CHECK(cold[0] == cold[7]);

    auto fresh = std::make_shared<CountingEmbedder>(32);
    EmbeddingService warm(cfg, fresh, cache, no_sleep);
    const auto again = warm.embed_batch(texts);
    CHECK(fresh->calls == 0);
    CHECK(warm.network_calls() == 0);
    CHECK(again == cold);
}

TEST_CASE("cold and warm results are bit-identical") {
    TempDir dir;
    store::Store cache(dir.path());
    const std::vector<std::string> texts{"alpha beta", "gamma"};
    EmbeddingService cold_svc(EmbedProviderConfig{}, cache);
    const auto cold = cold_svc.embed_batch(texts);
    EmbeddingService warm_svc(EmbedProviderConfig{}, cache);
    const auto warm = warm_svc.embed_batch(texts);
    CHECK(warm_svc.network_calls() == 0);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        REQUIRE(cold[i].values.size() == warm[i].values.size());
        CHECK(std::memcmp(cold[i].values.data(), warm[i].values.data(), cold[i].values.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("embed_batch retries, then gives up with ProviderError") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbedProviderConfig cfg;
    cfg.provider_id = "scripted";
    cfg.model_id = "s";
    cfg.max_retries = 2;
    const std::vector<std::string> one{"x"};
    EmbeddingService failing(cfg, std::make_shared<ScriptedEmbedder>(std::vector<std::vector<std::vector<double>>>{}),
                             cache, no_sleep);
    CHECK_THROWS_AS(failing.embed_batch(one), ProviderError);
    CHECK(failing.network_calls() == 3);
}

TEST_CASE("inconsistent dimensions are rejected") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbedProviderConfig cfg;
    cfg.provider_id = "scripted";
    cfg.model_id = "s";
    cfg.batch_size = 1;
    cfg.max_in_flight = 1;
    auto scripted = std::make_shared<ScriptedEmbedder>(
        std::vector<std::vector<std::vector<double>>>{{{1.0, 0.0}}, {{1.0, 0.0, 0.0}}});
    EmbeddingService svc(cfg, scripted, cache, no_sleep);
    const std::vector<std::string> texts{"a", "b"};
    CHECK_THROWS_AS(svc.embed_batch(texts), DimensionMismatch);
}

TEST_CASE("dimension is fixed across calls within one service") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbedProviderConfig cfg;
    cfg.provider_id = "scripted";
    cfg.model_id = "s";
    auto scripted =
        std::make_shared<ScriptedEmbedder>(std::vector<std::vector<std::vector<double>>>{{{1.0, 0.0}}, {{1.0, 0.0, 0.0}}});
    EmbeddingService svc(cfg, scripted, cache, no_sleep);
    CHECK(svc.embed_batch(std::vector<std::string>{"a"})[0].dim() == 2);
    CHECK_THROWS_AS(svc.embed_batch(std::vector<std::string>{"b"}), DimensionMismatch);
}

TEST_CASE("empty inputs are rejected") {
    TempDir dir;
    store::Store cache(dir.path());
    EmbeddingService svc(EmbedProviderConfig{}, cache);
    CHECK_THROWS_AS(svc.embed_batch(std::vector<std::string>{}), std::invalid_argument);
    CHECK_THROWS_AS(svc.embed_batch(std::vector<std::string>{"a", ""}), std::invalid_argument);
}

TEST_CASE("embedding config") {
    const auto cfg = embed_config_from_json(R"({"provider_id": "mock", "kind": "mock", "dim": 64, "seed": 7})");
    CHECK(cfg.mock_dim == 64);
    CHECK(cfg.effective_model_id() == "hash-d64-s7");
    CHECK_THROWS_AS(embed_config_from_json(R"({"kind": "mock", "dim": 1})").validate(), ConfigError);
    CHECK_THROWS_AS(embed_config_from_json(R"({"batch_size": 0})").validate(), ConfigError);
}

TEST_CASE("embedding wire format against a loopback server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string auth;
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits == 1) {
            res.status = 503;
            return;
        }
        auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json data = nlohmann::json::array();
        // Reply out of order; the adapter must place vectors by index.
        for (int i = static_cast<int>(body["input"].size()) - 1; i >= 0; --i) {
            const auto len = body["input"][i].get<std::string>().size();
            data.push_back({{"index", i}, {"embedding", {static_cast<double>(len), 1.0, 0.5}}});
        }
        res.set_content(nlohmann::json{{"data", data}, {"model", body["model"]}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::jthread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("ENRICHBENCH_TEST_EMBED_KEY", "ek", 1);
    auto cfg = embed_config_from_json(
        R"({"provider_id": "loop", "kind": "openai-compatible", "model_id": "e3", "auth_ref": "ENRICHBENCH_TEST_EMBED_KEY"})");
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/embeddings";
    cfg.initial_backoff = std::chrono::milliseconds(1);
    TempDir dir;
    store::Store cache(dir.path());
    EmbeddingService svc(cfg, cache);
    const auto v = svc.embed_batch(std::vector<std::string>{"a", "bbb"});
    server.stop();
    CHECK(auth == "Bearer ek");
    CHECK(svc.network_calls() == 2);
    CHECK(v[0].values == std::vector<double>{1.0, 1.0, 0.5});
    CHECK(v[1].values == std::vector<double>{3.0, 1.0, 0.5});
    CHECK(v[1].model_id == "e3");
}

TEST_CASE("embedding response parsing") {
    const auto body = nlohmann::json::parse(HttpEmbedder::build_request_body("m", std::vector<std::string>{"x", "y"}));
    CHECK(body["model"] == "m");
    CHECK(body["input"] == nlohmann::json::array({"x", "y"}));
    CHECK_THROWS_AS(HttpEmbedder::parse_response_body(R"({"data": []})", 1), ProviderError);
    CHECK_THROWS_AS(HttpEmbedder::parse_response_body("nope", 1), ProviderError);
    CHECK_THROWS_AS(HttpEmbedder::parse_response_body(R"({"data": [{"index": 0, "embedding": ["x"]}]})", 1),
                    ProviderError);
}
