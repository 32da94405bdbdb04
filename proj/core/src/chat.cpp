#include "enrichbench/chat.hpp"

#include <json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "enrichbench/errors.hpp"
#include "enrichbench/retry.hpp"
#include "enrichbench/textprep.hpp"
#include "http.hpp"

using nlohmann::json;

namespace enrichbench {

namespace {

std::string read_text(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + std::string(what) + " " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string upper_first(std::string text) {
    if (text.empty()) return text;
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    int32_t i = 0;
    UChar32 c;
    U8_NEXT(s, i, static_cast<int32_t>(text.size()), c);
    if (c < 0) return text;
    const UChar32 upper = u_toupper(c);
    if (upper == c) return text;
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, upper);
    return std::string(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n)) +
           text.substr(static_cast<std::size_t>(i));
}

bool is_trailing_punct(char c) { return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':'; }

}  // namespace

std::string_view chat_kind_name(ChatProviderKind kind) noexcept {
    switch (kind) {
        case ChatProviderKind::openai_compatible: return "openai-compatible";
        case ChatProviderKind::identity: return "identity";
        case ChatProviderKind::rulebook: return "rulebook";
        case ChatProviderKind::fault: return "fault";
    }
    return "unknown";
}

ChatProviderKind parse_chat_kind(std::string_view name) {
    for (auto kind : {ChatProviderKind::openai_compatible, ChatProviderKind::identity,
                      ChatProviderKind::rulebook, ChatProviderKind::fault}) {
        if (chat_kind_name(kind) == name) return kind;
    }
    throw ConfigError("unknown chat provider kind: " + std::string(name));
}

void ChatProviderConfig::validate() const {
    if (provider_id.empty()) throw ConfigError("chat provider_id must be non-empty");
    if (model_id.empty()) throw ConfigError("chat model_id must be non-empty");
    if (max_retries < 0 || max_retries > 10) throw ConfigError("max_retries must be in [0, 10]");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (temperature && !(*temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
    if (kind == ChatProviderKind::fault && fault_inner == ChatProviderKind::fault) {
        throw ConfigError("fault provider cannot wrap another fault provider");
    }
}

ChatProviderConfig chat_config_from_json(std::string_view json_text) {
    ChatProviderConfig cfg;
    try {
        const auto j = json::parse(json_text);
        cfg.kind = parse_chat_kind(j.value("kind", std::string(chat_kind_name(cfg.kind))));
        cfg.provider_id = j.value("provider_id", std::string(chat_kind_name(cfg.kind)));
        cfg.model_id = j.value("model_id", cfg.provider_id);
        cfg.endpoint = j.value("endpoint", std::string{});
        cfg.auth_ref = j.value("auth_ref", std::string{});
        if (j.contains("temperature")) {
            const auto& t = j.at("temperature");
            if (t.is_string()) {
                if (t.get<std::string>() != "provider-default") {
                    throw ConfigError("temperature must be a number or \"provider-default\"");
                }
            } else {
                cfg.temperature = t.get<double>();
            }
        }
        cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", cfg.timeout.count()));
        cfg.max_retries = j.value("max_retries", cfg.max_retries);
        cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
        cfg.initial_backoff =
            std::chrono::milliseconds(j.value("initial_backoff_ms", cfg.initial_backoff.count()));
        cfg.max_backoff = std::chrono::milliseconds(j.value("max_backoff_ms", cfg.max_backoff.count()));
        if (j.contains("rulebook_path")) cfg.rulebook_path = j.at("rulebook_path").get<std::string>();
        cfg.fault_schedule = j.value("fault_schedule", std::vector<std::string>{});
        if (j.contains("fault_inner")) {
            cfg.fault_inner = parse_chat_kind(j.at("fault_inner").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid chat provider config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ChatProviderConfig load_chat_config(const std::filesystem::path& path) {
    auto cfg = chat_config_from_json(read_text(path, "provider config"));
    if (!cfg.rulebook_path.empty() && cfg.rulebook_path.is_relative()) {
        cfg.rulebook_path = path.parent_path() / cfg.rulebook_path;
    }
    return cfg;
}

std::shared_ptr<ChatProvider> make_chat_provider(const ChatProviderConfig& cfg) {
    cfg.validate();
    const auto simple = [&](ChatProviderKind kind) -> std::shared_ptr<ChatProvider> {
        switch (kind) {
            case ChatProviderKind::identity: return std::make_shared<IdentityChatProvider>();
            case ChatProviderKind::rulebook:
                return std::make_shared<RulebookChatProvider>(Rulebook::load(
                    cfg.rulebook_path.empty() ? Rulebook::default_path() : cfg.rulebook_path));
            case ChatProviderKind::openai_compatible:
                detail::parse_endpoint(cfg.endpoint);
                return std::make_shared<HttpChatProvider>(cfg, detail::credential_from_env(cfg.auth_ref));
            case ChatProviderKind::fault: break;
        }
        throw ConfigError("unsupported chat provider kind");
    };
    if (cfg.kind == ChatProviderKind::fault) {
        return std::make_shared<FaultInjectingChatProvider>(simple(cfg.fault_inner), cfg.fault_schedule);
    }
    return simple(cfg.kind);
}

// Rulebook ------------------------------------------------------------------

Rulebook Rulebook::from_json(std::string_view json_text) {
    Rulebook rb;
    try {
        const auto j = json::parse(json_text);
        const auto acronyms = j.value("acronyms", json::object());
        const auto spelling = j.value("spelling", json::object());
        for (const auto& [k, v] : acronyms.items()) {
            rb.acronyms_.emplace(to_lower_ascii(k), v.get<std::string>());
        }
        for (const auto& [k, v] : spelling.items()) {
            rb.spelling_.emplace(to_lower_ascii(k), v.get<std::string>());
        }
        rb.closers_ = j.value("closers", std::vector<std::string>{});
        rb.terminal_punctuation_ = j.value("terminal_punctuation", rb.terminal_punctuation_);
        rb.min_words_for_punctuation_ =
            j.value("min_words_for_terminal_punctuation", rb.min_words_for_punctuation_);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid rulebook: ") + e.what());
    }
    return rb;
}

Rulebook Rulebook::load(const std::filesystem::path& path) { return from_json(read_text(path, "rulebook")); }

std::filesystem::path Rulebook::default_path() {
    if (const char* env = std::getenv("ENRICHBENCH_RULEBOOK"); env && *env) return env;
    const std::filesystem::path installed = ENRICHBENCH_DEFAULT_RULEBOOK;
    if (std::filesystem::exists(installed)) return installed;
    return ENRICHBENCH_SOURCE_RULEBOOK;
}

std::string Rulebook::apply(std::string_view text) const {
    auto words = textprep::tokenize(text);
    if (words.empty()) return std::string(text);

    std::string last_core;
    for (auto& word : words) {
        std::size_t core_end = word.size();
        while (core_end > 0 && is_trailing_punct(word[core_end - 1])) --core_end;
        const std::string suffix = word.substr(core_end);
        const std::string key = to_lower_ascii(std::string_view(word).substr(0, core_end));
        std::string core = word.substr(0, core_end);
        if (auto it = acronyms_.find(key); it != acronyms_.end()) {
            core = it->second;
        } else if (auto sp = spelling_.find(key); sp != spelling_.end()) {
            core = sp->second;
        }
        last_core = to_lower_ascii(core);
        word = core + suffix;
    }
    words.front() = upper_first(words.front());

    const bool closer = std::find(closers_.begin(), closers_.end(), last_core) != closers_.end();
    if (words.size() > 1 && closer) {
        auto& prev = words[words.size() - 2];
        if (!prev.empty() && !is_trailing_punct(prev.back())) prev.push_back(',');
    }

    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    const char final_char = out.back();
    if (words.size() >= min_words_for_punctuation_ && final_char != '.' && final_char != '!' &&
        final_char != '?') {
        out += terminal_punctuation_;
    }
    return out;
}

// Fault injection -------------------------------------------------------------

FaultInjectingChatProvider::FaultInjectingChatProvider(std::shared_ptr<ChatProvider> inner,
                                                       std::vector<std::string> schedule)
    : inner_(std::move(inner)), schedule_(std::move(schedule)) {
    for (const auto& step : schedule_) {
        if (step == "ok" || step == "fail" || step == "transport") continue;
        try {
            std::size_t used = 0;
            const int status = std::stoi(step, &used);
            if (used == step.size() && status >= 100 && status <= 599) continue;
        } catch (const std::exception&) {
        }
        throw ConfigError("invalid fault schedule entry: " + step);
    }
}

std::string FaultInjectingChatProvider::complete(const ChatRequest& request) {
    std::string step = "ok";
    {
        std::lock_guard lock(mutex_);
        if (calls_ < schedule_.size()) step = schedule_[calls_];
        ++calls_;
    }
    if (step == "fail") throw ProviderError(503, "injected failure", true);
    if (step == "transport") throw ProviderError(0, "injected transport failure", true);
    if (step != "ok") {
        const int status = std::stoi(step);
        if (status < 200 || status >= 300) {
            throw ProviderError(status, "injected status " + step, is_retryable_status(status));
        }
    }
    return inner_->complete(request);
}

std::size_t FaultInjectingChatProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

// HTTP ------------------------------------------------------------------------

HttpChatProvider::HttpChatProvider(ChatProviderConfig cfg, std::string credential)
    : cfg_(std::move(cfg)), credential_(std::move(credential)) {}

std::string HttpChatProvider::build_request_body(const ChatRequest& request) {
    json body = {{"model", request.model_id},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", request.system}},
                               {{"role", "user"}, {"content", request.user}}})}};
    if (request.temperature) body["temperature"] = *request.temperature;
    return body.dump();
}

std::string HttpChatProvider::parse_response_body(std::string_view body) {
    const auto j = json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ProviderError(0, "response is not JSON", true);
    const auto* content = [&]() -> const json* {
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) return nullptr;
        const auto& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content")) return nullptr;
        return &choice["message"]["content"];
    }();
    if (content == nullptr || !content->is_string()) {
        throw ProviderError(0, "response has no choices[0].message.content", true);
    }
    auto text = content->get<std::string>();
    if (text.empty()) throw ProviderError(0, "empty completion", true);
    return text;
}

std::string HttpChatProvider::complete(const ChatRequest& request) {
    const auto endpoint = detail::parse_endpoint(cfg_.endpoint);
    const auto response =
        detail::post_json(endpoint, credential_, build_request_body(request), cfg_.timeout);
    if (response.status < 200 || response.status >= 300) detail::throw_http_error(response);
    return parse_response_body(response.body);
}

}  // namespace enrichbench
