#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace enrichbench {

// One rewrite request: the prompt goes in the system role, the document in
// the user role. No few-shot turns.
struct ChatRequest {
    std::string model_id;
    std::string system;
    std::string user;
    std::optional<double> temperature;  // nullopt: leave it to the provider
};

// Implementations must be safe to call from several threads at once and
// report failures as ProviderError.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

enum class ChatProviderKind { openai_compatible, identity, rulebook, fault };

struct ChatProviderConfig {
    std::string provider_id = "identity";
    ChatProviderKind kind = ChatProviderKind::identity;
    std::string model_id = "identity";
    std::string endpoint;  // full URL of the chat-completions route
    std::string auth_ref;  // name of the env var holding the API key
    std::optional<double> temperature;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;
    int max_in_flight = 4;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{20'000};

    // Mock-only settings.
    std::filesystem::path rulebook_path;      // empty: the shipped data/rulebook.json
    std::vector<std::string> fault_schedule;  // see FaultInjectingChatProvider
    ChatProviderKind fault_inner = ChatProviderKind::identity;

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

std::string_view chat_kind_name(ChatProviderKind kind) noexcept;
ChatProviderKind parse_chat_kind(std::string_view name);

// Parses the JSON provider config file. Durations are given as *_ms fields;
// "temperature" may be a number or the string "provider-default".
ChatProviderConfig load_chat_config(const std::filesystem::path& path);
ChatProviderConfig chat_config_from_json(std::string_view json_text);

// Builds the provider described by cfg. HTTP providers resolve their
// credential here and throw ConfigError when the auth_ref variable is unset.
std::shared_ptr<ChatProvider> make_chat_provider(const ChatProviderConfig& cfg);

class IdentityChatProvider final : public ChatProvider {
public:
    std::string complete(const ChatRequest& request) override { return request.user; }
};

// Dictionary-driven stand-in for an LLM rewrite, loaded from a JSON file:
//
//   {"acronyms": {"atm": "ATM (automated teller machine)", ...},
//    "spelling": {"plz": "please", ...},
//    "closers": ["please", ...],
//    "terminal_punctuation": ".",
//    "min_words_for_terminal_punctuation": 2}
//
// Rules, in order:
//  1. split on whitespace; each word's trailing .,!?;: is set aside;
//  2. the lowercased word is looked up in acronyms, then spelling;
//  3. the first character of the text is upper-cased;
//  4. if the last word (after replacement) is a closer and there is more
//     than one word, a comma is attached to the preceding word;
//  5. texts of at least min_words words that do not already end in . ! or ?
//     get terminal_punctuation appended.
class Rulebook {
public:
    static Rulebook load(const std::filesystem::path& path);
    static Rulebook from_json(std::string_view json_text);
    // Location of the shipped dictionary.
    static std::filesystem::path default_path();

    std::string apply(std::string_view text) const;

private:
    std::map<std::string, std::string, std::less<>> acronyms_;
    std::map<std::string, std::string, std::less<>> spelling_;
    std::vector<std::string> closers_;
    std::string terminal_punctuation_ = ".";
    std::size_t min_words_for_punctuation_ = 2;
};

class RulebookChatProvider final : public ChatProvider {
public:
    explicit RulebookChatProvider(Rulebook rulebook) : rulebook_(std::move(rulebook)) {}
    std::string complete(const ChatRequest& request) override { return rulebook_.apply(request.user); }

private:
    Rulebook rulebook_;
};

// Wraps another provider with a scripted failure schedule consumed one entry
// per call, across all threads. Entries:
//   "ok"                   delegate to the inner provider
//   "fail"                 HTTP 503 (retryable)
//   "transport"            transport error (status 0, retryable)
//   "<status>" e.g. "429"  that HTTP status, retryable per the usual rules
// Once the schedule is exhausted every call delegates.
class FaultInjectingChatProvider final : public ChatProvider {
public:
    FaultInjectingChatProvider(std::shared_ptr<ChatProvider> inner, std::vector<std::string> schedule);
    std::string complete(const ChatRequest& request) override;

    std::size_t calls() const;

private:
    std::shared_ptr<ChatProvider> inner_;
    std::vector<std::string> schedule_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

// chat-completions over HTTP(S).
//
// Request body:
//   {"model": model_id,
//    "messages": [{"role": "system", "content": system},
//                 {"role": "user", "content": user}],
//    "temperature": t}            // omitted when provider default
// Headers: "Authorization: Bearer <credential>", JSON content type.
// Response: the text at choices[0].message.content. A missing or empty
// content string is a retryable ProviderError.
class HttpChatProvider final : public ChatProvider {
public:
    HttpChatProvider(ChatProviderConfig cfg, std::string credential);
    std::string complete(const ChatRequest& request) override;

    // Exposed for wire-format tests.
    static std::string build_request_body(const ChatRequest& request);
    static std::string parse_response_body(std::string_view body);

private:
    ChatProviderConfig cfg_;
    std::string credential_;
};

}  // namespace enrichbench
