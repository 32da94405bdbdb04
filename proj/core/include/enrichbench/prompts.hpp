#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace enrichbench {

// A system instruction that steers the rewriting model.
struct PromptTemplate {
    std::string id;
    std::string system_text;
    std::string description;

    bool operator==(const PromptTemplate&) const = default;
};

// The four shipped rewriting prompts, "paper-1" .. "paper-4", verbatim.
//
// paper-3 and paper-4 are byte-identical: the published prompt list prints
// the same text twice even though the two were scored separately. Both are
// kept as-is rather than guessing at a different fourth prompt.
const std::vector<PromptTemplate>& builtin_prompts();

// Ordered set of templates with unique ids and non-empty texts.
class PromptRegistry {
public:
    PromptRegistry();  // seeded with builtin_prompts()

    // Throws ConfigError on a duplicate id or empty system_text.
    void add(PromptTemplate prompt);
    std::optional<PromptTemplate> find(std::string_view id) const;
    const std::vector<PromptTemplate>& all() const noexcept { return prompts_; }

private:
    std::vector<PromptTemplate> prompts_;
};

// Reads a user prompt file: JSON {"id", "system_text", "description"?}.
PromptTemplate load_prompt_file(const std::filesystem::path& path);

}  // namespace enrichbench
