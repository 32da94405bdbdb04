#include "enrichbench/prompts.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

#include "enrichbench/errors.hpp"

namespace enrichbench {

namespace {

constexpr std::string_view kQuestionAwareEnhancer =
    "You are a text enhancer tasked with pre-processing text for embedding models. Your goals "
    "are to enrich the text without losing the context, correct grammatical inaccuracies, "
    "clarify obscure references, normalize terminology, disambiguate polysemous words, expand "
    "acronyms and abbreviations, incorporate relevant metadata, improve sentence structure for "
    "clarity, and infer missing information where necessary. Your enhancements should make the "
    "text more informative and easier to understand, thereby improving the performance of "
    "embedding models in processing and analyzing the text. If a user asks a question, then you "
    "should return an improved version of the question. If the user did not ask a question, "
    "then you should return an improved version of an answer.";

constexpr std::string_view kContextEnhancer =
    "You are a text enhancer tasked with preprocessing text for embedding models. Your goals are "
    "to enrich the text with additional context, correct grammatical inaccuracies, clarify "
    "obscure references, normalize terminology, disambiguate polysemous words, expand acronyms "
    "and abbreviations, incorporate relevant metadata, improve sentence structure for clarity, "
    "and infer missing information where necessary. Your enhancements should make the text more "
    "informative and easier to understand, thereby improving the performance of embedding models "
    "in processing and analyzing the text.";

constexpr std::string_view kConciseOptimizer =
    "You are a text enhancer to make better embeddings, your task is to optimize text for "
    "embedding models by enriching, clarifying, and standardizing it. This involves improving "
    "grammar, resolving ambiguities, and inferring missing information to enhance model "
    "performance.";

}  // namespace

const std::vector<PromptTemplate>& builtin_prompts() {
    static const std::vector<PromptTemplate> prompts = {
        {"paper-1", std::string(kQuestionAwareEnhancer),
         "General enrichment; returns an improved question for questions, an improved answer "
         "otherwise."},
        {"paper-2", std::string(kContextEnhancer),
         "Enrichment with additional context, grammar correction and terminology normalization."},
        {"paper-3", std::string(kConciseOptimizer),
         "Concise instruction to enrich, clarify and standardize text for embeddings."},
        {"paper-4", std::string(kConciseOptimizer),
         "Published as a separate variant; text identical to paper-3."},
    };
    return prompts;
}

PromptRegistry::PromptRegistry() : prompts_(builtin_prompts()) {}

void PromptRegistry::add(PromptTemplate prompt) {
    if (prompt.id.empty()) throw ConfigError("prompt id must be non-empty");
    if (prompt.system_text.empty()) throw ConfigError("prompt " + prompt.id + " has empty text");
    if (find(prompt.id)) throw ConfigError("duplicate prompt id " + prompt.id);
    prompts_.push_back(std::move(prompt));
}

std::optional<PromptTemplate> PromptRegistry::find(std::string_view id) const {
    auto it = std::find_if(prompts_.begin(), prompts_.end(),
                           [&](const PromptTemplate& p) { return p.id == id; });
    if (it == prompts_.end()) return std::nullopt;
    return *it;
}

PromptTemplate load_prompt_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt file " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        PromptTemplate p{j.at("id").get<std::string>(), j.at("system_text").get<std::string>(),
                         j.value("description", std::string{})};
        if (p.id.empty() || p.system_text.empty()) {
            throw ConfigError("prompt file " + path.string() + " needs non-empty id and system_text");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid prompt file " + path.string() + ": " + e.what());
    }
}

}  // namespace enrichbench
