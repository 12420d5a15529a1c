#pragma once

#include "fewshot/corpus.hpp"
#include "fewshot/manifest.hpp"
#include "fewshot/report.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fewshot {

/// Literal two-character delimiter token (backslash, 'n') placed between
/// prompt segments, as multiple-choice QA models expect.
inline constexpr std::string_view kLiteralNewline = "\\n";
inline constexpr std::size_t kMaxChoices = 10;

struct PromptTemplate {
    TaskFormat task_format = TaskFormat::single_text;
    /// Placeholders: {text_a}, {text_b}, {mention_1}, {mention_2}.
    std::string question_pattern;
    std::string field_delimiter{kLiteralNewline};
    /// Label -> text shown to the model (e.g. entailment -> "Yes").
    std::map<std::string, std::string> choice_surface;

    /// Throws ConfigError if a placeholder cannot be filled for task_format.
    void validate() const;
};

/// Standard template for a dataset's task format, carrying its declared
/// choice surface forms.
PromptTemplate default_template(const DatasetSpec& spec);

struct Choice {
    char letter = 'A';
    std::string label;
    std::string surface;
    friend bool operator==(const Choice&, const Choice&) = default;
};

struct Prompt {
    std::string episode_id;
    std::string example_id;
    std::string rendered_text;
    std::vector<Choice> choices;
};

/// Lettered choices in the episode's label_set order.
std::vector<Choice> make_choices(const PromptTemplate& tmpl, const std::vector<std::string>& label_set);

/// "(A) x (B) y ..."
std::string render_choices(const std::vector<Choice>& choices);

Prompt build_prompt(const PromptTemplate& tmpl, const Episode& episode, const LabeledExample& example);

/// Maps free-form generated text back to one of `choices` and returns its
/// label. Cascade: normalized exact match, leading letter "(X)" / "X)" /
/// bare "X", earliest whole-word occurrence of a choice, largest token
/// overlap (ties and no overlap resolve to the earliest choice).
/// Never fails for nonempty `choices`.
std::string normalize_answer(std::string_view generated, const std::vector<Choice>& choices);

/// Writes one "prompt" record per test example and one "train" record per
/// few-shot training example (with its answer) for offline inference.
void write_prompt_dump(std::ostream& out, const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets);

/// Prompts for every test example of `episode`, in test order.
std::vector<Prompt> episode_prompts(const Episode& episode, const Dataset& dataset);

// Reference predictors. All are deterministic; labels always come from the
// episode's label_set.
PredictionSet predict_random_uniform(const BenchmarkManifest& manifest, std::uint64_t seed);
PredictionSet predict_majority_train(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                     std::uint64_t seed);
PredictionSet predict_oracle(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets);

struct RemoteOptions {
    std::string endpoint;  // e.g. http://127.0.0.1:8080 or http://host/prefix
    std::size_t batch_size = 32;
    std::chrono::seconds timeout{60};
    unsigned retries = 3;
    unsigned max_concurrency = 4;
};

/// POSTs prompts in batches to {endpoint}/v1/predict and normalizes every
/// answer against its prompt's choices. Output order matches input order.
/// Transport failures (no response, non-200, malformed JSON) are retried;
/// a wrong answer count is not.
std::vector<std::string> predict_remote(const std::vector<Prompt>& prompts, const RemoteOptions& options);

PredictionSet predict_remote_manifest(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                      const RemoteOptions& options, ProtocolTag tag);

}  // namespace fewshot
