#pragma once

#include "fewshot/error.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fewshot {

enum class TaskFormat { single_text, sentence_pair, relation_classification, entity_typing, document };
enum class TransferType { class_transfer, domain, task, pretraining };
enum class Phase { meta_train, meta_val, meta_test };

std::string to_string(TaskFormat f);
std::string to_string(TransferType t);
std::string to_string(Phase p);
TaskFormat parse_task_format(const std::string& s);
TransferType parse_transfer_type(const std::string& s);
Phase parse_phase(const std::string& s);

/// Declarative description of one classification dataset.
struct DatasetSpec {
    std::string dataset_id;
    TaskFormat task_format = TaskFormat::single_text;
    std::vector<TransferType> transfer_types;  // sorted, unique
    std::vector<std::string> labels_train;
    std::vector<std::string> labels_val;
    std::vector<std::string> labels_test;
    Phase phase = Phase::meta_test;
    std::optional<std::size_t> expected_test_example_count;
    /// Optional surface form shown to a model for a label, e.g. the NLI
    /// mapping entailment -> "Yes". Labels without an entry render as-is.
    std::map<std::string, std::string> choice_surface;

    bool has_transfer(TransferType t) const;
    const std::vector<std::string>& labels_for(Phase p) const;
    /// True if `label` appears in any of the three label partitions.
    bool knows_label(const std::string& label) const;
};

struct Span {
    std::size_t start = 0;  // code-point offset into text_a, inclusive
    std::size_t end = 0;    // exclusive
    friend bool operator==(const Span&, const Span&) = default;
};

struct LabeledExample {
    std::string example_id;
    std::string text_a;
    std::optional<std::string> text_b;
    std::optional<std::vector<Span>> mention_spans;
    std::string label;
    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct Dataset {
    DatasetSpec spec;
    std::vector<LabeledExample> examples;
};

/// One problem found while validating a dataset.
struct Issue {
    std::string code;
    std::string message;
    std::string record;     // example id when known
    std::size_t line = 0;   // 1-based line in the data file, 0 if n/a
};

/// Raised when a dataset fails validation; carries every issue found.
class DatasetValidationError : public ValidationError {
public:
    explicit DatasetValidationError(std::vector<Issue> issues);
    const std::vector<Issue>& issues() const noexcept { return issues_; }

private:
    std::vector<Issue> issues_;
};

/// Parses and validates a dataset spec document (JSON text).
DatasetSpec parse_dataset_spec(const std::string& json_text);
DatasetSpec load_dataset_spec(const std::filesystem::path& path);
std::string dataset_spec_to_json(const DatasetSpec& spec);

/// Parses a JSONL data stream against `spec`. Examples keep file order.
/// Throws DatasetValidationError listing every malformed record.
std::vector<LabeledExample> parse_examples(std::istream& in, const DatasetSpec& spec);

/// Loads and validates a spec + data file pair.
Dataset load_dataset(const std::filesystem::path& spec_path,
                     const std::filesystem::path& data_path);

/// JSONL line (no trailing newline) for one example.
std::string example_to_jsonl(const LabeledExample& ex);
void write_examples(std::ostream& out, const std::vector<LabeledExample>& examples);

/// Examples of a phase grouped by label, keyed in the phase's declared
/// label order. File order is preserved inside each group.
class ClassPool {
public:
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<LabeledExample>& examples_for(const std::string& label) const;
    std::size_t size() const { return labels_.size(); }
    std::size_t total_examples() const;

private:
    friend ClassPool class_pool(const DatasetSpec&, const std::vector<LabeledExample>&, Phase);
    std::vector<std::string> labels_;
    std::map<std::string, std::vector<LabeledExample>> members_;
};

/// Throws ValidationError("empty_class") naming the first label of the phase
/// with no examples, ConfigError if the phase has no labels.
ClassPool class_pool(const DatasetSpec& spec, const std::vector<LabeledExample>& examples,
                     Phase phase);

}  // namespace fewshot
