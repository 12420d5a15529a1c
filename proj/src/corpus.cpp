#include "fewshot/corpus.hpp"

#include "fewshot/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fewshot {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<E, const char*> (&table)[N], const char* what) {
    for (const auto& [value, name] : table) {
        if (s == name) return value;
    }
    throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

template <typename E, std::size_t N>
std::string enum_name(E v, const std::pair<E, const char*> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

constexpr std::pair<TaskFormat, const char*> kTaskFormats[] = {
    {TaskFormat::single_text, "single_text"},
    {TaskFormat::sentence_pair, "sentence_pair"},
    {TaskFormat::relation_classification, "relation_classification"},
    {TaskFormat::entity_typing, "entity_typing"},
    {TaskFormat::document, "document"},
};
constexpr std::pair<TransferType, const char*> kTransferTypes[] = {
    {TransferType::class_transfer, "class"},
    {TransferType::domain, "domain"},
    {TransferType::task, "task"},
    {TransferType::pretraining, "pretraining"},
};
constexpr std::pair<Phase, const char*> kPhases[] = {
    {Phase::meta_train, "meta_train"},
    {Phase::meta_val, "meta_val"},
    {Phase::meta_test, "meta_test"},
};

std::vector<std::string> read_labels(const json& doc, const char* key) {
    std::vector<std::string> labels;
    if (!doc.contains(key)) return labels;
    if (!doc[key].is_array()) throw ConfigError(std::string("spec field '") + key + "' must be an array");
    for (const auto& v : doc[key]) {
        if (!v.is_string()) throw ConfigError(std::string("spec field '") + key + "' must hold strings");
        labels.push_back(text::canonical_label(v.get<std::string>()));
    }
    return labels;
}

void validate_spec(const DatasetSpec& spec) {
    if (spec.dataset_id.empty()) throw ConfigError("dataset_id must be nonempty");
    const std::string where = "dataset '" + spec.dataset_id + "': ";

    std::set<std::string> all;
    for (const auto* part : {&spec.labels_train, &spec.labels_val, &spec.labels_test}) {
        std::set<std::string> seen;
        for (const auto& l : *part) {
            if (l.empty()) throw ConfigError(where + "labels must be nonempty strings");
            if (!seen.insert(l).second) throw ConfigError(where + "duplicate label '" + l + "'");
        }
        all.insert(part->begin(), part->end());
    }

    if (spec.has_transfer(TransferType::class_transfer)) {
        if (spec.labels_train.empty() || spec.labels_val.empty() || spec.labels_test.empty()) {
            throw ConfigError(where + "class-transfer datasets need nonempty train/val/test labels");
        }
        if (all.size() != spec.labels_train.size() + spec.labels_val.size() + spec.labels_test.size()) {
            throw ConfigError(where + "class-transfer label partitions must be pairwise disjoint");
        }
    } else if (spec.phase == Phase::meta_test) {
        if (!spec.labels_train.empty() || !spec.labels_val.empty()) {
            throw ConfigError(where + "meta-test-only datasets must not declare train/val labels");
        }
    }
    if (spec.phase == Phase::meta_test && spec.labels_test.empty()) {
        throw ConfigError(where + "meta-test datasets need test labels");
    }
    for (const auto& [label, surface] : spec.choice_surface) {
        if (!all.count(label)) throw ConfigError(where + "choice_surface names unknown label '" + label + "'");
        if (surface.empty()) throw ConfigError(where + "choice_surface entries must be nonempty");
    }
}

std::size_t expected_spans(TaskFormat f) {
    switch (f) {
        case TaskFormat::relation_classification: return 2;
        case TaskFormat::entity_typing: return 1;
        default: return 0;
    }
}

}  // namespace

std::string to_string(TaskFormat f) { return enum_name(f, kTaskFormats); }
std::string to_string(TransferType t) { return enum_name(t, kTransferTypes); }
std::string to_string(Phase p) { return enum_name(p, kPhases); }
TaskFormat parse_task_format(const std::string& s) { return parse_enum(s, kTaskFormats, "task_format"); }
TransferType parse_transfer_type(const std::string& s) { return parse_enum(s, kTransferTypes, "transfer type"); }
Phase parse_phase(const std::string& s) { return parse_enum(s, kPhases, "phase"); }

bool DatasetSpec::has_transfer(TransferType t) const {
    return std::find(transfer_types.begin(), transfer_types.end(), t) != transfer_types.end();
}

const std::vector<std::string>& DatasetSpec::labels_for(Phase p) const {
    switch (p) {
        case Phase::meta_train: return labels_train;
        case Phase::meta_val: return labels_val;
        case Phase::meta_test: break;
    }
    return labels_test;
}

bool DatasetSpec::knows_label(const std::string& label) const {
    for (const auto* part : {&labels_train, &labels_val, &labels_test}) {
        if (std::find(part->begin(), part->end(), label) != part->end()) return true;
    }
    return false;
}

namespace {

std::string summarize(const std::vector<Issue>& issues) {
    std::ostringstream os;
    os << issues.size() << " validation error(s)";
    const std::size_t shown = std::min<std::size_t>(issues.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
        os << "; ";
        if (issues[i].line) os << "line " << issues[i].line << ": ";
        os << issues[i].message;
    }
    return os.str();
}

}  // namespace

DatasetValidationError::DatasetValidationError(std::vector<Issue> issues)
    : ValidationError(issues.empty() ? "validation_error" : issues.front().code, summarize(issues),
                      issues.empty() ? std::string() : issues.front().record,
                      issues.empty() ? 0 : issues.front().line),
      issues_(std::move(issues)) {}

DatasetSpec parse_dataset_spec(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed dataset spec: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("dataset spec must be a JSON object");

    DatasetSpec spec;
    try {
        spec.dataset_id = text::canonical_label(doc.at("dataset_id").get<std::string>());
        spec.task_format = parse_task_format(doc.at("task_format").get<std::string>());
        spec.phase = parse_phase(doc.at("phase").get<std::string>());
        std::set<TransferType> transfers;
        for (const auto& t : doc.value("transfer_types", json::array())) {
            transfers.insert(parse_transfer_type(t.get<std::string>()));
        }
        spec.transfer_types.assign(transfers.begin(), transfers.end());
        if (doc.contains("expected_test_example_count") && !doc["expected_test_example_count"].is_null()) {
            const auto& v = doc["expected_test_example_count"];
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                throw ConfigError("expected_test_example_count must be a nonnegative integer");
            }
            spec.expected_test_example_count = v.get<std::size_t>();
        }
        if (doc.contains("choice_surface")) {
            for (const auto& [label, surface] : doc["choice_surface"].items()) {
                spec.choice_surface[text::canonical_label(label)] = text::trim(surface.get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset spec field error: ") + e.what());
    }
    spec.labels_train = read_labels(doc, "labels_train");
    spec.labels_val = read_labels(doc, "labels_val");
    spec.labels_test = read_labels(doc, "labels_test");
    validate_spec(spec);
    return spec;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

DatasetSpec load_dataset_spec(const std::filesystem::path& path) {
    try {
        return parse_dataset_spec(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string dataset_spec_to_json(const DatasetSpec& spec) {
    json doc;
    doc["dataset_id"] = spec.dataset_id;
    doc["task_format"] = to_string(spec.task_format);
    doc["phase"] = to_string(spec.phase);
    doc["transfer_types"] = json::array();
    for (auto t : spec.transfer_types) doc["transfer_types"].push_back(to_string(t));
    doc["labels_train"] = spec.labels_train;
    doc["labels_val"] = spec.labels_val;
    doc["labels_test"] = spec.labels_test;
    doc["expected_test_example_count"] =
        spec.expected_test_example_count ? json(*spec.expected_test_example_count) : json(nullptr);
    if (!spec.choice_surface.empty()) doc["choice_surface"] = spec.choice_surface;
    return doc.dump(2);
}

std::vector<LabeledExample> parse_examples(std::istream& in, const DatasetSpec& spec) {
    std::vector<LabeledExample> examples;
    std::vector<Issue> issues;
    std::set<std::string> seen_ids;
    const std::size_t want_spans = expected_spans(spec.task_format);
    const bool want_text_b = spec.task_format == TaskFormat::sentence_pair;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        auto fail = [&](std::string code, std::string message, std::string record) {
            issues.push_back({std::move(code), std::move(message), std::move(record), line_no});
        };

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail("parse_error", std::string("malformed JSON: ") + e.what(), "");
            continue;
        }
        if (!obj.is_object()) {
            fail("parse_error", "record is not a JSON object", "");
            continue;
        }

        LabeledExample ex;
        const auto id_it = obj.find("example_id");
        if (id_it == obj.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
            fail("missing_field", "record lacks a nonempty string example_id", "");
            continue;
        }
        ex.example_id = id_it->get<std::string>();
        const std::string& id = ex.example_id;
        bool ok = true;

        if (!obj.contains("text_a") || !obj["text_a"].is_string()) {
            fail("missing_field", "record '" + id + "' lacks string text_a", id);
            ok = false;
        } else {
            ex.text_a = obj["text_a"].get<std::string>();
        }

        if (!obj.contains("label")) {
            fail("missing_field", "record '" + id + "' lacks a label", id);
            ok = false;
        } else if (obj["label"].is_array()) {
            fail("multi_label", "record '" + id + "' carries multiple labels; single-label records only", id);
            ok = false;
        } else if (!obj["label"].is_string()) {
            fail("missing_field", "record '" + id + "' label must be a string", id);
            ok = false;
        } else {
            try {
                ex.label = text::canonical_label(obj["label"].get<std::string>());
            } catch (const Error& e) {
                fail("parse_error", "record '" + id + "': " + e.what(), id);
                ok = false;
            }
            if (ok && !spec.knows_label(ex.label)) {
                fail("unknown_label", "record '" + id + "' has unknown label '" + ex.label + "'", id);
                ok = false;
            }
        }

        const bool has_b = obj.contains("text_b") && !obj["text_b"].is_null();
        if (has_b && !obj["text_b"].is_string()) {
            fail("parse_error", "record '" + id + "' text_b must be a string", id);
            ok = false;
        } else if (want_text_b && !has_b) {
            fail("text_b_missing", "record '" + id + "' needs text_b for sentence_pair data", id);
            ok = false;
        } else if (!want_text_b && has_b) {
            fail("text_b_unexpected", "record '" + id + "' has text_b but task is " + to_string(spec.task_format), id);
            ok = false;
        } else if (has_b) {
            ex.text_b = obj["text_b"].get<std::string>();
        }

        const bool has_spans = obj.contains("mention_spans") && !obj["mention_spans"].is_null();
        if (has_spans) {
            std::vector<Span> spans;
            bool well_formed = obj["mention_spans"].is_array();
            if (well_formed) {
                for (const auto& s : obj["mention_spans"]) {
                    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer() ||
                        s[0].get<long long>() < 0 || s[1].get<long long>() < 0) {
                        well_formed = false;
                        break;
                    }
                    spans.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
                }
            }
            if (!well_formed) {
                fail("parse_error", "record '" + id + "' mention_spans must be [[start,end],...] of nonnegative integers", id);
                ok = false;
            } else if (spans.size() != want_spans) {
                fail("span_count", "record '" + id + "' has " + std::to_string(spans.size()) +
                                       " mention spans, expected " + std::to_string(want_spans), id);
                ok = false;
            } else {
                const std::size_t len = text::codepoint_length(ex.text_a);
                for (const auto& s : spans) {
                    if (s.start >= s.end || s.end > len) {
                        fail("span_out_of_bounds", "record '" + id + "' span [" + std::to_string(s.start) + "," +
                                                       std::to_string(s.end) + ") outside text_a of length " +
                                                       std::to_string(len), id);
                        ok = false;
                    }
                }
                if (ok && spans.size() == 2 && spans[0].start < spans[1].end && spans[1].start < spans[0].end) {
                    fail("span_overlap", "record '" + id + "' mention spans overlap", id);
                    ok = false;
                }
                ex.mention_spans = std::move(spans);
            }
        } else if (want_spans > 0) {
            fail("span_count", "record '" + id + "' needs " + std::to_string(want_spans) + " mention span(s)", id);
            ok = false;
        }

        if (!seen_ids.insert(id).second) {
            fail("duplicate_example_id", "duplicate example_id '" + id + "'", id);
            ok = false;
        }
        if (ok) examples.push_back(std::move(ex));
    }
    if (!issues.empty()) throw DatasetValidationError(std::move(issues));
    return examples;
}

Dataset load_dataset(const std::filesystem::path& spec_path, const std::filesystem::path& data_path) {
    Dataset ds;
    ds.spec = load_dataset_spec(spec_path);
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + data_path.string() + "'");
    ds.examples = parse_examples(in, ds.spec);
    return ds;
}

std::string example_to_jsonl(const LabeledExample& ex) {
    json obj;
    obj["example_id"] = ex.example_id;
    obj["text_a"] = ex.text_a;
    if (ex.text_b) obj["text_b"] = *ex.text_b;
    if (ex.mention_spans) {
        obj["mention_spans"] = json::array();
        for (const auto& s : *ex.mention_spans) obj["mention_spans"].push_back({s.start, s.end});
    }
    obj["label"] = ex.label;
    return obj.dump();
}

void write_examples(std::ostream& out, const std::vector<LabeledExample>& examples) {
    for (const auto& ex : examples) out << example_to_jsonl(ex) << '\n';
}

const std::vector<LabeledExample>& ClassPool::examples_for(const std::string& label) const {
    const auto it = members_.find(label);
    if (it == members_.end()) throw ConfigError("label '" + label + "' is not in this pool");
    return it->second;
}

std::size_t ClassPool::total_examples() const {
    std::size_t n = 0;
    for (const auto& [_, v] : members_) n += v.size();
    return n;
}

ClassPool class_pool(const DatasetSpec& spec, const std::vector<LabeledExample>& examples, Phase phase) {
    const auto& labels = spec.labels_for(phase);
    if (labels.empty()) {
        throw ConfigError("dataset '" + spec.dataset_id + "' declares no labels for phase " + to_string(phase));
    }
    ClassPool pool;
    pool.labels_ = labels;
    for (const auto& l : labels) pool.members_[l];
    for (const auto& ex : examples) {
        const auto it = pool.members_.find(ex.label);
        if (it != pool.members_.end()) it->second.push_back(ex);
    }
    for (const auto& l : labels) {
        if (pool.members_[l].empty()) {
            throw ValidationError("empty_class",
                                  "dataset '" + spec.dataset_id + "' has no examples for label '" + l + "'", l);
        }
    }
    return pool;
}

}  // namespace fewshot
