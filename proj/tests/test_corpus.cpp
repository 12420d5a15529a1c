#include "fewshot/corpus.hpp"
#include "fewshot/text.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace fewshot;

namespace {

DatasetSpec spec_of(TaskFormat f, std::vector<std::string> labels) {
    DatasetSpec s;
    s.dataset_id = "fixture";
    s.task_format = f;
    s.transfer_types = {TransferType::domain};
    s.labels_test = std::move(labels);
    return s;
}

std::vector<Issue> issues_of(const std::string& jsonl, const DatasetSpec& spec) {
    std::istringstream in(jsonl);
    try {
        parse_examples(in, spec);
    } catch (const DatasetValidationError& e) {
        return e.issues();
    }
    return {};
}

std::string first_code(const std::string& jsonl, const DatasetSpec& spec) {
    const auto issues = issues_of(jsonl, spec);
    return issues.empty() ? "" : issues.front().code;
}

}  // namespace

TEST_CASE("text helpers") {
    CHECK(text::nfc("Cafe\xCC\x81") == "Caf\xC3\xA9");
    CHECK(text::canonical_label("  entailment\t") == "entailment");
    CHECK(text::canonical_label("Positive") != text::canonical_label("positive"));
    CHECK(text::codepoint_length("Z\xC3\xBCrich") == 6);
    CHECK_THROWS_AS(text::nfc("\xFF"), Error);
}

TEST_CASE("spec parsing") {
    const auto spec = parse_dataset_spec(R"({"dataset_id":"x","task_format":"sentence_pair","phase":"meta_test",
        "transfer_types":["pretraining","domain","domain"],"labels_test":[" entailment","neutral"],
        "expected_test_example_count":12,"choice_surface":{"entailment":"Yes"}})");
    CHECK(spec.task_format == TaskFormat::sentence_pair);
    CHECK(spec.transfer_types == std::vector<TransferType>{TransferType::domain, TransferType::pretraining});
    CHECK(spec.labels_test == std::vector<std::string>{"entailment", "neutral"});
    CHECK(spec.expected_test_example_count == 12);
    CHECK(spec.choice_surface.at("entailment") == "Yes");
    CHECK(parse_dataset_spec(dataset_spec_to_json(spec)).labels_test == spec.labels_test);

    SUBCASE("class-transfer partitions must be disjoint and nonempty") {
        CHECK_THROWS_AS(parse_dataset_spec(R"({"dataset_id":"x","task_format":"document","phase":"meta_test",
            "transfer_types":["class"],"labels_train":["a"],"labels_val":["b"],"labels_test":["a","c"]})"),
                        ConfigError);
        CHECK_THROWS_AS(parse_dataset_spec(R"({"dataset_id":"x","task_format":"document","phase":"meta_test",
            "transfer_types":["class"],"labels_train":["a"],"labels_test":["c"]})"),
                        ConfigError);
    }
    SUBCASE("malformed documents") {
        CHECK_THROWS_AS(parse_dataset_spec("{"), ConfigError);
        CHECK_THROWS_AS(parse_dataset_spec(R"({"dataset_id":"x","task_format":"poem","phase":"meta_test"})"),
                        ConfigError);
        CHECK_THROWS_AS(parse_dataset_spec(R"({"dataset_id":"x","task_format":"document","phase":"meta_test",
            "labels_test":["a","a"]})"),
                        ConfigError);
    }
}

TEST_CASE("registry specs all load") {
    std::size_t meta_test = 0;
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(testing::data_dir() / "registry")) {
        const auto spec = load_dataset_spec(entry.path());
        ++n;
        if (spec.phase == Phase::meta_test) ++meta_test;
        if (spec.dataset_id == "20news") CHECK(spec.labels_test.size() == 7);
        if (spec.dataset_id == "reuters") CHECK(spec.labels_test.size() == 11);
        if (spec.dataset_id == "fewrel") {
            CHECK(spec.labels_train.size() == 65);
            CHECK(spec.labels_val.size() == 5);
            CHECK(spec.labels_test.size() == 10);
        }
        if (spec.dataset_id == "huffpost") CHECK(spec.labels_test.size() == 16);
    }
    CHECK(n == 20);
    CHECK(meta_test == 12);
}

TEST_CASE("SNLI-sized load keeps every record") {
    const auto spec = load_dataset_spec(testing::data_dir() / "registry" / "snli.spec.json");
    const char* labels[] = {"contradiction", "entailment", "neutral"};
    std::ostringstream os;
    for (int i = 0; i < 9842; ++i) {
        os << R"({"example_id":"s)" << i << R"(","text_a":"premise","text_b":"hypothesis","label":")"
           << labels[i % 3] << "\"}\n";
    }
    std::istringstream in(os.str());
    const auto examples = parse_examples(in, spec);
    CHECK(spec.labels_test.size() == 3);
    CHECK(examples.size() == 9842);
    CHECK(spec.expected_test_example_count == 9842);
}

TEST_CASE("record validation errors") {
    const auto single = spec_of(TaskFormat::single_text, {"a", "b"});
    const auto pair = spec_of(TaskFormat::sentence_pair, {"a", "b"});
    const auto rel = spec_of(TaskFormat::relation_classification, {"a", "b"});
    const auto ent = spec_of(TaskFormat::entity_typing, {"a", "b"});

    CHECK(first_code(R"({"example_id":"1","text_a":"x"})", single) == "missing_field");
    CHECK(first_code(R"({"text_a":"x","label":"a"})", single) == "missing_field");
    CHECK(first_code(R"({"example_id":"1","text_a":"x","label":["a","b"]})", single) == "multi_label");
    CHECK(first_code(R"({"example_id":"1","text_a":"x","label":"zzz"})", single) == "unknown_label");
    CHECK(first_code(R"({"example_id":"1","text_a":"x","label":"a"})", pair) == "text_b_missing");
    CHECK(first_code(R"({"example_id":"1","text_a":"x","text_b":"y","label":"a"})", single) == "text_b_unexpected");
    CHECK(first_code(R"({"example_id":"1","text_a":"abcdef","mention_spans":[[0,1]],"label":"a"})", rel) ==
          "span_count");
    CHECK(first_code(R"({"example_id":"1","text_a":"abcdef","label":"a"})", ent) == "span_count");
    CHECK(first_code(R"({"example_id":"1","text_a":"abc","mention_spans":[[1,9]],"label":"a"})", ent) ==
          "span_out_of_bounds");
    CHECK(first_code(R"({"example_id":"1","text_a":"abcdef","mention_spans":[[0,3],[2,5]],"label":"a"})", rel) ==
          "span_overlap");
    CHECK(first_code("{not json", single) == "parse_error");
    CHECK(first_code(R"({"example_id":"1","text_a":"x","label":"a"})"
                     "\n"
                     R"({"example_id":"1","text_a":"y","label":"b"})",
                     single) == "duplicate_example_id");
}

TEST_CASE("validation reports every bad record with its line") {
    const auto spec = spec_of(TaskFormat::single_text, {"a"});
    const auto issues = issues_of("{\"example_id\":\"1\",\"text_a\":\"x\",\"label\":\"a\"}\n"
                                  "{\"example_id\":\"2\",\"text_a\":\"x\",\"label\":\"q\"}\n"
                                  "\n"
                                  "{\"example_id\":\"3\",\"text_a\":\"x\",\"label\":[\"a\"]}\n",
                                  spec);
    REQUIRE(issues.size() == 2);
    CHECK(issues[0].line == 2);
    CHECK(issues[0].record == "2");
    CHECK(issues[1].line == 4);
    CHECK(issues[1].code == "multi_label");
}

TEST_CASE("labels are NFC-normalized and spans count code points") {
    auto spec = spec_of(TaskFormat::entity_typing, {"caf\xC3\xA9"});
    std::istringstream in(
        "{\"example_id\":\"1\",\"text_a\":\"Z\xC3\xBCrich is big\",\"mention_spans\":[[0,6]],"
        "\"label\":\" cafe\xCC\x81 \"}\n");
    const auto ex = parse_examples(in, spec);
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].label == "caf\xC3\xA9");
    CHECK((*ex[0].mention_spans)[0] == Span{0, 6});
}

TEST_CASE("serialization round trip (property)") {
    std::mt19937 gen(1234);
    const std::vector<std::string> words = {"alpha", "b\xC3\xA9ta", "\xE4\xB8\xAD\xE6\x96\x87", "quote\"d",
                                            "back\\slash", "tab\there", "emoji \xF0\x9F\x99\x82"};
    for (auto format : {TaskFormat::single_text, TaskFormat::sentence_pair, TaskFormat::relation_classification,
                        TaskFormat::entity_typing}) {
        const auto spec = spec_of(format, {"x", "y", "z"});
        std::vector<LabeledExample> examples;
        for (int i = 0; i < 200; ++i) {
            LabeledExample ex;
            ex.example_id = "id" + std::to_string(i);
            const int len = 2 + static_cast<int>(gen() % 4);
            for (int w = 0; w < len; ++w) ex.text_a += (w ? " " : "") + words[gen() % words.size()];
            if (format == TaskFormat::sentence_pair) ex.text_b = words[gen() % words.size()];
            const std::size_t cps = text::codepoint_length(ex.text_a);
            if (format == TaskFormat::entity_typing) {
                const std::size_t s = gen() % (cps - 1);
                ex.mention_spans = std::vector<Span>{{s, s + 1 + gen() % (cps - s)}};
            }
            if (format == TaskFormat::relation_classification) {
                const std::size_t mid = cps / 2;
                ex.mention_spans = std::vector<Span>{{0, 1 + gen() % mid}, {mid, mid + 1 + gen() % (cps - mid)}};
            }
            ex.label = spec.labels_test[gen() % 3];
            examples.push_back(ex);
        }
        std::ostringstream out;
        write_examples(out, examples);
        std::istringstream in(out.str());
        CHECK(parse_examples(in, spec) == examples);
    }
}

TEST_CASE("class_pool partitions examples by label") {
    SUBCASE("two balanced labels") {
        auto spec = spec_of(TaskFormat::single_text, {"a", "b"});
        std::vector<LabeledExample> ex;
        for (int i = 0; i < 10; ++i) ex.push_back({"e" + std::to_string(i), "t", std::nullopt, std::nullopt, i % 2 ? "b" : "a"});
        const auto pool = class_pool(spec, ex, Phase::meta_test);
        CHECK(pool.size() == 2);
        CHECK(pool.examples_for("a").size() == 5);
        CHECK(pool.examples_for("b").size() == 5);
        CHECK(pool.examples_for("b").front().example_id == "e1");
    }
    SUBCASE("20News meta-test labels") {
        auto spec = load_dataset_spec(testing::data_dir() / "registry" / "20news.spec.json");
        std::vector<LabeledExample> ex;
        for (const auto* part : {&spec.labels_train, &spec.labels_val, &spec.labels_test}) {
            for (const auto& l : *part) ex.push_back({l + "-0", "t", std::nullopt, std::nullopt, l});
        }
        const auto pool = class_pool(spec, ex, Phase::meta_test);
        CHECK(pool.size() == 7);
        CHECK(pool.labels() == spec.labels_test);
        CHECK(pool.total_examples() == 7);
    }
    SUBCASE("empty class is an error") {
        auto spec = spec_of(TaskFormat::single_text, {"a", "b"});
        std::vector<LabeledExample> ex = {{"e", "t", std::nullopt, std::nullopt, "a"}};
        try {
            class_pool(spec, ex, Phase::meta_test);
            FAIL("expected empty_class");
        } catch (const ValidationError& e) {
            CHECK(e.code() == "empty_class");
            CHECK(e.record() == "b");
        }
    }
    SUBCASE("partition property on toy data") {
        for (const auto& d : testing::toy_datasets()) {
            const auto pool = class_pool(d.spec, d.examples, Phase::meta_test);
            std::size_t total = 0;
            std::set<std::string> ids;
            for (const auto& l : pool.labels()) {
                for (const auto& e : pool.examples_for(l)) {
                    CHECK(e.label == l);
                    ids.insert(e.example_id);
                }
                total += pool.examples_for(l).size();
            }
            CHECK(total == d.examples.size());
            CHECK(ids.size() == total);
        }
    }
}
