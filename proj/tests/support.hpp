#pragma once

#include "fewshot/corpus.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path data_dir() { return FEWSHOT_DATA_DIR; }

inline std::vector<fewshot::Dataset> toy_datasets() {
    std::vector<fewshot::Dataset> out;
    for (const char* id : {"toy_entity", "toy_nli", "toy_relation", "toy_sentiment", "toy_topics"}) {
        const auto dir = data_dir() / "toy";
        out.push_back(fewshot::load_dataset(dir / (std::string(id) + ".spec.json"), dir / (std::string(id) + ".jsonl")));
    }
    return out;
}

inline fewshot::Dataset toy(const std::string& id) {
    for (auto& d : toy_datasets()) {
        if (d.spec.dataset_id == id) return d;
    }
    throw std::runtime_error("no toy dataset " + id);
}

/// Class-transfer document dataset with `labels` test labels and `per_label`
/// examples each; ids are "<prefix>-<label>-<i>".
inline fewshot::Dataset synthetic(const std::string& id, std::size_t labels, std::size_t per_label) {
    fewshot::Dataset d;
    d.spec.dataset_id = id;
    d.spec.task_format = fewshot::TaskFormat::document;
    d.spec.transfer_types = {fewshot::TransferType::class_transfer};
    d.spec.labels_train = {"tr0"};
    d.spec.labels_val = {"va0"};
    for (std::size_t l = 0; l < labels; ++l) d.spec.labels_test.push_back("c" + std::to_string(l));
    for (std::size_t l = 0; l < labels; ++l) {
        for (std::size_t i = 0; i < per_label; ++i) {
            fewshot::LabeledExample ex;
            ex.example_id = id + "-" + std::to_string(l) + "-" + std::to_string(i);
            ex.text_a = "text " + std::to_string(i);
            ex.label = d.spec.labels_test[l];
            d.examples.push_back(ex);
        }
    }
    return d;
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("fewshot-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing
