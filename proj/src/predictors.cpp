#include "fewshot/promptkit.hpp"

#include <algorithm>

namespace fewshot {

namespace {

PredictionSet empty_set(const BenchmarkManifest& manifest) {
    PredictionSet p;
    p.manifest_checksum = manifest.checksum;
    p.protocol_tag = ProtocolTag::pretraining_only;
    return p;
}

std::vector<std::string> uniform_labels(const Episode& e, std::uint64_t seed) {
    Stream rng = derive_stream(seed, e.episode_id, e.index, "random_uniform");
    std::vector<std::string> out;
    out.reserve(e.test_example_ids.size());
    const auto way = static_cast<std::uint32_t>(e.label_set.size());
    for (std::size_t i = 0; i < e.test_example_ids.size(); ++i) out.push_back(e.label_set[rng.uniform_index(way)]);
    return out;
}

}  // namespace

PredictionSet predict_random_uniform(const BenchmarkManifest& manifest, std::uint64_t seed) {
    auto p = empty_set(manifest);
    for (const auto& e : manifest.episodes) p.entries[e.episode_id] = uniform_labels(e, seed);
    return p;
}

PredictionSet predict_majority_train(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                     std::uint64_t seed) {
    const auto gold = gold_index(datasets);
    auto p = empty_set(manifest);
    for (const auto& e : manifest.episodes) {
        if (e.train_example_ids.empty()) {
            p.entries[e.episode_id] = uniform_labels(e, seed);
            continue;
        }
        const auto& labels = gold.at(e.dataset_id);
        std::map<std::string, std::size_t> counts;
        for (const auto& id : e.train_example_ids) ++counts[labels.at(id)];
        // Ties resolve to the earliest label in label_set order.
        std::string best = e.label_set.front();
        std::size_t best_count = 0;
        for (const auto& l : e.label_set) {
            if (counts[l] > best_count) {
                best = l;
                best_count = counts[l];
            }
        }
        p.entries[e.episode_id] = std::vector<std::string>(e.test_example_ids.size(), best);
    }
    return p;
}

PredictionSet predict_oracle(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets) {
    const auto gold = gold_index(datasets);
    auto p = empty_set(manifest);
    for (const auto& e : manifest.episodes) {
        const auto g = gold.find(e.dataset_id);
        if (g == gold.end()) throw Error("unknown_dataset", "no dataset loaded for '" + e.dataset_id + "'");
        std::vector<std::string> out;
        out.reserve(e.test_example_ids.size());
        for (const auto& id : e.test_example_ids) {
            const auto it = g->second.find(id);
            if (it == g->second.end()) {
                throw Error("unknown_example", "dataset '" + e.dataset_id + "' has no example '" + id + "'");
            }
            out.push_back(it->second);
        }
        p.entries[e.episode_id] = std::move(out);
    }
    return p;
}

}  // namespace fewshot
