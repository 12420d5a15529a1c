#pragma once

#include "fewshot/corpus.hpp"
#include "fewshot/rng.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fewshot {

/// Episode sampling parameters. Defaults are the meta-test protocol:
/// variable way in [5, 10], shots per class in [1, 5], 90 episodes per
/// dataset with a paired zero-shot view, and test sets of up to 470.
struct SamplingConfig {
    std::uint64_t global_seed = 0;
    std::uint32_t episodes_per_dataset = 90;
    std::uint32_t k_min = 1;
    std::uint32_t k_max = 5;
    std::uint32_t way_min = 5;
    std::uint32_t way_cap = 10;
    std::uint32_t target_mean_test_size = 470;
    bool zero_shot_paired = true;
    Phase phase = Phase::meta_test;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Balanced 5-way 5-shot sampling, the usual meta-train/meta-val setting.
    static SamplingConfig balanced_5way_5shot(Phase phase);

    friend bool operator==(const SamplingConfig&, const SamplingConfig&) = default;
};

struct Episode {
    std::string episode_id;
    std::string dataset_id;
    std::uint32_t index = 0;
    std::vector<std::string> label_set;
    std::map<std::string, std::uint32_t> shots;
    std::vector<std::string> train_example_ids;
    std::vector<std::string> test_example_ids;
    bool is_zero_shot_view = false;

    friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodePair {
    Episode few_shot;
    Episode zero_shot;
};

/// Independent streams used to sample one episode.
struct EpisodeStreams {
    Stream way;
    Stream labels;
    Stream shots;
    Stream train;
    Stream test;
};

EpisodeStreams episode_streams(std::uint64_t global_seed, const std::string& dataset_id,
                               std::uint64_t episode_index);

std::string few_shot_episode_id(const std::string& dataset_id, std::uint32_t index);
std::string zero_shot_episode_id(const std::string& dataset_id, std::uint32_t index);

/// Class-transfer datasets: uniform on [way_min, min(|labels|, way_cap)].
/// Otherwise the full label count of the configured phase.
std::uint32_t sample_way(Stream& rng, const DatasetSpec& spec, const SamplingConfig& config);

/// Independent Unif{k_min..k_max} shot per label.
std::map<std::string, std::uint32_t> sample_shots(Stream& rng, const std::vector<std::string>& label_set,
                                                  const SamplingConfig& config);

/// Samples the few-shot episode and its zero-shot view (same label set and
/// test set, empty train set). Train examples are drawn before the test set.
EpisodePair sample_episode(EpisodeStreams& streams, const ClassPool& pool, const DatasetSpec& spec,
                           const SamplingConfig& config, std::uint32_t episode_index);

/// Single-view episode, used when zero-shot views are not paired.
Episode sample_single_episode(EpisodeStreams& streams, const ClassPool& pool, const DatasetSpec& spec,
                              const SamplingConfig& config, std::uint32_t episode_index, bool zero_shot);

}  // namespace fewshot
