#include "fewshot/sampler.hpp"

#include <algorithm>
#include <numeric>

namespace fewshot {

void SamplingConfig::validate() const {
    if (episodes_per_dataset < 1) throw ConfigError("episodes_per_dataset must be >= 1");
    if (k_min > k_max) throw ConfigError("k_min must not exceed k_max");
    if (k_max < 1) throw ConfigError("k_max must be positive");
    if (way_min < 1) throw ConfigError("way_min must be positive");
    if (way_min > way_cap) throw ConfigError("way_min must not exceed way_cap");
    if (target_mean_test_size < 1) throw ConfigError("target_mean_test_size must be positive");
}

SamplingConfig SamplingConfig::balanced_5way_5shot(Phase phase) {
    SamplingConfig c;
    c.k_min = c.k_max = 5;
    c.way_min = c.way_cap = 5;
    c.zero_shot_paired = false;
    c.phase = phase;
    return c;
}

EpisodeStreams episode_streams(std::uint64_t global_seed, const std::string& dataset_id,
                               std::uint64_t episode_index) {
    return {derive_stream(global_seed, dataset_id, episode_index, "way"),
            derive_stream(global_seed, dataset_id, episode_index, "labels"),
            derive_stream(global_seed, dataset_id, episode_index, "shots"),
            derive_stream(global_seed, dataset_id, episode_index, "train"),
            derive_stream(global_seed, dataset_id, episode_index, "test")};
}

std::string few_shot_episode_id(const std::string& dataset_id, std::uint32_t index) {
    return dataset_id + ":" + std::to_string(index) + ":few";
}

std::string zero_shot_episode_id(const std::string& dataset_id, std::uint32_t index) {
    return dataset_id + ":" + std::to_string(index) + ":zero";
}

std::uint32_t sample_way(Stream& rng, const DatasetSpec& spec, const SamplingConfig& config) {
    const auto n_labels = static_cast<std::uint32_t>(spec.labels_for(config.phase).size());
    if (!spec.has_transfer(TransferType::class_transfer)) return n_labels;
    if (n_labels < config.way_min) {
        throw ConfigError("dataset '" + spec.dataset_id + "' has " + std::to_string(n_labels) +
                          " labels, fewer than way_min " + std::to_string(config.way_min));
    }
    const std::uint32_t hi = std::min(n_labels, config.way_cap);
    return static_cast<std::uint32_t>(rng.uniform_int(config.way_min, hi));
}

std::map<std::string, std::uint32_t> sample_shots(Stream& rng, const std::vector<std::string>& label_set,
                                                  const SamplingConfig& config) {
    std::map<std::string, std::uint32_t> shots;
    for (const auto& label : label_set) {
        shots[label] = static_cast<std::uint32_t>(rng.uniform_int(config.k_min, config.k_max));
    }
    return shots;
}

namespace {

/// Moves `count` uniformly chosen elements to the front of `items`
/// (partial Fisher-Yates).
template <typename T>
void choose_front(Stream& rng, std::vector<T>& items, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + rng.uniform_index(static_cast<std::uint32_t>(items.size() - i));
        std::swap(items[i], items[j]);
    }
}

std::string insufficient(const DatasetSpec& spec, std::uint32_t index, const std::string& label,
                         std::size_t have, std::size_t need) {
    return "dataset '" + spec.dataset_id + "' episode " + std::to_string(index) + ": label '" + label +
           "' has " + std::to_string(have) + " examples, needs " + std::to_string(need);
}

struct Draw {
    std::vector<std::string> label_set;
    std::map<std::string, std::uint32_t> shots;
    std::vector<std::string> train;
    std::vector<std::string> test;
};

Draw draw(EpisodeStreams& streams, const ClassPool& pool, const DatasetSpec& spec,
          const SamplingConfig& config, std::uint32_t index, bool zero_shot) {
    config.validate();
    if (!zero_shot && config.k_min < 1) throw ConfigError("few-shot views need k_min >= 1");
    Draw d;
    const std::uint32_t way = sample_way(streams.way, spec, config);

    d.label_set = pool.labels();
    choose_front(streams.labels, d.label_set, way);
    d.label_set.resize(way);

    if (zero_shot) {
        for (const auto& l : d.label_set) d.shots[l] = 0;
    } else {
        d.shots = sample_shots(streams.shots, d.label_set, config);
    }

    std::vector<std::string> remaining;
    for (const auto& label : d.label_set) {
        const auto& members = pool.examples_for(label);
        const std::size_t k = d.shots[label];
        if (members.size() < k + 1) {
            throw ValidationError("insufficient_examples", insufficient(spec, index, label, members.size(), k + 1),
                                  label);
        }
        std::vector<const std::string*> ids;
        ids.reserve(members.size());
        for (const auto& ex : members) ids.push_back(&ex.example_id);
        choose_front(streams.train, ids, k);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            (i < k ? d.train : remaining).push_back(*ids[i]);
        }
    }

    const std::size_t test_size = std::min<std::size_t>(config.target_mean_test_size, remaining.size());
    choose_front(streams.test, remaining, test_size);
    remaining.resize(test_size);
    d.test = std::move(remaining);
    return d;
}

Episode make_episode(const DatasetSpec& spec, std::uint32_t index, const Draw& d, bool zero_shot) {
    Episode e;
    e.episode_id = zero_shot ? zero_shot_episode_id(spec.dataset_id, index)
                             : few_shot_episode_id(spec.dataset_id, index);
    e.dataset_id = spec.dataset_id;
    e.index = index;
    e.label_set = d.label_set;
    e.test_example_ids = d.test;
    e.is_zero_shot_view = zero_shot;
    if (zero_shot) {
        for (const auto& l : d.label_set) e.shots[l] = 0;
    } else {
        e.shots = d.shots;
        e.train_example_ids = d.train;
    }
    return e;
}

}  // namespace

EpisodePair sample_episode(EpisodeStreams& streams, const ClassPool& pool, const DatasetSpec& spec,
                           const SamplingConfig& config, std::uint32_t episode_index) {
    const Draw d = draw(streams, pool, spec, config, episode_index, false);
    return {make_episode(spec, episode_index, d, false), make_episode(spec, episode_index, d, true)};
}

Episode sample_single_episode(EpisodeStreams& streams, const ClassPool& pool, const DatasetSpec& spec,
                              const SamplingConfig& config, std::uint32_t episode_index, bool zero_shot) {
    const Draw d = draw(streams, pool, spec, config, episode_index, zero_shot);
    return make_episode(spec, episode_index, d, zero_shot);
}

}  // namespace fewshot
