#include "fewshot/stats.hpp"

#include "fewshot/error.hpp"
#include "fewshot/sampler.hpp"
#include "fewshot/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fewshot {

void StatsConfig::validate() const {
    if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
        throw ConfigError("confidence_level must lie in (0, 1)");
    }
    if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
    if (!(z_critical > 0.0)) throw ConfigError("z_critical must be positive");
}

double score_episode(const Episode& episode, std::span<const std::string> predictions,
                     const std::unordered_map<std::string, std::string>& gold) {
    if (predictions.size() != episode.test_example_ids.size()) {
        throw Error("length_mismatch", "episode '" + episode.episode_id + "' has " +
                                           std::to_string(episode.test_example_ids.size()) +
                                           " test examples but " + std::to_string(predictions.size()) +
                                           " predictions");
    }
    if (predictions.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto it = gold.find(episode.test_example_ids[i]);
        if (it == gold.end()) {
            throw Error("unknown_example", "no gold label for example '" + episode.test_example_ids[i] +
                                               "' of episode '" + episode.episode_id + "'");
        }
        std::string predicted;
        try {
            predicted = text::canonical_label(predictions[i]);
        } catch (const Error&) {
            continue;  // invalid UTF-8 can never match a label
        }
        if (predicted == it->second) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

MeanStdev aggregate(std::span<const double> scores) {
    if (scores.empty()) throw Error("empty_input", "aggregate needs at least one score");
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    // Constant data: the summed mean can round off the value itself.
    if (*mn == *mx) return {*mn, 0.0};
    const double n = static_cast<double>(scores.size());
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error("empty_input", "percentile of empty data");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval bootstrap_ci(std::span<const double> scores, std::uint32_t resamples, double confidence_level,
                      const Stream& stream) {
    if (scores.empty()) throw Error("empty_input", "bootstrap_ci needs at least one score");
    if (resamples < 1) throw ConfigError("bootstrap_resamples must be >= 1");
    const auto n = static_cast<std::uint32_t>(scores.size());
    std::vector<double> means(resamples);
    for (std::uint32_t r = 0; r < resamples; ++r) {
        Stream rs = stream.substream(r);
        double sum = 0.0;
        for (std::uint32_t i = 0; i < n; ++i) sum += scores[rs.uniform_index(n)];
        means[r] = sum / n;
    }
    std::sort(means.begin(), means.end());
    const double alpha = 1.0 - confidence_level;
    Interval ci{percentile_sorted(means, alpha / 2.0), percentile_sorted(means, 1.0 - alpha / 2.0)};
    // Rounding in the resample means can push an endpoint a hair outside
    // the data range; the exact bootstrap distribution never leaves it.
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    ci.low = std::clamp(ci.low, *mn, *mx);
    ci.up = std::clamp(ci.up, *mn, *mx);
    return ci;
}

Interval bootstrap_ci(std::span<const double> scores, const StatsConfig& config) {
    config.validate();
    return bootstrap_ci(scores, config.bootstrap_resamples, config.confidence_level,
                        derive_stream(config.bootstrap_seed, "", 0, "bootstrap"));
}

double sem_ci(std::span<const double> scores, const StatsConfig& config) {
    if (scores.size() < 2) throw Error("insufficient_data", "sem_ci needs at least two scores");
    const auto s = aggregate(scores);
    return config.z_critical * s.stdev / std::sqrt(static_cast<double>(scores.size()));
}

PairedComparison paired_compare(std::span<const double> a, std::span<const double> b,
                                const StatsConfig& config) {
    if (a.size() != b.size()) {
        throw Error("length_mismatch", "paired comparison needs equal-length score vectors (" +
                                           std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    std::vector<double> diffs(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
    PairedComparison out;
    out.n = diffs.size();
    out.mean_diff = aggregate(diffs).mean;
    out.diff_ci = bootstrap_ci(diffs, config);
    return out;
}

}  // namespace fewshot
