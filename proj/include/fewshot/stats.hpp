#pragma once

#include "fewshot/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fewshot {

struct Episode;

struct StatsConfig {
    double confidence_level = 0.95;
    std::uint32_t bootstrap_resamples = 5000;
    std::uint64_t bootstrap_seed = 0;
    double z_critical = 1.96;

    void validate() const;
    friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

/// Percentile convention used for every CI: linear interpolation between
/// closest ranks, h = (n - 1) p.
inline constexpr const char* kPercentileMethod = "linear_interpolation_closest_ranks";

struct MeanStdev {
    double mean = 0.0;
    double stdev = 0.0;
};

struct Interval {
    double low = 0.0;
    double up = 0.0;
    double width() const { return up - low; }
    bool contains(double x) const { return low <= x && x <= up; }
};

/// Fraction of positions where the prediction equals the gold label after
/// NFC + trim. Predictions outside the label set simply count as wrong.
/// Throws on length mismatch or a test id with no gold label.
double score_episode(const Episode& episode, std::span<const std::string> predictions,
                     const std::unordered_map<std::string, std::string>& gold);

/// Mean and sample standard deviation (n - 1 denominator, 0 when n == 1).
MeanStdev aggregate(std::span<const double> scores);

/// Quantile of already-sorted data, p in [0, 1].
double percentile_sorted(std::span<const double> sorted, double p);

/// Percentile bootstrap CI of the mean, drawn from `stream`. Resample r
/// uses stream.substream(r), so the result is fixed by the stream identity.
Interval bootstrap_ci(std::span<const double> scores, std::uint32_t resamples, double confidence_level,
                      const Stream& stream);
/// Same, with the stream derived from config.bootstrap_seed.
Interval bootstrap_ci(std::span<const double> scores, const StatsConfig& config);

/// z * stdev / sqrt(n); requires n >= 2.
double sem_ci(std::span<const double> scores, const StatsConfig& config);

struct PairedComparison {
    double mean_diff = 0.0;
    Interval diff_ci;
    std::size_t n = 0;
};

/// Bootstrap CI over per-episode differences a_i - b_i.
PairedComparison paired_compare(std::span<const double> a, std::span<const double> b,
                                const StatsConfig& config);

}  // namespace fewshot
