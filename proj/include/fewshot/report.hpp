#pragma once

#include "fewshot/corpus.hpp"
#include "fewshot/manifest.hpp"
#include "fewshot/stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fewshot {

enum class ProtocolTag { pretraining_only, meta_trained };
std::string to_string(ProtocolTag t);
ProtocolTag parse_protocol_tag(const std::string& s);

/// Model outputs for a manifest: episode_id -> predicted labels aligned
/// with the episode's test_example_ids.
struct PredictionSet {
    std::string manifest_checksum;
    ProtocolTag protocol_tag = ProtocolTag::pretraining_only;
    std::map<std::string, std::vector<std::string>> entries;
};

void write_predictions(std::ostream& out, const PredictionSet& p);
void save_predictions(const std::filesystem::path& path, const PredictionSet& p);
PredictionSet read_predictions(std::istream& in);
PredictionSet load_predictions(const std::filesystem::path& path);

enum class View { few_shot, zero_shot };
std::string to_string(View v);

enum class Scope { dataset, transfer_type, overall };
std::string to_string(Scope s);

struct GroupStats {
    double mean = 0.0;
    double stdev = 0.0;
    double ci_low = 0.0;
    double ci_up = 0.0;
    std::optional<double> ci_sem_halfwidth;  // absent when n_episodes < 2
    std::size_t n_episodes = 0;

    double ci_low_offset() const { return mean - ci_low; }
    double ci_up_offset() const { return ci_up - mean; }
};

struct GroupResult {
    Scope scope = Scope::overall;
    std::string name;  // dataset id or transfer type; "overall" for the total
    View view = View::few_shot;
    GroupStats stats;
};

struct EpisodeScore {
    std::string episode_id;
    View view = View::few_shot;
    double accuracy = 0.0;
};

struct ScoreReport {
    std::string manifest_checksum;
    ProtocolTag protocol_tag = ProtocolTag::pretraining_only;
    StatsConfig stats_config;
    /// Per-episode accuracy in manifest order.
    std::vector<EpisodeScore> per_episode;
    /// Ordered: datasets (by id), transfer types, overall; few-shot before zero-shot.
    std::vector<GroupResult> groups;

    const GroupResult* find(Scope scope, const std::string& name, View view) const;
};

GroupStats summarize(std::span<const double> scores, const StatsConfig& config);

/// Gold labels of every example across `datasets`, keyed by example id.
/// Example ids must be unique per dataset; keys are "dataset_id" scoped.
using GoldIndex = std::map<std::string, std::unordered_map<std::string, std::string>>;
GoldIndex gold_index(const std::vector<Dataset>& datasets);

/// Scores every episode and rolls results up by dataset, transfer type and
/// overall, separately per view. Fails without a partial report when the
/// checksums differ or any episode lacks predictions.
ScoreReport build_report(const BenchmarkManifest& manifest, const PredictionSet& predictions,
                         const std::vector<Dataset>& datasets, const StatsConfig& config);

std::string report_to_json(const ScoreReport& report, int indent = 2);

struct ViewComparison {
    View view = View::few_shot;
    PairedComparison result;
};

struct ComparisonReport {
    std::string manifest_checksum;
    StatsConfig stats_config;
    std::vector<ViewComparison> views;
};

/// Paired comparison of two reports over the same manifest. Requires equal
/// checksums and identical episode ordering.
ComparisonReport compare_reports(const ScoreReport& a, const ScoreReport& b, const StatsConfig& config);
std::string comparison_to_json(const ComparisonReport& c, int indent = 2);

}  // namespace fewshot
