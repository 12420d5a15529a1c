#pragma once

#include "fewshot/corpus.hpp"
#include "fewshot/sampler.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fewshot {

inline constexpr std::string_view kManifestVersion = "1";

struct BenchmarkManifest {
    std::string manifest_version{kManifestVersion};
    SamplingConfig sampling_config;
    std::string rng_algorithm_id{kRngAlgorithmId};
    std::vector<Episode> episodes;
    std::string checksum;  // SHA-256 hex over the canonical lines above
};

/// Generates every dataset's episodes and seals the manifest. Datasets are
/// ordered by dataset_id; within a dataset by index, few-shot view first.
/// Output does not depend on `threads`.
BenchmarkManifest build_manifest(const std::vector<Dataset>& datasets, const SamplingConfig& config,
                                 unsigned threads = 1);

// Canonical serialization: sorted keys, no insignificant whitespace, LF.
std::string canonical_header_line(const BenchmarkManifest& m);
std::string canonical_episode_line(const Episode& e);
/// Header line and every episode line, each followed by '\n'.
std::string canonical_body(const BenchmarkManifest& m);
std::string compute_checksum(const BenchmarkManifest& m);

void write_manifest(std::ostream& out, const BenchmarkManifest& m);
void save_manifest(const std::filesystem::path& path, const BenchmarkManifest& m);
/// Parses a manifest file. Key order inside objects is irrelevant: lines
/// are re-canonicalized, so `checksum` is kept as stored and not verified.
BenchmarkManifest read_manifest(std::istream& in);
BenchmarkManifest load_manifest(const std::filesystem::path& path);

struct EpisodeCheck {
    std::string episode_id;
    bool passed = true;
    std::string field;  // first differing field, empty when passed
};

struct VerificationReport {
    bool checksum_ok = false;
    std::string global_error;  // set for checksum / algorithm / config failures
    std::vector<EpisodeCheck> episodes;

    bool passed() const;
    std::size_t failures() const;
};

/// Recomputes the checksum and re-derives every episode from the recorded
/// sampling config.
VerificationReport verify_manifest(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                   unsigned threads = 1);

/// Throws Error("checksum_mismatch") unless the stored checksum matches.
void require_valid_checksum(const BenchmarkManifest& manifest);

}  // namespace fewshot
