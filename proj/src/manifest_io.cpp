#include "fewshot/manifest.hpp"

#include "fewshot/parallel.hpp"
#include "fewshot/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fewshot {

using nlohmann::json;

namespace {

json config_to_json(const SamplingConfig& c) {
    return json{{"global_seed", c.global_seed},
                {"episodes_per_dataset", c.episodes_per_dataset},
                {"k_min", c.k_min},
                {"k_max", c.k_max},
                {"way_min", c.way_min},
                {"way_cap", c.way_cap},
                {"target_mean_test_size", c.target_mean_test_size},
                {"zero_shot_paired", c.zero_shot_paired},
                {"phase", to_string(c.phase)}};
}

SamplingConfig config_from_json(const json& j) {
    SamplingConfig c;
    c.global_seed = j.at("global_seed").get<std::uint64_t>();
    c.episodes_per_dataset = j.at("episodes_per_dataset").get<std::uint32_t>();
    c.k_min = j.at("k_min").get<std::uint32_t>();
    c.k_max = j.at("k_max").get<std::uint32_t>();
    c.way_min = j.at("way_min").get<std::uint32_t>();
    c.way_cap = j.at("way_cap").get<std::uint32_t>();
    c.target_mean_test_size = j.at("target_mean_test_size").get<std::uint32_t>();
    c.zero_shot_paired = j.at("zero_shot_paired").get<bool>();
    c.phase = parse_phase(j.value("phase", std::string("meta_test")));
    return c;
}

json episode_to_json(const Episode& e) {
    json shots = json::object();
    for (const auto& [label, k] : e.shots) shots[label] = k;
    return json{{"episode_id", e.episode_id},
                {"dataset_id", e.dataset_id},
                {"index", e.index},
                {"label_set", e.label_set},
                {"shots", shots},
                {"train_example_ids", e.train_example_ids},
                {"test_example_ids", e.test_example_ids},
                {"is_zero_shot_view", e.is_zero_shot_view}};
}

Episode episode_from_json(const json& j) {
    Episode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    e.dataset_id = j.at("dataset_id").get<std::string>();
    e.index = j.at("index").get<std::uint32_t>();
    e.label_set = j.at("label_set").get<std::vector<std::string>>();
    for (const auto& [label, k] : j.at("shots").items()) e.shots[label] = k.get<std::uint32_t>();
    e.train_example_ids = j.at("train_example_ids").get<std::vector<std::string>>();
    e.test_example_ids = j.at("test_example_ids").get<std::vector<std::string>>();
    e.is_zero_shot_view = j.at("is_zero_shot_view").get<bool>();
    return e;
}

/// Re-encodes every string in NFC; object keys included.
json nfc_all(const json& j) {
    if (j.is_string()) return text::nfc(j.get<std::string>());
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(nfc_all(v));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[text::nfc(k)] = nfc_all(v);
        return out;
    }
    return j;
}

std::string canonical_dump(const json& j) {
    // nlohmann's default object type is an ordered std::map, so dump()
    // already emits keys in byte-lexicographic order.
    return nfc_all(j).dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace

std::string canonical_header_line(const BenchmarkManifest& m) {
    return canonical_dump(json{{"manifest_version", m.manifest_version},
                               {"sampling_config", config_to_json(m.sampling_config)},
                               {"rng_algorithm_id", m.rng_algorithm_id}});
}

std::string canonical_episode_line(const Episode& e) { return canonical_dump(episode_to_json(e)); }

std::string canonical_body(const BenchmarkManifest& m) {
    std::string body = canonical_header_line(m);
    body.push_back('\n');
    for (const auto& e : m.episodes) {
        body += canonical_episode_line(e);
        body.push_back('\n');
    }
    return body;
}

std::string compute_checksum(const BenchmarkManifest& m) { return sha256_hex(canonical_body(m)); }

void write_manifest(std::ostream& out, const BenchmarkManifest& m) {
    out << canonical_body(m) << canonical_dump(json{{"checksum", m.checksum}}) << '\n';
}

void save_manifest(const std::filesystem::path& path, const BenchmarkManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_manifest(out, m);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

BenchmarkManifest read_manifest(std::istream& in) {
    std::vector<json> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ValidationError("parse_error", "manifest line " + std::to_string(line_no) + ": " + e.what(), "",
                                  line_no);
        }
    }
    if (lines.size() < 2) throw ValidationError("parse_error", "manifest needs a header and a checksum line");
    BenchmarkManifest m;
    try {
        const auto& header = lines.front();
        m.manifest_version = header.at("manifest_version").get<std::string>();
        m.rng_algorithm_id = header.at("rng_algorithm_id").get<std::string>();
        m.sampling_config = config_from_json(header.at("sampling_config"));
        const auto& tail = lines.back();
        if (!tail.is_object() || tail.size() != 1 || !tail.contains("checksum")) {
            throw ValidationError("parse_error", "manifest must end with a {\"checksum\": ...} line");
        }
        m.checksum = tail.at("checksum").get<std::string>();
        for (std::size_t i = 1; i + 1 < lines.size(); ++i) m.episodes.push_back(episode_from_json(lines[i]));
    } catch (const json::exception& e) {
        throw ValidationError("parse_error", std::string("malformed manifest: ") + e.what());
    }
    return m;
}

BenchmarkManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_manifest(in);
}

BenchmarkManifest build_manifest(const std::vector<Dataset>& datasets, const SamplingConfig& config,
                                 unsigned threads) {
    config.validate();
    std::vector<const Dataset*> ordered;
    std::set<std::string> ids;
    for (const auto& ds : datasets) {
        if (!ids.insert(ds.spec.dataset_id).second) {
            throw Error("duplicate_dataset", "duplicate dataset_id '" + ds.spec.dataset_id + "'");
        }
        if (ds.spec.labels_for(config.phase).empty()) {
            throw ConfigError("dataset '" + ds.spec.dataset_id + "' has no labels for phase " +
                              to_string(config.phase));
        }
        ordered.push_back(&ds);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const Dataset* a, const Dataset* b) { return a->spec.dataset_id < b->spec.dataset_id; });

    std::vector<ClassPool> pools;
    pools.reserve(ordered.size());
    for (const auto* ds : ordered) pools.push_back(class_pool(ds->spec, ds->examples, config.phase));

    const std::uint32_t per = config.episodes_per_dataset;
    const std::size_t tasks = ordered.size() * per;
    // Paired mode fills two slots per task, unpaired mode one.
    const std::size_t slots_per_task = config.zero_shot_paired ? 2 : 1;
    std::vector<Episode> slots(tasks * slots_per_task);
    const std::uint32_t few_count = (per + 1) / 2;

    parallel_for(tasks, threads, [&](std::size_t t) {
        const std::size_t d = t / per;
        const auto index = static_cast<std::uint32_t>(t % per);
        const auto& spec = ordered[d]->spec;
        auto streams = episode_streams(config.global_seed, spec.dataset_id, index);
        if (config.zero_shot_paired) {
            auto pair = sample_episode(streams, pools[d], spec, config, index);
            slots[2 * t] = std::move(pair.few_shot);
            slots[2 * t + 1] = std::move(pair.zero_shot);
        } else {
            slots[t] = sample_single_episode(streams, pools[d], spec, config, index, index >= few_count);
        }
    });

    BenchmarkManifest m;
    m.sampling_config = config;
    m.episodes = std::move(slots);
    m.checksum = compute_checksum(m);
    return m;
}

bool VerificationReport::passed() const { return checksum_ok && global_error.empty() && failures() == 0; }

std::size_t VerificationReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(episodes.begin(), episodes.end(), [](const EpisodeCheck& c) { return !c.passed; }));
}

namespace {

std::string first_difference(const Episode& a, const Episode& b) {
    if (a.episode_id != b.episode_id) return "episode_id";
    if (a.dataset_id != b.dataset_id) return "dataset_id";
    if (a.index != b.index) return "index";
    if (a.label_set != b.label_set) return "label_set";
    if (a.shots != b.shots) return "shots";
    if (a.train_example_ids != b.train_example_ids) return "train_example_ids";
    if (a.test_example_ids != b.test_example_ids) return "test_example_ids";
    if (a.is_zero_shot_view != b.is_zero_shot_view) return "is_zero_shot_view";
    return {};
}

}  // namespace

VerificationReport verify_manifest(const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets,
                                   unsigned threads) {
    VerificationReport report;
    report.checksum_ok = compute_checksum(manifest) == manifest.checksum;
    if (!report.checksum_ok) report.global_error = "checksum mismatch";

    if (manifest.rng_algorithm_id != kRngAlgorithmId) {
        report.global_error = "manifest was generated with rng algorithm '" + manifest.rng_algorithm_id +
                              "' but this build implements '" + std::string(kRngAlgorithmId) +
                              "'; episodes cannot be re-derived";
        return report;
    }
    if (manifest.manifest_version != kManifestVersion) {
        report.global_error = "unsupported manifest_version '" + manifest.manifest_version + "'";
        return report;
    }

    BenchmarkManifest expected;
    try {
        expected = build_manifest(datasets, manifest.sampling_config, threads);
    } catch (const Error& e) {
        report.global_error = std::string("re-derivation failed: ") + e.what();
        return report;
    }

    std::map<std::string, const Episode*> by_id;
    for (const auto& e : expected.episodes) by_id[e.episode_id] = &e;
    const std::size_t n = std::max(manifest.episodes.size(), expected.episodes.size());
    for (std::size_t i = 0; i < n; ++i) {
        EpisodeCheck check;
        if (i >= manifest.episodes.size()) {
            check.episode_id = expected.episodes[i].episode_id;
            check.passed = false;
            check.field = "missing";
        } else {
            const auto& got = manifest.episodes[i];
            check.episode_id = got.episode_id;
            if (i >= expected.episodes.size()) {
                check.passed = false;
                check.field = by_id.count(got.episode_id) ? "position" : "unexpected";
            } else {
                check.field = first_difference(got, expected.episodes[i]);
                check.passed = check.field.empty();
            }
        }
        report.episodes.push_back(std::move(check));
    }
    return report;
}

void require_valid_checksum(const BenchmarkManifest& manifest) {
    const auto actual = compute_checksum(manifest);
    if (actual != manifest.checksum) {
        throw Error("checksum_mismatch",
                    "manifest checksum mismatch: stored " + manifest.checksum + ", computed " + actual);
    }
}

}  // namespace fewshot
