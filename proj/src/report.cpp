#include "fewshot/report.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace fewshot {

using nlohmann::json;

std::string to_string(ProtocolTag t) {
    return t == ProtocolTag::meta_trained ? "meta_trained" : "pretraining_only";
}

ProtocolTag parse_protocol_tag(const std::string& s) {
    if (s == "pretraining_only") return ProtocolTag::pretraining_only;
    if (s == "meta_trained") return ProtocolTag::meta_trained;
    throw ConfigError("unknown protocol_tag '" + s + "' (expected pretraining_only or meta_trained)");
}

std::string to_string(View v) { return v == View::few_shot ? "few_shot" : "zero_shot"; }

std::string to_string(Scope s) {
    switch (s) {
        case Scope::dataset: return "dataset";
        case Scope::transfer_type: return "transfer_type";
        case Scope::overall: break;
    }
    return "overall";
}

void write_predictions(std::ostream& out, const PredictionSet& p) {
    out << json{{"manifest_checksum", p.manifest_checksum}, {"protocol_tag", to_string(p.protocol_tag)}}.dump()
        << '\n';
    for (const auto& [id, preds] : p.entries) {
        out << json{{"episode_id", id}, {"predictions", preds}}.dump(-1, ' ', false, json::error_handler_t::replace)
            << '\n';
    }
}

void save_predictions(const std::filesystem::path& path, const PredictionSet& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_predictions(out, p);
}

PredictionSet read_predictions(std::istream& in) {
    PredictionSet p;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = json::parse(line);
            if (!header) {
                p.manifest_checksum = obj.at("manifest_checksum").get<std::string>();
                p.protocol_tag = parse_protocol_tag(obj.at("protocol_tag").get<std::string>());
                header = true;
                continue;
            }
            const auto id = obj.at("episode_id").get<std::string>();
            if (p.entries.count(id)) {
                throw ValidationError("duplicate_episode", "predictions list episode '" + id + "' twice", id, line_no);
            }
            p.entries[id] = obj.at("predictions").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ValidationError("parse_error", "predictions line " + std::to_string(line_no) + ": " + e.what(), "",
                                  line_no);
        }
    }
    if (!header) throw ValidationError("parse_error", "predictions file has no header line");
    return p;
}

PredictionSet load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_predictions(in);
}

const GroupResult* ScoreReport::find(Scope scope, const std::string& name, View view) const {
    for (const auto& g : groups) {
        if (g.scope == scope && g.name == name && g.view == view) return &g;
    }
    return nullptr;
}

GroupStats summarize(std::span<const double> scores, const StatsConfig& config) {
    GroupStats g;
    const auto ms = aggregate(scores);
    g.mean = ms.mean;
    g.stdev = ms.stdev;
    const auto ci = bootstrap_ci(scores, config);
    g.ci_low = ci.low;
    g.ci_up = ci.up;
    if (scores.size() >= 2) g.ci_sem_halfwidth = sem_ci(scores, config);
    g.n_episodes = scores.size();
    return g;
}

GoldIndex gold_index(const std::vector<Dataset>& datasets) {
    GoldIndex index;
    for (const auto& ds : datasets) {
        auto& m = index[ds.spec.dataset_id];
        for (const auto& ex : ds.examples) m.emplace(ex.example_id, ex.label);
    }
    return index;
}

ScoreReport build_report(const BenchmarkManifest& manifest, const PredictionSet& predictions,
                         const std::vector<Dataset>& datasets, const StatsConfig& config) {
    config.validate();
    require_valid_checksum(manifest);
    if (predictions.manifest_checksum != manifest.checksum) {
        throw Error("checksum_mismatch", "predictions were made for manifest " + predictions.manifest_checksum +
                                             " but the manifest is " + manifest.checksum);
    }
    std::vector<std::string> missing;
    for (const auto& e : manifest.episodes) {
        if (!predictions.entries.count(e.episode_id)) missing.push_back(e.episode_id);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20) list += ", ...";
        throw Error("missing_episodes",
                    std::to_string(missing.size()) + " episode(s) lack predictions: " + list);
    }
    std::unordered_set<std::string> known;
    for (const auto& e : manifest.episodes) known.insert(e.episode_id);
    for (const auto& [id, _] : predictions.entries) {
        if (!known.count(id)) throw Error("unknown_episode", "predictions name episode '" + id + "' not in the manifest");
    }

    const auto gold = gold_index(datasets);
    std::map<std::string, const DatasetSpec*> specs;
    for (const auto& ds : datasets) specs[ds.spec.dataset_id] = &ds.spec;

    ScoreReport report;
    report.manifest_checksum = manifest.checksum;
    report.protocol_tag = predictions.protocol_tag;
    report.stats_config = config;

    // (scope, name, view) -> scores, in manifest order.
    std::map<std::tuple<Scope, std::string, View>, std::vector<double>> buckets;
    for (const auto& e : manifest.episodes) {
        const auto g = gold.find(e.dataset_id);
        const auto s = specs.find(e.dataset_id);
        if (g == gold.end() || s == specs.end()) {
            throw Error("unknown_dataset", "no dataset loaded for '" + e.dataset_id + "'");
        }
        const double acc = score_episode(e, predictions.entries.at(e.episode_id), g->second);
        const View view = e.is_zero_shot_view ? View::zero_shot : View::few_shot;
        report.per_episode.push_back({e.episode_id, view, acc});
        buckets[{Scope::dataset, e.dataset_id, view}].push_back(acc);
        for (auto t : s->second->transfer_types) buckets[{Scope::transfer_type, to_string(t), view}].push_back(acc);
        buckets[{Scope::overall, "overall", view}].push_back(acc);
    }
    for (const auto& [key, scores] : buckets) {
        const auto& [scope, name, view] = key;
        report.groups.push_back({scope, name, view, summarize(scores, config)});
    }
    return report;
}

namespace {

json stats_config_json(const StatsConfig& c) {
    return json{{"confidence_level", c.confidence_level},
                {"bootstrap_resamples", c.bootstrap_resamples},
                {"bootstrap_seed", c.bootstrap_seed},
                {"z_critical", c.z_critical},
                {"percentile_method", kPercentileMethod},
                {"bootstrap_kind", "percentile"}};
}

}  // namespace

std::string report_to_json(const ScoreReport& report, int indent) {
    json doc;
    doc["artifact_version"] = FEWSHOT_VERSION;
    doc["manifest_checksum"] = report.manifest_checksum;
    doc["protocol_tag"] = to_string(report.protocol_tag);
    doc["stats_config"] = stats_config_json(report.stats_config);
    json per = json::object();
    for (const auto& e : report.per_episode) per[e.episode_id] = e.accuracy;
    doc["per_episode"] = per;
    json groups = json::array();
    for (const auto& g : report.groups) {
        const auto& s = g.stats;
        groups.push_back({{"scope", to_string(g.scope)},
                          {"name", g.name},
                          {"view", to_string(g.view)},
                          {"mean", s.mean},
                          {"stdev", s.stdev},
                          {"ci_low", s.ci_low},
                          {"ci_up", s.ci_up},
                          {"ci_low_offset", s.ci_low_offset()},
                          {"ci_up_offset", s.ci_up_offset()},
                          {"ci_sem_halfwidth", s.ci_sem_halfwidth ? json(*s.ci_sem_halfwidth) : json(nullptr)},
                          {"n_episodes", s.n_episodes}});
    }
    doc["groups"] = groups;
    return doc.dump(indent, ' ', false, json::error_handler_t::replace);
}

ComparisonReport compare_reports(const ScoreReport& a, const ScoreReport& b, const StatsConfig& config) {
    if (a.manifest_checksum != b.manifest_checksum) {
        throw Error("checksum_mismatch", "reports were scored on different manifests (" + a.manifest_checksum +
                                             " vs " + b.manifest_checksum + ")");
    }
    if (a.per_episode.size() != b.per_episode.size()) {
        throw Error("length_mismatch", "reports cover different episode counts");
    }
    ComparisonReport out;
    out.manifest_checksum = a.manifest_checksum;
    out.stats_config = config;
    std::map<View, std::pair<std::vector<double>, std::vector<double>>> by_view;
    for (std::size_t i = 0; i < a.per_episode.size(); ++i) {
        const auto& ea = a.per_episode[i];
        const auto& eb = b.per_episode[i];
        if (ea.episode_id != eb.episode_id) {
            throw Error("order_mismatch", "episode order differs at position " + std::to_string(i) + " ('" +
                                              ea.episode_id + "' vs '" + eb.episode_id + "')");
        }
        auto& slot = by_view[ea.view];
        slot.first.push_back(ea.accuracy);
        slot.second.push_back(eb.accuracy);
    }
    for (const auto& [view, vecs] : by_view) {
        out.views.push_back({view, paired_compare(vecs.first, vecs.second, config)});
    }
    return out;
}

std::string comparison_to_json(const ComparisonReport& c, int indent) {
    json doc;
    doc["artifact_version"] = FEWSHOT_VERSION;
    doc["manifest_checksum"] = c.manifest_checksum;
    doc["stats_config"] = stats_config_json(c.stats_config);
    json views = json::array();
    for (const auto& v : c.views) {
        views.push_back({{"view", to_string(v.view)},
                         {"mean_diff", v.result.mean_diff},
                         {"diff_ci_low", v.result.diff_ci.low},
                         {"diff_ci_up", v.result.diff_ci.up},
                         {"n_episodes", v.result.n}});
    }
    doc["views"] = views;
    return doc.dump(indent);
}

}  // namespace fewshot
