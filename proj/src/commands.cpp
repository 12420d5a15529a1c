#include "fewshot/cli.hpp"

#include "fewshot/corpus.hpp"
#include "fewshot/designer.hpp"
#include "fewshot/manifest.hpp"
#include "fewshot/promptkit.hpp"
#include "fewshot/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fewshot::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 1;
    bool pretty = false;
};

struct DatasetArgs {
    std::vector<std::string> pairs;  // "spec.json,data.jsonl"
    std::string dir;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dataset", pairs, "Dataset as SPEC_JSON,DATA_JSONL (repeatable)")->delimiter('\0');
        cmd->add_option("--data-dir", dir, "Directory of <id>.spec.json + <id>.jsonl pairs");
    }

    std::vector<Dataset> load() const {
        std::vector<std::pair<fs::path, fs::path>> files;
        for (const auto& p : pairs) {
            const auto comma = p.find(',');
            if (comma == std::string::npos) throw ConfigError("--dataset expects SPEC_JSON,DATA_JSONL, got '" + p + "'");
            files.emplace_back(p.substr(0, comma), p.substr(comma + 1));
        }
        if (!dir.empty()) {
            if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
            std::vector<fs::path> specs;
            for (const auto& entry : fs::directory_iterator(dir)) {
                const auto name = entry.path().filename().string();
                if (name.size() > 10 && name.ends_with(".spec.json")) specs.push_back(entry.path());
            }
            std::sort(specs.begin(), specs.end());
            for (const auto& s : specs) {
                const auto name = s.filename().string();
                const auto data = s.parent_path() / (name.substr(0, name.size() - 10) + ".jsonl");
                if (!fs::exists(data)) throw IoError("no data file '" + data.string() + "' for spec '" + s.string() + "'");
                files.emplace_back(s, data);
            }
        }
        if (files.empty()) throw ConfigError("no datasets given; use --dataset or --data-dir");
        std::vector<Dataset> out;
        for (const auto& [spec, data] : files) out.push_back(load_dataset(spec, data));
        return out;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

/// Timestamps and invocation details go to a sidecar so that primary
/// outputs stay byte-identical across replays.
void write_sidecar(const std::string& primary, const std::string& command, const std::vector<std::string>& args) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json meta{{"command", command}, {"args", args}, {"created_at", stamp}, {"artifact_version", FEWSHOT_VERSION}};
    write_text(primary + ".meta.json", meta.dump(2) + "\n");
}

void emit_error(std::ostream& err, bool pretty, const std::string& code, const std::string& message,
                const json& extra = json::object()) {
    if (pretty) {
        err << "error [" << code << "]: " << message << '\n';
        for (const auto& [k, v] : extra.items()) err << "  " << k << ": " << v.dump() << '\n';
        return;
    }
    json doc{{"error", code}, {"message", message}};
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    err << doc.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

StatsConfig stats_from(double confidence, std::uint32_t resamples, std::uint64_t seed, double z) {
    StatsConfig c;
    c.confidence_level = confidence;
    c.bootstrap_resamples = resamples;
    c.bootstrap_seed = seed;
    c.z_critical = z;
    c.validate();
    return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Few-shot episode benchmark toolkit: build, verify, prompt, score, compare, design"};
    app.require_subcommand(1);
    Globals g;
    app.set_config("--config", "", "Read flag values from a TOML/INI file");
    app.add_option("--seed", g.seed, "Seed for every random choice of the command")
        ->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    app.add_flag("--pretty", g.pretty, "Human-readable errors instead of JSON");

    // build
    auto* build = app.add_subcommand("build", "Sample episodes and write a checksummed manifest");
    DatasetArgs build_data;
    build_data.attach(build);
    SamplingConfig sampling;
    std::string build_out, preset, phase = "meta_test";
    bool unpaired = false;
    build->add_option("--out", build_out, "Manifest path")->required();
    build->add_option("--episodes", sampling.episodes_per_dataset, "Episodes per dataset");
    build->add_option("--k-min", sampling.k_min);
    build->add_option("--k-max", sampling.k_max);
    build->add_option("--way-min", sampling.way_min);
    build->add_option("--way-cap", sampling.way_cap);
    build->add_option("--test-size", sampling.target_mean_test_size, "Target test examples per episode");
    build->add_flag("--unpaired", unpaired, "Split episodes into separate few-shot and zero-shot halves");
    build->add_option("--phase", phase, "meta_train | meta_val | meta_test");
    build->add_option("--preset", preset, "balanced-5way-5shot");

    // verify
    auto* verify = app.add_subcommand("verify", "Re-derive a manifest and check its checksum");
    DatasetArgs verify_data;
    verify_data.attach(verify);
    std::string verify_manifest_path;
    verify->add_option("--manifest", verify_manifest_path)->required();

    // prompts
    auto* prompts = app.add_subcommand("prompts", "Write the multiple-choice prompt dump for a manifest");
    DatasetArgs prompt_data;
    prompt_data.attach(prompts);
    std::string prompts_manifest, prompts_out;
    prompts->add_option("--manifest", prompts_manifest)->required();
    prompts->add_option("--out", prompts_out)->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Produce a predictions file with a reference or remote predictor");
    DatasetArgs predict_data;
    predict_data.attach(predict);
    std::string predict_manifest, predict_out, predictor = "random", protocol = "pretraining_only";
    RemoteOptions remote;
    long timeout_secs = 60;
    predict->add_option("--manifest", predict_manifest)->required();
    predict->add_option("--out", predict_out)->required();
    predict->add_option("--predictor", predictor, "random | majority | oracle | remote")
        ->check(CLI::IsMember({"random", "majority", "oracle", "remote"}));
    predict->add_option("--protocol-tag", protocol, "pretraining_only | meta_trained");
    predict->add_option("--endpoint", remote.endpoint);
    predict->add_option("--batch-size", remote.batch_size);
    predict->add_option("--timeout-secs", timeout_secs);
    predict->add_option("--retries", remote.retries);
    predict->add_option("--concurrency", remote.max_concurrency);

    // score
    auto* score = app.add_subcommand("score", "Score predictions against a manifest");
    DatasetArgs score_data;
    score_data.attach(score);
    std::string score_manifest, score_predictions, score_out;
    double confidence = 0.95, z = 1.96;
    std::uint32_t resamples = 5000;
    score->add_option("--manifest", score_manifest)->required();
    score->add_option("--predictions", score_predictions)->required();
    score->add_option("--out", score_out)->required();

    // compare
    auto* compare = app.add_subcommand("compare", "Paired bootstrap comparison of two prediction files");
    DatasetArgs compare_data;
    compare_data.attach(compare);
    std::string compare_manifest, compare_a, compare_b, compare_out;
    compare->add_option("--manifest", compare_manifest)->required();
    compare->add_option("--a", compare_a, "Predictions of system A")->required();
    compare->add_option("--b", compare_b, "Predictions of system B")->required();
    compare->add_option("--out", compare_out)->required();

    for (auto* cmd : {score, compare}) {
        cmd->add_option("--confidence", confidence);
        cmd->add_option("--bootstrap-resamples", resamples);
        cmd->add_option("--z", z, "Critical value for the standard-error CI");
    }

    // design
    auto* design = app.add_subcommand("design", "Simulate CI coverage/width over a budget grid");
    std::string design_config, csv_out, per_mu_out, json_out;
    std::uint32_t runs = 0;
    double coverage_tolerance = 0.01, marginal_threshold = 0.10;
    std::uint32_t min_viable_episodes = 60;
    design->add_option("--design-config", design_config, "JSON with cost_model / sim_config");
    design->add_option("--runs", runs, "Override runs_per_config");
    design->add_option("--csv", csv_out, "Grid table output")->required();
    design->add_option("--per-mu-csv", per_mu_out, "Per-mu coverage/width output");
    design->add_option("--json", json_out, "Recommendation output")->required();
    design->add_option("--coverage-tolerance", coverage_tolerance);
    design->add_option("--marginal-threshold", marginal_threshold);
    design->add_option("--min-viable-episodes", min_viable_episodes,
                       "A budget counts only if its optimum uses more episodes than this");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, g.pretty, "usage_error", e.what());
        return 2;
    }

    const std::vector<std::string> tail(args.begin() + (args.empty() ? 0 : 1), args.end());
    try {
        if (*build) {
            if (preset == "balanced-5way-5shot") {
                const auto seed = sampling.global_seed;
                sampling = SamplingConfig::balanced_5way_5shot(parse_phase(phase));
                sampling.global_seed = seed;
            } else if (!preset.empty()) {
                throw ConfigError("unknown preset '" + preset + "'");
            } else {
                sampling.phase = parse_phase(phase);
                if (unpaired) sampling.zero_shot_paired = false;
            }
            sampling.global_seed = g.seed;
            const auto manifest = build_manifest(build_data.load(), sampling, g.threads);
            save_manifest(build_out, manifest);
            write_sidecar(build_out, "build", tail);
            out << json{{"manifest", build_out}, {"episodes", manifest.episodes.size()}, {"checksum", manifest.checksum}}
                       .dump()
                << '\n';
            return 0;
        }
        if (*verify) {
            const auto manifest = load_manifest(verify_manifest_path);
            const auto report = verify_manifest(manifest, verify_data.load(), g.threads);
            json failed = json::array();
            for (const auto& c : report.episodes) {
                if (!c.passed) failed.push_back({{"episode_id", c.episode_id}, {"field", c.field}});
            }
            json doc{{"passed", report.passed()},
                     {"checksum_ok", report.checksum_ok},
                     {"episodes_checked", report.episodes.size()},
                     {"failures", failed}};
            if (!report.global_error.empty()) doc["error"] = report.global_error;
            out << doc.dump() << '\n';
            if (!report.passed()) {
                emit_error(err, g.pretty, report.checksum_ok ? "verification_failed" : "checksum_mismatch",
                           report.global_error.empty() ? std::to_string(report.failures()) + " episode(s) diverge"
                                                       : report.global_error);
                return 1;
            }
            return 0;
        }
        if (*prompts) {
            const auto manifest = load_manifest(prompts_manifest);
            require_valid_checksum(manifest);
            auto file = open_out(prompts_out);
            write_prompt_dump(file, manifest, prompt_data.load());
            write_sidecar(prompts_out, "prompts", tail);
            return 0;
        }
        if (*predict) {
            const auto manifest = load_manifest(predict_manifest);
            require_valid_checksum(manifest);
            PredictionSet preds;
            if (predictor == "random") {
                preds = predict_random_uniform(manifest, g.seed);
            } else if (predictor == "majority") {
                preds = predict_majority_train(manifest, predict_data.load(), g.seed);
            } else if (predictor == "oracle") {
                preds = predict_oracle(manifest, predict_data.load());
            } else {
                if (remote.endpoint.empty()) throw ConfigError("--endpoint is required for the remote predictor");
                remote.timeout = std::chrono::seconds(timeout_secs);
                preds = predict_remote_manifest(manifest, predict_data.load(), remote, parse_protocol_tag(protocol));
            }
            preds.protocol_tag = parse_protocol_tag(protocol);
            save_predictions(predict_out, preds);
            write_sidecar(predict_out, "predict", tail);
            return 0;
        }
        if (*score) {
            const auto manifest = load_manifest(score_manifest);
            const auto preds = load_predictions(score_predictions);
            const auto config = stats_from(confidence, resamples, g.seed, z);
            const auto report = build_report(manifest, preds, score_data.load(), config);
            write_text(score_out, report_to_json(report) + "\n");
            write_sidecar(score_out, "score", tail);
            return 0;
        }
        if (*compare) {
            const auto manifest = load_manifest(compare_manifest);
            const auto datasets = compare_data.load();
            const auto config = stats_from(confidence, resamples, g.seed, z);
            const auto a = build_report(manifest, load_predictions(compare_a), datasets, config);
            const auto b = build_report(manifest, load_predictions(compare_b), datasets, config);
            write_text(compare_out, comparison_to_json(compare_reports(a, b, config)) + "\n");
            write_sidecar(compare_out, "compare", tail);
            return 0;
        }
        if (*design) {
            SimConfig sim;
            CostModel cost;
            if (!design_config.empty()) {
                std::ifstream in(design_config, std::ios::binary);
                if (!in) throw IoError("cannot open '" + design_config + "'");
                std::stringstream ss;
                ss << in.rdbuf();
                parse_design_config(ss.str(), sim, cost);
            }
            if (runs > 0) sim.runs_per_config = runs;
            if (g.seed_set) sim.seed = g.seed;
            sim.validate();
            const auto grid = grid_search(sim, cost, g.threads);
            const auto rec = select_configuration(grid.rows, coverage_tolerance, marginal_threshold,
                                                  sim.stats.confidence_level, min_viable_episodes);
            {
                auto file = open_out(csv_out);
                write_grid_csv(file, grid);
            }
            if (!per_mu_out.empty()) {
                auto file = open_out(per_mu_out);
                write_per_mu_csv(file, grid);
            }
            write_text(json_out, recommendation_to_json(rec, grid) + "\n");
            write_sidecar(json_out, "design", tail);
            if (!rec.found) {
                emit_error(err, g.pretty, "no_recommendation", rec.diagnostics);
                return 1;
            }
            return 0;
        }
    } catch (const DatasetValidationError& e) {
        json issues = json::array();
        for (const auto& i : e.issues()) {
            issues.push_back({{"code", i.code}, {"message", i.message}, {"record", i.record}, {"line", i.line}});
        }
        emit_error(err, g.pretty, e.code(), e.what(), json{{"issues", issues}});
        return 1;
    } catch (const ValidationError& e) {
        json extra = json::object();
        if (!e.record().empty()) extra["record"] = e.record();
        if (e.line()) extra["line"] = e.line();
        emit_error(err, g.pretty, e.code(), e.what(), extra);
        return 1;
    } catch (const Error& e) {
        emit_error(err, g.pretty, e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, g.pretty, "internal_error", e.what());
        return 1;
    }
    return 0;
}

}  // namespace fewshot::cli
