#include "fewshot/promptkit.hpp"
#include "fewshot/report.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace fewshot;

namespace {

struct Fixture {
    std::vector<Dataset> datasets = testing::toy_datasets();
    BenchmarkManifest manifest;
    StatsConfig stats{0.95, 1000, 5, 1.96};

    Fixture() {
        SamplingConfig c;
        c.global_seed = 21;
        c.episodes_per_dataset = 12;
        c.target_mean_test_size = 60;
        manifest = build_manifest(datasets, c);
    }
};

}  // namespace

TEST_CASE("oracle predictions score exactly 1 everywhere") {
    Fixture f;
    const auto report = build_report(f.manifest, predict_oracle(f.manifest, f.datasets), f.datasets, f.stats);
    CHECK(report.per_episode.size() == f.manifest.episodes.size());
    for (const auto& e : report.per_episode) CHECK(e.accuracy == 1.0);
    for (const auto& g : report.groups) {
        CHECK(g.stats.mean == 1.0);
        CHECK(g.stats.stdev == 0.0);
        CHECK(g.stats.ci_low == 1.0);
        CHECK(g.stats.ci_up == 1.0);
    }
    // 5 datasets, the 4 transfer types present in the toy set, overall; both views.
    CHECK(report.groups.size() == 2 * (5 + 4 + 1));
    REQUIRE(report.find(Scope::overall, "overall", View::zero_shot));
    CHECK(report.find(Scope::overall, "overall", View::zero_shot)->stats.n_episodes == 60);
    CHECK(report.find(Scope::transfer_type, "class", View::few_shot)->stats.n_episodes == 24);
}

TEST_CASE("group statistics equal an independent recomputation") {
    Fixture f;
    const auto preds = predict_random_uniform(f.manifest, 3);
    const auto report = build_report(f.manifest, preds, f.datasets, f.stats);
    std::vector<double> few_nli;
    for (const auto& e : report.per_episode) {
        if (e.episode_id.starts_with("toy_nli:") && e.view == View::few_shot) few_nli.push_back(e.accuracy);
    }
    const auto* g = report.find(Scope::dataset, "toy_nli", View::few_shot);
    REQUIRE(g);
    const auto s = aggregate(few_nli);
    CHECK(g->stats.mean == doctest::Approx(s.mean));
    CHECK(g->stats.stdev == doctest::Approx(s.stdev));
    CHECK(*g->stats.ci_sem_halfwidth == doctest::Approx(sem_ci(few_nli, f.stats)));
    const auto ci = bootstrap_ci(few_nli, f.stats);
    CHECK(g->stats.ci_low == ci.low);
    CHECK(g->stats.ci_up == ci.up);
    CHECK(g->stats.ci_low_offset() == doctest::Approx(s.mean - ci.low));
}

TEST_CASE("random predictions sit near chance") {
    Fixture f;
    const auto report = build_report(f.manifest, predict_random_uniform(f.manifest, 8), f.datasets, f.stats);
    double chance = 0;
    std::size_t n = 0;
    for (const auto& e : f.manifest.episodes) {
        if (e.is_zero_shot_view) continue;
        chance += 1.0 / static_cast<double>(e.label_set.size());
        ++n;
    }
    chance /= static_cast<double>(n);
    const auto* overall = report.find(Scope::overall, "overall", View::few_shot);
    CHECK(overall->stats.mean == doctest::Approx(chance).epsilon(0.1));
}

TEST_CASE("scoring refuses inconsistent inputs") {
    Fixture f;
    auto preds = predict_oracle(f.manifest, f.datasets);

    SUBCASE("missing episode") {
        preds.entries.erase(f.manifest.episodes[3].episode_id);
        try {
            build_report(f.manifest, preds, f.datasets, f.stats);
            FAIL("expected missing_episodes");
        } catch (const Error& e) {
            CHECK(e.code() == "missing_episodes");
            CHECK(std::string(e.what()).find(f.manifest.episodes[3].episode_id) != std::string::npos);
        }
    }
    SUBCASE("unknown episode") {
        preds.entries["ghost:0:few"] = {};
        CHECK_THROWS_WITH_AS(build_report(f.manifest, preds, f.datasets, f.stats), doctest::Contains("ghost"), Error);
    }
    SUBCASE("checksum mismatch") {
        preds.manifest_checksum = std::string(64, '0');
        CHECK_THROWS_AS(build_report(f.manifest, preds, f.datasets, f.stats), Error);
    }
    SUBCASE("tampered manifest") {
        auto m = f.manifest;
        m.episodes[0].test_example_ids.pop_back();
        CHECK_THROWS_AS(build_report(m, preds, f.datasets, f.stats), Error);
    }
    SUBCASE("wrong prediction count") {
        preds.entries[f.manifest.episodes[0].episode_id].pop_back();
        CHECK_THROWS_AS(build_report(f.manifest, preds, f.datasets, f.stats), Error);
    }
}

TEST_CASE("predictions file round trip") {
    Fixture f;
    auto preds = predict_random_uniform(f.manifest, 1);
    preds.protocol_tag = ProtocolTag::meta_trained;
    std::stringstream io;
    write_predictions(io, preds);
    const auto back = read_predictions(io);
    CHECK(back.manifest_checksum == preds.manifest_checksum);
    CHECK(back.protocol_tag == ProtocolTag::meta_trained);
    CHECK(back.entries == preds.entries);
}

TEST_CASE("report JSON carries metadata") {
    Fixture f;
    const auto report = build_report(f.manifest, predict_oracle(f.manifest, f.datasets), f.datasets, f.stats);
    const auto j = nlohmann::json::parse(report_to_json(report));
    CHECK(j.at("manifest_checksum") == f.manifest.checksum);
    CHECK(j.at("protocol_tag") == "pretraining_only");
    CHECK(j.contains("artifact_version"));
    CHECK(j.at("per_episode").size() == f.manifest.episodes.size());
}

TEST_CASE("paired comparison of two reports") {
    Fixture f;
    const auto oracle = build_report(f.manifest, predict_oracle(f.manifest, f.datasets), f.datasets, f.stats);
    const auto random = build_report(f.manifest, predict_random_uniform(f.manifest, 2), f.datasets, f.stats);
    const auto cmp = compare_reports(oracle, random, f.stats);
    REQUIRE(cmp.views.size() == 2);
    for (const auto& v : cmp.views) {
        CHECK(v.result.mean_diff > 0.4);
        CHECK(v.result.diff_ci.low > 0.0);
        CHECK(v.result.n == 60);
    }
    const auto self = compare_reports(oracle, oracle, f.stats);
    for (const auto& v : self.views) CHECK(v.result.mean_diff == 0.0);
}
