#include "fewshot/sampler.hpp"
#include "fewshot/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace fewshot;

namespace {

std::vector<double> normal_scores(std::size_t n, double mu, double sd, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(mu, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(gen);
    return v;
}

}  // namespace

TEST_CASE("aggregate") {
    const std::vector<double> v = {1, 2, 3, 4};
    const auto s = aggregate(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stdev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(aggregate(std::vector<double>{0.7}).stdev == 0.0);
    CHECK_THROWS(aggregate(std::vector<double>{}));
}

TEST_CASE("percentile uses linear interpolation between closest ranks") {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    CHECK(percentile_sorted(a, 0.25) == doctest::Approx(2.0));
    CHECK(percentile_sorted(a, 0.10) == doctest::Approx(1.4));
    CHECK(percentile_sorted(a, 0.0) == 1.0);
    CHECK(percentile_sorted(a, 1.0) == 5.0);
    const std::vector<double> b = {10, 20, 30, 40};
    CHECK(percentile_sorted(b, 0.5) == doctest::Approx(25.0));
    CHECK(percentile_sorted(b, 0.9) == doctest::Approx(37.0));
}

TEST_CASE("score_episode") {
    Episode e;
    e.episode_id = "d:0:few";
    e.test_example_ids = {"a", "b", "c", "d"};
    const std::unordered_map<std::string, std::string> gold = {{"a", "x"}, {"b", "y"}, {"c", "x"}, {"d", "caf\xC3\xA9"}};
    const std::vector<std::string> preds = {"x", " y ", "y", "cafe\xCC\x81"};
    CHECK(score_episode(e, preds, gold) == doctest::Approx(0.75));
    const std::vector<std::string> short_preds = {"x"};
    CHECK_THROWS_AS(score_episode(e, short_preds, gold), Error);
    const std::vector<std::string> garbage = {"\xFF", "nope", "x", "X"};
    CHECK(score_episode(e, garbage, gold) == doctest::Approx(0.25));
}

TEST_CASE("bootstrap on two points matches the exact resampling distribution") {
    // Means of two draws from {0, 1}: 0, 0.5, 1 with probabilities 1/4, 1/2, 1/4,
    // so the 2.5% and 97.5% quantiles are 0 and 1.
    const std::vector<double> v = {0.0, 1.0};
    const auto ci = bootstrap_ci(v, StatsConfig{0.95, 4000, 3, 1.96});
    CHECK(ci.low == 0.0);
    CHECK(ci.up == 1.0);
    const auto narrow = bootstrap_ci(v, StatsConfig{0.40, 4000, 3, 1.96});
    CHECK(narrow.low == 0.5);
    CHECK(narrow.up == 0.5);
}

TEST_CASE("bootstrap half-width agrees with the normal approximation") {
    const auto v = normal_scores(90, 0.7, 0.05, 1);
    const auto s = aggregate(v);
    const double plugin_sd = s.stdev * std::sqrt(89.0 / 90.0);
    const double expected = 1.959964 * plugin_sd / std::sqrt(90.0);
    const auto ci = bootstrap_ci(v, StatsConfig{0.95, 20000, 0, 1.96});
    CHECK(ci.width() / 2 == doctest::Approx(expected).epsilon(0.05));
    CHECK(ci.contains(s.mean));
}

TEST_CASE("bootstrap invariants") {
    const auto v = normal_scores(50, 0.5, 0.1, 2);
    const StatsConfig c{0.95, 2000, 9, 1.96};
    const auto ci = bootstrap_ci(v, c);

    SUBCASE("deterministic for a fixed seed") {
        const auto again = bootstrap_ci(v, c);
        CHECK(again.low == ci.low);
        CHECK(again.up == ci.up);
    }
    SUBCASE("shift-equivariant") {
        auto shifted = v;
        for (auto& x : shifted) x += 0.25;
        const auto s = bootstrap_ci(shifted, c);
        CHECK(s.low == doctest::Approx(ci.low + 0.25).epsilon(1e-12));
        CHECK(s.up == doctest::Approx(ci.up + 0.25).epsilon(1e-12));
    }
    SUBCASE("inside the data range") {
        CHECK(ci.low >= *std::min_element(v.begin(), v.end()));
        CHECK(ci.up <= *std::max_element(v.begin(), v.end()));
    }
    SUBCASE("constant data gives zero width") {
        const std::vector<double> flat(30, 0.42);
        const auto f = bootstrap_ci(flat, c);
        CHECK(f.low == 0.42);
        CHECK(f.up == 0.42);
        CHECK(sem_ci(flat, c) == 0.0);
    }
    SUBCASE("single score") {
        const std::vector<double> one = {0.3};
        const auto f = bootstrap_ci(one, c);
        CHECK(f.low == 0.3);
        CHECK(f.up == 0.3);
        CHECK_THROWS(sem_ci(one, c));
    }
}

TEST_CASE("sem_ci") {
    const std::vector<double> v = {0.6, 0.7, 0.8};
    const StatsConfig c{0.95, 10, 0, 1.96};
    CHECK(sem_ci(v, c) == doctest::Approx(1.96 * 0.1 / std::sqrt(3.0)));
    const StatsConfig c2{0.95, 10, 0, 2.576};
    CHECK(sem_ci(v, c2) == doctest::Approx(2.576 * 0.1 / std::sqrt(3.0)));
}

TEST_CASE("paired comparison") {
    const auto a = normal_scores(60, 0.6, 0.05, 4);
    const StatsConfig c{0.95, 2000, 1, 1.96};

    const auto same = paired_compare(a, a, c);
    CHECK(same.mean_diff == 0.0);
    CHECK(same.diff_ci.low == 0.0);
    CHECK(same.diff_ci.up == 0.0);

    auto b = a;
    for (auto& x : b) x -= 0.1;
    const auto shifted = paired_compare(a, b, c);
    CHECK(shifted.mean_diff == doctest::Approx(0.1));
    CHECK(shifted.diff_ci.low == doctest::Approx(0.1));
    CHECK(shifted.diff_ci.up == doctest::Approx(0.1));
    CHECK(shifted.n == 60);

    const std::vector<double> shorter(10, 0.5);
    CHECK_THROWS(paired_compare(a, shorter, c));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS((StatsConfig{1.0, 10, 0, 1.96}.validate()), ConfigError);
    CHECK_THROWS_AS((StatsConfig{0.95, 0, 0, 1.96}.validate()), ConfigError);
    CHECK_NOTHROW(StatsConfig{}.validate());
}
