#include "fewshot/designer.hpp"

#include "fewshot/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fewshot {

using nlohmann::json;

void CostModel::validate() const {
    if (c_few_episode < 0 || c_zero_episode < 0 || c_few_instance < 0 || c_zero_instance < 0) {
        throw ConfigError("cost model entries must be nonnegative");
    }
    if (per_episode() <= 0) throw ConfigError("per-episode cost must be positive");
    if (per_instance() <= 0) throw ConfigError("per-instance cost must be positive");
    if (n_datasets < 1) throw ConfigError("n_datasets must be positive");
}

void SimConfig::validate() const {
    if (!(sigma_acc >= 0)) throw ConfigError("sigma_acc must be nonnegative");
    for (double mu : mu_acc_grid) {
        if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("mu_acc grid values must lie in (0, 1]");
    }
    if (runs_per_config < 1) throw ConfigError("runs_per_config must be positive");
    for (double b : budgets_gpu_hours) {
        if (!(b > 0)) throw ConfigError("budgets must be positive");
    }
    for (auto n : episode_grid) {
        if (n < 2) throw ConfigError("episode grid values must be >= 2");
    }
    stats.validate();
}

double minimum_budget_gpu_hours(std::uint32_t n_episodes, const CostModel& cost) {
    return static_cast<double>(cost.n_datasets) * n_episodes * cost.per_episode() / 3600.0;
}

double solve_mean_test_size(double budget_gpu_hours, std::uint32_t n_episodes, const CostModel& cost) {
    cost.validate();
    if (n_episodes < 1) throw ConfigError("n_episodes must be positive");
    const double per_episode_share =
        budget_gpu_hours * 3600.0 / (static_cast<double>(cost.n_datasets) * n_episodes);
    const double overhead = cost.per_episode();
    if (per_episode_share < overhead * (1.0 - 1e-12)) {
        const double minimum = minimum_budget_gpu_hours(n_episodes, cost);
        std::ostringstream os;
        os << "budget " << budget_gpu_hours << " GPU-h cannot cover " << n_episodes << " episodes x "
           << cost.n_datasets << " datasets; minimum feasible budget is " << minimum << " GPU-h";
        throw InfeasibleBudget(os.str(), minimum);
    }
    return std::max(0.0, per_episode_share - overhead) / cost.per_instance();
}

double benchmark_cost_seconds(std::uint32_t n_episodes, double mean_test_size, const CostModel& cost) {
    return static_cast<double>(cost.n_datasets) * n_episodes *
           (cost.per_episode() + mean_test_size * cost.per_instance());
}

double clamped_normal_mean(double mu, double sigma) {
    if (sigma <= 0) return std::clamp(mu, 0.0, 1.0);
    auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    auto upper_tail = [](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); };
    // E[(X - c)+] = sigma * (phi(z) - z * (1 - Phi(z))), z = (c - mu) / sigma.
    auto excess = [&](double z) { return sigma * (pdf(z) - z * upper_tail(z)); };
    const double above_one = excess((1.0 - mu) / sigma);
    const double below_zero = excess(mu / sigma);
    return mu - above_one + below_zero;
}

RunOutcome simulate_run(Stream& rng, std::uint32_t n_episodes, double mean_test_size, double mu_acc,
                        double sigma_acc, const StatsConfig& stats) {
    if (n_episodes < 2) throw ConfigError("simulate_run needs at least two episodes");
    const auto test_size = static_cast<std::int64_t>(std::floor(mean_test_size));
    if (test_size < 1) throw ConfigError("simulate_run needs a test size of at least one");

    std::vector<double> accuracies(n_episodes);
    for (auto& acc : accuracies) {
        const double latent = std::clamp(rng.normal(mu_acc, sigma_acc), 0.0, 1.0);
        acc = static_cast<double>(rng.binomial(test_size, latent)) / static_cast<double>(test_size);
    }
    const Interval ci = bootstrap_ci(accuracies, stats.bootstrap_resamples, stats.confidence_level,
                                     rng.fork("bootstrap"));
    return {ci.contains(clamped_normal_mean(mu_acc, sigma_acc)), ci.width()};
}

namespace {


MuSummary simulate_mu(const SimConfig& config, double budget, std::uint32_t n_episodes, double mean_test_size,
                      double mu) {
    MuSummary s;
    s.mu_acc = mu;
    std::uint32_t covered = 0;
    double width_sum = 0.0;
    const Stream base = derive_stream(config.seed, "designer", 0, "simulation");
    for (std::uint32_t r = 0; r < config.runs_per_config; ++r) {
        Stream rng = base.fork(std::bit_cast<std::uint64_t>(budget), n_episodes, std::bit_cast<std::uint64_t>(mu), r);
        const auto out = simulate_run(rng, n_episodes, mean_test_size, mu, config.sigma_acc, config.stats);
        covered += out.covered ? 1 : 0;
        width_sum += out.ci_width;
    }
    s.coverage = static_cast<double>(covered) / config.runs_per_config;
    s.mean_width = width_sum / config.runs_per_config;
    return s;
}

void finish_row(SimResultRow& row) {
    std::vector<double> cov, width;
    for (const auto& m : row.per_mu) {
        cov.push_back(m.coverage);
        width.push_back(m.mean_width);
    }
    row.coverage_probability = aggregate(cov).mean;
    row.mean_ci_width = aggregate(width).mean;
    std::sort(cov.begin(), cov.end());
    std::sort(width.begin(), width.end());
    row.coverage_p10 = percentile_sorted(cov, 0.10);
    row.coverage_p90 = percentile_sorted(cov, 0.90);
    row.width_p10 = percentile_sorted(width, 0.10);
    row.width_p90 = percentile_sorted(width, 0.90);
}

SimResultRow start_row(double budget, std::uint32_t n_episodes, const CostModel& cost) {
    SimResultRow row;
    row.budget_gpu_hours = budget;
    row.n_episodes = n_episodes;
    row.mean_test_size = solve_mean_test_size(budget, n_episodes, cost);
    row.test_size_used = static_cast<std::uint64_t>(std::floor(row.mean_test_size));
    if (row.test_size_used < 1) {
        throw InfeasibleBudget("budget " + std::to_string(budget) + " GPU-h leaves less than one test example per episode at " +
                                   std::to_string(n_episodes) + " episodes",
                               minimum_budget_gpu_hours(n_episodes, cost));
    }
    return row;
}

}  // namespace

SimResultRow simulate_config(const SimConfig& config, const CostModel& cost, double budget_gpu_hours,
                             std::uint32_t n_episodes, unsigned threads) {
    config.validate();
    SimResultRow row = start_row(budget_gpu_hours, n_episodes, cost);
    row.per_mu.resize(config.mu_acc_grid.size());
    parallel_for(config.mu_acc_grid.size(), threads, [&](std::size_t i) {
        row.per_mu[i] = simulate_mu(config, budget_gpu_hours, n_episodes, row.mean_test_size, config.mu_acc_grid[i]);
    });
    finish_row(row);
    return row;
}

GridResult grid_search(const SimConfig& config, const CostModel& cost, unsigned threads) {
    config.validate();
    cost.validate();
    auto budgets = config.budgets_gpu_hours;
    auto episodes = config.episode_grid;
    std::sort(budgets.begin(), budgets.end());
    budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
    std::sort(episodes.begin(), episodes.end());
    episodes.erase(std::unique(episodes.begin(), episodes.end()), episodes.end());

    GridResult grid;
    for (double b : budgets) {
        for (auto n : episodes) {
            try {
                grid.rows.push_back(start_row(b, n, cost));
            } catch (const InfeasibleBudget& e) {
                grid.skipped.push_back({b, n, e.what()});
            }
        }
    }
    const std::size_t n_mu = config.mu_acc_grid.size();
    for (auto& row : grid.rows) row.per_mu.resize(n_mu);
    parallel_for(grid.rows.size() * n_mu, threads, [&](std::size_t t) {
        auto& row = grid.rows[t / n_mu];
        row.per_mu[t % n_mu] = simulate_mu(config, row.budget_gpu_hours, row.n_episodes, row.mean_test_size,
                                           config.mu_acc_grid[t % n_mu]);
    });
    for (auto& row : grid.rows) finish_row(row);
    return grid;
}

Recommendation select_configuration(const std::vector<SimResultRow>& rows, double coverage_tolerance,
                                    double marginal_threshold, double confidence_level,
                                    std::uint32_t min_viable_episodes) {
    Recommendation rec;
    if (rows.empty()) {
        rec.diagnostics = "no simulation rows supplied";
        return rec;
    }
    std::map<double, const SimResultRow*> best;
    for (const auto& row : rows) {
        if (std::abs(row.coverage_probability - confidence_level) > coverage_tolerance + 1e-12) continue;
        auto& slot = best[row.budget_gpu_hours];
        if (!slot || row.mean_ci_width < slot->mean_ci_width ||
            (row.mean_ci_width == slot->mean_ci_width && row.n_episodes < slot->n_episodes)) {
            slot = &row;
        }
    }
    if (best.empty()) {
        const auto closest = std::min_element(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
            return std::abs(a.coverage_probability - confidence_level) <
                   std::abs(b.coverage_probability - confidence_level);
        });
        std::ostringstream os;
        os << "no configuration has coverage within " << coverage_tolerance << " of " << confidence_level
           << "; closest is budget " << closest->budget_gpu_hours << " GPU-h, " << closest->n_episodes
           << " episodes with coverage " << closest->coverage_probability;
        rec.diagnostics = os.str();
        return rec;
    }
    for (const auto& [budget, row] : best) {
        rec.optima.push_back({budget, row->n_episodes, row->mean_test_size, row->mean_ci_width,
                              row->coverage_probability, row->n_episodes > min_viable_episodes});
    }
    // Budgets whose optimum sits at too few episodes are listed but take no
    // part in the schedule.
    std::vector<const BudgetOptimum*> viable;
    for (const auto& o : rec.optima) {
        if (o.viable) viable.push_back(&o);
    }
    if (viable.empty()) {
        std::ostringstream os;
        os << "no budget has a covered optimum with more than " << min_viable_episodes << " episodes";
        rec.diagnostics = os.str();
        return rec;
    }
    const double baseline = viable.front()->mean_ci_width;
    for (std::size_t i = 0; i + 1 < viable.size(); ++i) {
        const auto& a = *viable[i];
        const auto& b = *viable[i + 1];
        WidthReduction r;
        r.from_budget = a.budget_gpu_hours;
        r.to_budget = b.budget_gpu_hours;
        const double drop = a.mean_ci_width - b.mean_ci_width;
        r.reduction = baseline > 0 ? drop / baseline : 0.0;
        r.reduction_vs_previous = a.mean_ci_width > 0 ? drop / a.mean_ci_width : 0.0;
        rec.reductions.push_back(r);
    }
    std::size_t pick = viable.size() - 1;
    for (std::size_t i = 0; i < rec.reductions.size(); ++i) {
        if (rec.reductions[i].reduction < marginal_threshold) {
            pick = i;
            break;
        }
    }
    const auto& chosen = *viable[pick];
    rec.found = true;
    rec.budget_gpu_hours = chosen.budget_gpu_hours;
    rec.n_episodes = chosen.n_episodes;
    rec.mean_test_size = chosen.mean_test_size;
    rec.mean_ci_width = chosen.mean_ci_width;
    std::ostringstream os;
    os << viable.size() << " of " << rec.optima.size() << " budget(s) have a viable optimum; minimum viable budget "
       << viable.front()->budget_gpu_hours << " GPU-h";
    if (pick + 1 == viable.size() && rec.reductions.size() == pick && pick > 0) {
        os << "; no increment fell below the marginal threshold, largest budget chosen";
    }
    rec.diagnostics = os.str();
    return rec;
}

void write_grid_csv(std::ostream& out, const GridResult& grid) {
    out << "budget_gpu_hours,n_episodes,mean_test_size,test_size_used,coverage_probability,mean_ci_width,"
           "width_p10,width_p90,coverage_p10,coverage_p90\n";
    out << std::setprecision(10);
    for (const auto& r : grid.rows) {
        out << r.budget_gpu_hours << ',' << r.n_episodes << ',' << r.mean_test_size << ',' << r.test_size_used << ','
            << r.coverage_probability << ',' << r.mean_ci_width << ',' << r.width_p10 << ',' << r.width_p90 << ','
            << r.coverage_p10 << ',' << r.coverage_p90 << '\n';
    }
}

void write_per_mu_csv(std::ostream& out, const GridResult& grid) {
    out << "budget_gpu_hours,n_episodes,mu_acc,coverage,mean_ci_width\n";
    out << std::setprecision(10);
    for (const auto& r : grid.rows) {
        for (const auto& m : r.per_mu) {
            out << r.budget_gpu_hours << ',' << r.n_episodes << ',' << m.mu_acc << ',' << m.coverage << ','
                << m.mean_width << '\n';
        }
    }
}

std::string recommendation_to_json(const Recommendation& rec, const GridResult& grid, int indent) {
    json doc;
    doc["artifact_version"] = FEWSHOT_VERSION;
    doc["found"] = rec.found;
    if (rec.found) {
        doc["budget_gpu_hours"] = rec.budget_gpu_hours;
        doc["n_episodes"] = rec.n_episodes;
        doc["mean_test_size"] = rec.mean_test_size;
        doc["mean_ci_width"] = rec.mean_ci_width;
    }
    doc["diagnostics"] = rec.diagnostics;
    json optima = json::array();
    for (const auto& o : rec.optima) {
        optima.push_back({{"budget_gpu_hours", o.budget_gpu_hours},
                          {"n_episodes", o.n_episodes},
                          {"mean_test_size", o.mean_test_size},
                          {"mean_ci_width", o.mean_ci_width},
                          {"coverage_probability", o.coverage_probability},
                          {"viable", o.viable}});
    }
    doc["optima"] = optima;
    json reductions = json::array();
    for (const auto& r : rec.reductions) {
        reductions.push_back({{"from_budget", r.from_budget},
                              {"to_budget", r.to_budget},
                              {"reduction", r.reduction},
                              {"reduction_vs_previous", r.reduction_vs_previous}});
    }
    doc["reductions"] = reductions;
    json skipped = json::array();
    for (const auto& s : grid.skipped) {
        skipped.push_back({{"budget_gpu_hours", s.budget_gpu_hours}, {"n_episodes", s.n_episodes}, {"reason", s.reason}});
    }
    doc["skipped"] = skipped;
    return doc.dump(indent);
}

void parse_design_config(const std::string& json_text, SimConfig& config, CostModel& cost) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed design config: ") + e.what());
    }
    try {
        if (doc.contains("cost_model")) {
            const auto& c = doc["cost_model"];
            cost.c_few_episode = c.value("c_few_episode", cost.c_few_episode);
            cost.c_zero_episode = c.value("c_zero_episode", cost.c_zero_episode);
            cost.c_few_instance = c.value("c_few_instance", cost.c_few_instance);
            cost.c_zero_instance = c.value("c_zero_instance", cost.c_zero_instance);
            cost.n_datasets = c.value("n_datasets", cost.n_datasets);
        }
        if (doc.contains("sim_config")) {
            const auto& s = doc["sim_config"];
            config.budgets_gpu_hours = s.value("budgets_gpu_hours", config.budgets_gpu_hours);
            config.episode_grid = s.value("episode_grid", config.episode_grid);
            config.sigma_acc = s.value("sigma_acc", config.sigma_acc);
            config.mu_acc_grid = s.value("mu_acc_grid", config.mu_acc_grid);
            config.runs_per_config = s.value("runs_per_config", config.runs_per_config);
            config.seed = s.value("seed", config.seed);
            if (s.contains("stats")) {
                const auto& st = s["stats"];
                config.stats.confidence_level = st.value("confidence_level", config.stats.confidence_level);
                config.stats.bootstrap_resamples = st.value("bootstrap_resamples", config.stats.bootstrap_resamples);
                config.stats.z_critical = st.value("z_critical", config.stats.z_critical);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("design config field error: ") + e.what());
    }
    config.validate();
    cost.validate();
}

}  // namespace fewshot
