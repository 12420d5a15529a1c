#pragma once

#include "fewshot/error.hpp"
#include "fewshot/rng.hpp"
#include "fewshot/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fewshot {

/// Compute-cost model in GPU-seconds. Per-episode costs cover setup and
/// training, per-instance costs cover predicting one test example. The
/// budget is for the whole benchmark and is split evenly over n_datasets.
struct CostModel {
    double c_few_episode = 96.0;
    double c_zero_episode = 2.0;
    double c_few_instance = 0.09;
    double c_zero_instance = 0.04;
    std::uint32_t n_datasets = 12;

    void validate() const;
    double per_episode() const { return c_few_episode + c_zero_episode; }
    double per_instance() const { return c_few_instance + c_zero_instance; }
};

struct SimConfig {
    std::vector<double> budgets_gpu_hours{24, 36, 48, 60, 72, 84};
    std::vector<std::uint32_t> episode_grid{5, 15, 30, 45, 60, 75, 90, 105, 120, 135, 150};
    double sigma_acc = 0.05;
    std::vector<double> mu_acc_grid{0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60,
                                    0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    std::uint32_t runs_per_config = 1000;
    /// CI settings used inside each simulated run.
    StatsConfig stats{0.95, 1000, 0, 1.96};
    std::uint64_t seed = 0;

    void validate() const;
};

/// Thrown when a budget cannot even cover the per-episode overhead.
class InfeasibleBudget : public Error {
public:
    InfeasibleBudget(const std::string& message, double minimum_budget_gpu_hours)
        : Error("infeasible_budget", message), minimum_budget_gpu_hours_(minimum_budget_gpu_hours) {}
    double minimum_budget_gpu_hours() const { return minimum_budget_gpu_hours_; }

private:
    double minimum_budget_gpu_hours_;
};

/// Smallest budget (GPU-hours) that pays the per-episode overhead alone.
double minimum_budget_gpu_hours(std::uint32_t n_episodes, const CostModel& cost);

/// Average test-set size affordable per episode:
/// (budget_s / (n_datasets * n_episodes) - per_episode) / per_instance.
double solve_mean_test_size(double budget_gpu_hours, std::uint32_t n_episodes, const CostModel& cost);

/// Total benchmark cost in GPU-seconds for a configuration (inverse of the above).
double benchmark_cost_seconds(std::uint32_t n_episodes, double mean_test_size, const CostModel& cost);

/// Expected value of a Normal(mu, sigma^2) draw clamped to [0, 1]; the true
/// accuracy of the simulated model.
double clamped_normal_mean(double mu, double sigma);

struct RunOutcome {
    bool covered = false;
    double ci_width = 0.0;
};

/// One simulated benchmark submission: latent per-episode accuracies,
/// floor(mean_test_size) Bernoulli outcomes per episode, percentile
/// bootstrap CI over episode accuracies.
RunOutcome simulate_run(Stream& rng, std::uint32_t n_episodes, double mean_test_size, double mu_acc,
                        double sigma_acc, const StatsConfig& stats);

struct MuSummary {
    double mu_acc = 0.0;
    double coverage = 0.0;
    double mean_width = 0.0;
};

struct SimResultRow {
    double budget_gpu_hours = 0.0;
    std::uint32_t n_episodes = 0;
    double mean_test_size = 0.0;
    std::uint64_t test_size_used = 0;
    double coverage_probability = 0.0;
    double mean_ci_width = 0.0;
    double width_p10 = 0.0;
    double width_p90 = 0.0;
    double coverage_p10 = 0.0;
    double coverage_p90 = 0.0;
    std::vector<MuSummary> per_mu;
};

/// Runs runs_per_config simulations for every mu in the grid. Run streams
/// are keyed by (budget, n_episodes, mu, run), so a row does not depend on
/// what else is in the grid or on `threads`.
SimResultRow simulate_config(const SimConfig& config, const CostModel& cost, double budget_gpu_hours,
                             std::uint32_t n_episodes, unsigned threads = 1);

struct SkippedConfig {
    double budget_gpu_hours = 0.0;
    std::uint32_t n_episodes = 0;
    std::string reason;
};

struct GridResult {
    std::vector<SimResultRow> rows;  // ordered by (budget, n_episodes)
    std::vector<SkippedConfig> skipped;
};

GridResult grid_search(const SimConfig& config, const CostModel& cost, unsigned threads = 1);

struct BudgetOptimum {
    double budget_gpu_hours = 0.0;
    std::uint32_t n_episodes = 0;
    double mean_test_size = 0.0;
    double mean_ci_width = 0.0;
    double coverage_probability = 0.0;
    /// Optimum has more than min_viable_episodes episodes.
    bool viable = true;
};

struct WidthReduction {
    double from_budget = 0.0;
    double to_budget = 0.0;
    /// (w_from - w_to) / w_baseline, w_baseline being the width at the
    /// smallest viable budget. This is the schedule the
    /// recommendation uses.
    double reduction = 0.0;
    /// (w_from - w_to) / w_from, for inspection.
    double reduction_vs_previous = 0.0;
};

struct Recommendation {
    bool found = false;
    double budget_gpu_hours = 0.0;
    std::uint32_t n_episodes = 0;
    double mean_test_size = 0.0;
    double mean_ci_width = 0.0;
    std::vector<BudgetOptimum> optima;
    std::vector<WidthReduction> reductions;
    std::string diagnostics;
};

/// Keeps rows whose coverage is within `coverage_tolerance` of
/// `confidence_level` and takes the minimum-width row per budget. A budget
/// is viable when that optimum uses more than `min_viable_episodes`
/// episodes (fewer episodes cover poorly across the mu grid). Recommends
/// the smallest viable budget whose next step reduces width by less than
/// `marginal_threshold`.
Recommendation select_configuration(const std::vector<SimResultRow>& rows, double coverage_tolerance = 0.01,
                                    double marginal_threshold = 0.10, double confidence_level = 0.95,
                                    std::uint32_t min_viable_episodes = 60);

void write_grid_csv(std::ostream& out, const GridResult& grid);
void write_per_mu_csv(std::ostream& out, const GridResult& grid);
std::string recommendation_to_json(const Recommendation& rec, const GridResult& grid, int indent = 2);

/// Reads {"cost_model": {...}, "sim_config": {...}}; absent fields keep defaults.
void parse_design_config(const std::string& json_text, SimConfig& config, CostModel& cost);

}  // namespace fewshot
