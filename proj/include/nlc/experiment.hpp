#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlc/manifold.hpp"
#include "nlc/sampler.hpp"

namespace nlc {

// Relative distance estimation bias per step with sigma > 0:
// (dist_K(x_t) - sqrt(n) sigma_hat_t) / (sqrt(n) sigma_t). The sentinel entry
// has no defined bias and is omitted.
std::vector<double> bias_series(const Trajectory& trajectory, const ManifoldSpec& spec);

struct InitialDistanceStats {
    double sigma_T = 0.0;
    size_t num_samples = 0;
    double mean_dist_sq = 0.0;
    double threshold = 0.0;  // n * sigma_T²
    bool exceeds_threshold = false;
};

// Empirical mean of dist²(x_T) for x_T = sqrt(sigma_T² + 1) z, z ~ N(0, I),
// against the n sigma_T² lower bound.
InitialDistanceStats initial_distance_check(const ManifoldSpec& spec, double sigma_T,
                                            size_t num_samples, Rng& rng);

struct SeriesStat {
    std::vector<double> mean;
    std::vector<double> stdev;

    bool empty() const { return mean.empty(); }
};

// Aggregate view of one sampling method over many seeds.
struct RunReport {
    std::string method;
    nlohmann::json config;
    size_t trajectory_len = 0;  // steps + 1
    SeriesStat dist;            // per trajectory entry
    SeriesStat sigma_hat;
    SeriesStat bias;            // per entry with sigma > 0
    // Constrained runs only: |A x_t - y| of the running states (the projected
    // estimates are feasible to machine precision by construction, so the
    // state violation is the series that distinguishes methods).
    SeriesStat consistency;
    double final_dist_mean = 0.0;
    double final_dist_std = 0.0;
    double final_consistency_mean = 0.0;  // NaN on unconstrained runs
    double final_consistency_std = 0.0;
    std::vector<uint64_t> seeds;
};

using TrajectoryFactory = std::function<Trajectory(size_t seed_index, Rng& rng)>;

// Runs the factory once per seed (seed i uses Rng(base_seed).fork(i)),
// annotates with the oracle and reduces per-step statistics in seed order.
RunReport aggregate_runs(const std::string& method, nlohmann::json config,
                         const ManifoldSpec& spec, const TrajectoryFactory& factory,
                         size_t num_seeds, uint64_t base_seed, uint32_t jobs,
                         bool constrained = false);

struct ComparisonRow {
    std::string metric;
    std::vector<double> values;            // one per report
    size_t winner = 0;                     // index of the smallest value
    std::vector<double> improvement_pct;   // relative to the first report
};

struct ComparisonTable {
    std::vector<std::string> methods;
    std::vector<ComparisonRow> rows;
};

// Side-by-side means with winner flags; requires >= 2 reports with matching
// trajectory lengths.
ComparisonTable compare(const std::vector<RunReport>& reports);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
void save_report(const RunReport& report, const std::string& path);
RunReport load_report(const std::string& path);

nlohmann::json comparison_to_json(const ComparisonTable& table);
void save_comparison(const ComparisonTable& table, const std::string& path);

// Long-format CSV: method,step,metric,mean,std
void write_plot_csv(const std::vector<RunReport>& reports, const std::string& path);

}  // namespace nlc
