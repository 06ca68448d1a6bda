#include "nlc/experiment.hpp"

#include <cmath>
#include <limits>

#include "nlc/io.hpp"
#include "nlc/threadpool.hpp"

namespace nlc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// columns of per-seed series -> mean/std per step, reduced in seed order
SeriesStat reduce_series(const std::vector<std::vector<double>>& per_seed) {
    SeriesStat stat;
    if (per_seed.empty() || per_seed.front().empty()) {
        return stat;
    }
    const size_t len = per_seed.front().size();
    const double count = double(per_seed.size());
    stat.mean.assign(len, 0.0);
    stat.stdev.assign(len, 0.0);
    for (const auto& series : per_seed) {
        require(series.size() == len, ErrorKind::shape_mismatch, "aggregate: ragged series");
        for (size_t i = 0; i < len; ++i) {
            stat.mean[i] += series[i];
        }
    }
    for (size_t i = 0; i < len; ++i) {
        stat.mean[i] /= count;
    }
    for (const auto& series : per_seed) {
        for (size_t i = 0; i < len; ++i) {
            const double d = series[i] - stat.mean[i];
            stat.stdev[i] += d * d;
        }
    }
    for (size_t i = 0; i < len; ++i) {
        stat.stdev[i] = std::sqrt(stat.stdev[i] / count);
    }
    return stat;
}

nlohmann::json series_to_json(const SeriesStat& stat) {
    return {{"mean", stat.mean}, {"std", stat.stdev}};
}

SeriesStat series_from_json(const nlohmann::json& j) {
    SeriesStat stat;
    stat.mean = j.at("mean").get<std::vector<double>>();
    stat.stdev = j.at("std").get<std::vector<double>>();
    return stat;
}

}  // namespace

std::vector<double> bias_series(const Trajectory& trajectory, const ManifoldSpec& spec) {
    const double sqrt_n = std::sqrt(double(spec.n));
    std::vector<double> out;
    out.reserve(trajectory.steps.size());
    for (const auto& step : trajectory.steps) {
        if (step.sigma > 0.0) {
            const double dist = exact_distance(spec, step.x);
            out.push_back((dist - sqrt_n * step.sigma_hat) / (sqrt_n * step.sigma));
        }
    }
    return out;
}

InitialDistanceStats initial_distance_check(const ManifoldSpec& spec, double sigma_T,
                                            size_t num_samples, Rng& rng) {
    require(sigma_T > 0.0, ErrorKind::invalid_range, "initial_distance_check: sigma_T <= 0");
    require(num_samples >= 100, ErrorKind::invalid_range,
            "initial_distance_check: need at least 100 samples");
    InitialDistanceStats stats;
    stats.sigma_T = sigma_T;
    stats.num_samples = num_samples;
    const double scale = std::sqrt(sigma_T * sigma_T + 1.0);
    double acc = 0.0;
    for (size_t i = 0; i < num_samples; ++i) {
        Vec64 x = gaussian_vec(rng, spec.n);
        for (auto& v : x) {
            v *= scale;
        }
        const double dist = exact_distance(spec, x);
        acc += dist * dist;
    }
    stats.mean_dist_sq = acc / double(num_samples);
    stats.threshold = double(spec.n) * sigma_T * sigma_T;
    stats.exceeds_threshold = stats.mean_dist_sq > stats.threshold;
    return stats;
}

RunReport aggregate_runs(const std::string& method, nlohmann::json config,
                         const ManifoldSpec& spec, const TrajectoryFactory& factory,
                         size_t num_seeds, uint64_t base_seed, uint32_t jobs, bool constrained) {
    require(num_seeds >= 2, ErrorKind::invalid_range, "aggregate_runs: need >= 2 seeds");

    struct SeedResult {
        std::vector<double> dist, sigma_hat, bias, consistency;
    };
    std::vector<SeedResult> results(num_seeds);
    const Rng parent(base_seed);
    ThreadPool pool(jobs);
    pool.run_chunks(num_seeds, [&](size_t i) {
        Rng rng = parent.fork(i);
        Trajectory traj = factory(i, rng);
        annotate_with_oracle(traj, spec);
        SeedResult& res = results[i];
        for (const auto& step : traj.steps) {
            res.dist.push_back(step.dist);
            res.sigma_hat.push_back(step.sigma_hat);
            if (step.sigma > 0.0) {
                res.bias.push_back(step.bias);
            }
            if (constrained) {
                res.consistency.push_back(step.state_violation);
            }
        }
    });

    RunReport report;
    report.method = method;
    report.config = std::move(config);
    report.trajectory_len = results.front().dist.size();
    report.seeds.reserve(num_seeds);
    for (size_t i = 0; i < num_seeds; ++i) {
        report.seeds.push_back(parent.fork(i).seed());
    }
    std::vector<std::vector<double>> dist, sigma_hat, bias, consistency;
    for (auto& res : results) {
        dist.push_back(std::move(res.dist));
        sigma_hat.push_back(std::move(res.sigma_hat));
        bias.push_back(std::move(res.bias));
        if (constrained) {
            consistency.push_back(std::move(res.consistency));
        }
    }
    report.dist = reduce_series(dist);
    report.sigma_hat = reduce_series(sigma_hat);
    report.bias = reduce_series(bias);
    report.final_dist_mean = report.dist.mean.back();
    report.final_dist_std = report.dist.stdev.back();
    if (constrained) {
        report.consistency = reduce_series(consistency);
        report.final_consistency_mean = report.consistency.mean.back();
        report.final_consistency_std = report.consistency.stdev.back();
    } else {
        report.final_consistency_mean = kNaN;
        report.final_consistency_std = kNaN;
    }
    return report;
}

ComparisonTable compare(const std::vector<RunReport>& reports) {
    require(reports.size() >= 2, ErrorKind::shape_mismatch, "compare: need >= 2 reports");
    const size_t len = reports.front().trajectory_len;
    for (const auto& r : reports) {
        require(r.trajectory_len == len, ErrorKind::shape_mismatch,
                "compare: step counts differ");
    }

    ComparisonTable table;
    for (const auto& r : reports) {
        table.methods.push_back(r.method);
    }
    auto add_row = [&](const std::string& metric, const std::function<double(const RunReport&)>& get) {
        ComparisonRow row;
        row.metric = metric;
        for (const auto& r : reports) {
            row.values.push_back(get(r));
        }
        for (double v : row.values) {
            if (std::isnan(v)) {
                return;  // metric not present for every report
            }
        }
        row.winner = 0;
        for (size_t i = 1; i < row.values.size(); ++i) {
            if (row.values[i] < row.values[row.winner]) {
                row.winner = i;
            }
        }
        const double base = row.values.front();
        for (double v : row.values) {
            row.improvement_pct.push_back(base != 0.0 ? 100.0 * (base - v) / base : 0.0);
        }
        table.rows.push_back(std::move(row));
    };

    add_row("final_dist_mean", [](const RunReport& r) { return r.final_dist_mean; });
    add_row("mean_abs_bias_last3", [](const RunReport& r) {
        if (r.bias.mean.size() < 3) {
            return kNaN;
        }
        double acc = 0.0;
        for (size_t i = r.bias.mean.size() - 3; i < r.bias.mean.size(); ++i) {
            acc += std::fabs(r.bias.mean[i]);
        }
        return acc / 3.0;
    });
    add_row("final_consistency_mean",
            [](const RunReport& r) { return r.final_consistency_mean; });
    add_row("mean_consistency", [](const RunReport& r) {
        if (r.consistency.empty()) {
            return kNaN;
        }
        double acc = 0.0;
        for (double v : r.consistency.mean) {
            acc += v;
        }
        return acc / double(r.consistency.mean.size());
    });
    return table;
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j = {
        {"method", report.method},
        {"config", report.config},
        {"trajectory_len", report.trajectory_len},
        {"dist", series_to_json(report.dist)},
        {"sigma_hat", series_to_json(report.sigma_hat)},
        {"bias", series_to_json(report.bias)},
        {"final_dist_mean", report.final_dist_mean},
        {"final_dist_std", report.final_dist_std},
        {"seeds", report.seeds},
    };
    if (!report.consistency.empty()) {
        j["consistency"] = series_to_json(report.consistency);
        j["final_consistency_mean"] = report.final_consistency_mean;
        j["final_consistency_std"] = report.final_consistency_std;
    }
    return j;
}

RunReport report_from_json(const nlohmann::json& j) {
    RunReport report;
    report.method = j.at("method").get<std::string>();
    report.config = j.value("config", nlohmann::json::object());
    report.trajectory_len = j.at("trajectory_len").get<size_t>();
    report.dist = series_from_json(j.at("dist"));
    report.sigma_hat = series_from_json(j.at("sigma_hat"));
    report.bias = series_from_json(j.at("bias"));
    report.final_dist_mean = j.at("final_dist_mean").get<double>();
    report.final_dist_std = j.at("final_dist_std").get<double>();
    report.seeds = j.value("seeds", std::vector<uint64_t>{});
    if (j.contains("consistency")) {
        report.consistency = series_from_json(j.at("consistency"));
        report.final_consistency_mean = j.at("final_consistency_mean").get<double>();
        report.final_consistency_std = j.at("final_consistency_std").get<double>();
    } else {
        report.final_consistency_mean = kNaN;
        report.final_consistency_std = kNaN;
    }
    return report;
}

void save_report(const RunReport& report, const std::string& path) {
    write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

RunReport load_report(const std::string& path) {
    try {
        return report_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::corrupt_payload, "report: invalid json in " + path);
    }
}

nlohmann::json comparison_to_json(const ComparisonTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        rows.push_back({
            {"metric", row.metric},
            {"values", row.values},
            {"winner", table.methods[row.winner]},
            {"improvement_pct_vs_first", row.improvement_pct},
        });
    }
    return {{"methods", table.methods}, {"rows", rows}};
}

void save_comparison(const ComparisonTable& table, const std::string& path) {
    write_file_atomic(path, comparison_to_json(table).dump(2) + "\n");
}

void write_plot_csv(const std::vector<RunReport>& reports, const std::string& path) {
    std::string csv = "method,step,metric,mean,std\n";
    auto emit = [&](const RunReport& r, const std::string& metric, const SeriesStat& stat) {
        for (size_t i = 0; i < stat.mean.size(); ++i) {
            csv += r.method + "," + std::to_string(i) + "," + metric + "," +
                   format_double(stat.mean[i]) + "," + format_double(stat.stdev[i]) + "\n";
        }
    };
    for (const auto& r : reports) {
        emit(r, "dist", r.dist);
        emit(r, "sigma_hat", r.sigma_hat);
        emit(r, "bias", r.bias);
        if (!r.consistency.empty()) {
            emit(r, "consistency", r.consistency);
        }
    }
    write_file_atomic(path, csv);
}

}  // namespace nlc
