#include "nlc/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nlc/io.hpp"

namespace nlc {

namespace {

void finalize(NoiseSchedule& schedule) {
    require(!schedule.sigmas.empty(), ErrorKind::schedule_exhausted, "schedule: no levels");
    for (size_t i = 0; i < schedule.sigmas.size(); ++i) {
        require(schedule.sigmas[i] > 0.0, ErrorKind::invalid_range, "schedule: sigma <= 0");
        if (i > 0) {
            require(schedule.sigmas[i] < schedule.sigmas[i - 1], ErrorKind::invalid_range,
                    "schedule: sigmas not strictly decreasing");
        }
    }
    schedule.alphas.resize(schedule.sigmas.size());
    for (size_t i = 0; i < schedule.sigmas.size(); ++i) {
        schedule.alphas[i] = 1.0 / (1.0 + schedule.sigmas[i] * schedule.sigmas[i]);
    }
}

}  // namespace

NoiseSchedule make_custom_schedule(std::vector<double> sigmas_descending) {
    NoiseSchedule schedule;
    schedule.sigmas = std::move(sigmas_descending);
    schedule.family = "custom";
    finalize(schedule);
    return schedule;
}

NoiseSchedule build_ddpm_schedule(int T, double beta_min, double beta_max) {
    require(T >= 2, ErrorKind::invalid_range, "ddpm schedule: T must be >= 2");
    require(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0, ErrorKind::invalid_range,
            "ddpm schedule: need 0 < beta_min <= beta_max < 1");
    NoiseSchedule schedule;
    schedule.family = "ddpm-linear";
    schedule.sigmas.resize(T);
    double alpha_bar = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double beta = beta_min + (beta_max - beta_min) * (t - 1) / double(T - 1);
        alpha_bar *= 1.0 - beta;
        // stored largest-first: position 0 holds sigma_T
        schedule.sigmas[T - t] = std::sqrt((1.0 - alpha_bar) / alpha_bar);
    }
    finalize(schedule);
    return schedule;
}

NoiseSchedule subsample(const NoiseSchedule& schedule, int steps) {
    const int T = static_cast<int>(schedule.steps());
    require(steps >= 2 && steps <= T, ErrorKind::invalid_range,
            "subsample: need 2 <= steps <= T");
    NoiseSchedule out;
    out.family = schedule.family;
    out.sigmas.reserve(steps);
    for (int j = 0; j < steps; ++j) {
        const size_t idx = static_cast<size_t>(
            std::llround(double(j) * double(T - 1) / double(steps - 1)));
        out.sigmas.push_back(schedule.sigmas[idx]);
    }
    finalize(out);
    return out;
}

NoiseSchedule build_edm_schedule(int steps, double sigma_min, double sigma_max, double rho) {
    require(steps >= 2, ErrorKind::invalid_range, "edm schedule: steps must be >= 2");
    require(sigma_min > 0.0 && sigma_min < sigma_max, ErrorKind::invalid_range,
            "edm schedule: need 0 < sigma_min < sigma_max");
    require(rho >= 1.0, ErrorKind::invalid_range, "edm schedule: rho must be >= 1");
    NoiseSchedule schedule;
    schedule.family = "edm-rho";
    schedule.sigmas.resize(steps);
    const double inv_max = std::pow(sigma_max, 1.0 / rho);
    const double inv_min = std::pow(sigma_min, 1.0 / rho);
    for (int i = 0; i < steps; ++i) {
        const double frac = double(i) / double(steps - 1);
        schedule.sigmas[i] = std::pow(inv_max + frac * (inv_min - inv_max), rho);
    }
    // pin the endpoints exactly
    schedule.sigmas.front() = sigma_max;
    schedule.sigmas.back() = sigma_min;
    finalize(schedule);
    return schedule;
}

double DpmSchedule::time_of_lambda(double lam) const {
    const size_t n = lambdas.size();
    if (lam <= lambdas.front()) {
        return 0.0;
    }
    if (lam >= lambdas.back()) {
        return double(n - 1);
    }
    size_t i = 0;
    while (i + 1 < n && lambdas[i + 1] < lam) {
        ++i;
    }
    return double(i) + (lam - lambdas[i]) / (lambdas[i + 1] - lambdas[i]);
}

double DpmSchedule::sigma_of_lambda(double lam) const {
    return std::exp(-lam);
}

DpmSchedule build_dpm_schedule(const NoiseSchedule& base) {
    require(base.steps() >= 2, ErrorKind::invalid_range, "dpm schedule: need >= 2 levels");
    DpmSchedule out;
    out.base = base;
    out.lambdas.resize(base.steps());
    for (size_t i = 0; i < base.steps(); ++i) {
        out.lambdas[i] = -std::log(base.sigma(i));
    }
    return out;
}

double LookupTable::center(size_t bin) const {
    return std::sqrt(edges[bin] * edges[bin + 1]);
}

double LookupTable::query(double sigma) const {
    require(sigma > 0.0, ErrorKind::invalid_range, "lut query: sigma <= 0");
    const double ls = std::log(sigma);
    double prev_center = 0.0;
    double prev_mean = 0.0;
    bool have_prev = false;
    for (size_t b = 0; b < bins(); ++b) {
        if (counts[b] == 0) {
            continue;
        }
        const double c = std::log(center(b));
        if (ls <= c) {
            if (!have_prev) {
                return mean_r[b];  // clamp below the populated range
            }
            const double w = (ls - prev_center) / (c - prev_center);
            return prev_mean + w * (mean_r[b] - prev_mean);
        }
        prev_center = c;
        prev_mean = mean_r[b];
        have_prev = true;
    }
    require(have_prev, ErrorKind::empty_records, "lut query: table has no populated bins");
    return prev_mean;  // clamp above the populated range
}

LookupTable build_lookup_table(const std::vector<std::pair<double, double>>& records,
                               int num_bins) {
    require(!records.empty(), ErrorKind::empty_records, "lookup table: no records");
    require(num_bins >= 1, ErrorKind::invalid_range, "lookup table: num_bins must be >= 1");
    double lo = records.front().first;
    double hi = lo;
    for (const auto& [sigma, r] : records) {
        require(sigma > 0.0, ErrorKind::invalid_range, "lookup table: sigma <= 0");
        lo = std::min(lo, sigma);
        hi = std::max(hi, sigma);
    }
    if (lo == hi) {
        lo *= 1.0 - 1e-9;
        hi *= 1.0 + 1e-9;
    }
    LookupTable table;
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    table.edges.resize(num_bins + 1);
    for (int b = 0; b <= num_bins; ++b) {
        table.edges[b] = std::exp(log_lo + (log_hi - log_lo) * double(b) / double(num_bins));
    }
    table.edges.front() = lo;
    table.edges.back() = hi;
    table.mean_r.assign(num_bins, 0.0);
    table.std_r.assign(num_bins, 0.0);
    table.counts.assign(num_bins, 0);
    std::vector<double> sum(num_bins, 0.0);
    std::vector<double> sum_sq(num_bins, 0.0);
    const double width = (log_hi - log_lo) / num_bins;
    for (const auto& [sigma, r] : records) {
        auto b = static_cast<long>((std::log(sigma) - log_lo) / width);
        b = std::clamp(b, 0L, long(num_bins - 1));
        sum[b] += r;
        sum_sq[b] += r * r;
        table.counts[b] += 1;
    }
    for (int b = 0; b < num_bins; ++b) {
        if (table.counts[b] > 0) {
            const double c = double(table.counts[b]);
            table.mean_r[b] = sum[b] / c;
            table.std_r[b] = std::sqrt(std::max(0.0, sum_sq[b] / c - table.mean_r[b] * table.mean_r[b]));
        }
    }
    return table;
}

void save_lookup_table(const LookupTable& table, const std::string& path) {
    nlohmann::json j = {
        {"bins", table.bins()},
        {"edges", table.edges},
        {"mean_r", table.mean_r},
        {"std_r", table.std_r},
        {"counts", table.counts},
    };
    write_file_atomic(path, j.dump(2) + "\n");
}

LookupTable load_lookup_table(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error&) {
        fail(ErrorKind::corrupt_payload, "lookup table: invalid json in " + path);
    }
    LookupTable table;
    table.edges = j.at("edges").get<std::vector<double>>();
    table.mean_r = j.at("mean_r").get<std::vector<double>>();
    table.std_r = j.at("std_r").get<std::vector<double>>();
    table.counts = j.at("counts").get<std::vector<uint64_t>>();
    require(table.edges.size() == table.mean_r.size() + 1 &&
                table.mean_r.size() == table.std_r.size() &&
                table.std_r.size() == table.counts.size(),
            ErrorKind::corrupt_payload, "lookup table: inconsistent field lengths");
    return table;
}

}  // namespace nlc
