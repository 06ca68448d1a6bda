#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nlc/math.hpp"

namespace nlc {

// Discrete noise-level schedule. sigmas holds the positive levels in sampling
// order (largest first); index steps() is the sigma = 0 sentinel every
// sampler finishes on. alphas mirror sigmas via alpha = 1 / (1 + sigma²).
struct NoiseSchedule {
    std::vector<double> sigmas;  // strictly decreasing, all > 0
    std::vector<double> alphas;
    std::string family = "custom";  // ddpm-linear | edm-rho | custom

    size_t steps() const { return sigmas.size(); }
    // i in [0, steps()]; i == steps() is the sentinel
    double sigma(size_t i) const { return i < sigmas.size() ? sigmas[i] : 0.0; }
    double alpha(size_t i) const { return i < alphas.size() ? alphas[i] : 1.0; }
    double sigma_max() const { return sigmas.front(); }
    double sigma_min() const { return sigmas.back(); }
};

NoiseSchedule make_custom_schedule(std::vector<double> sigmas_descending);

// Linear-beta DDPM schedule: cumulative alpha_bar_t = prod(1 - beta_i),
// sigma_t = sqrt((1 - alpha_bar_t) / alpha_bar_t).
NoiseSchedule build_ddpm_schedule(int T, double beta_min, double beta_max);

// Uniform-stride subsequence keeping both endpoints (largest and smallest
// retained sigma).
NoiseSchedule subsample(const NoiseSchedule& schedule, int steps);

// rho-interpolated schedule:
// sigma_i = (smax^(1/rho) + i/(N-1) * (smin^(1/rho) - smax^(1/rho)))^rho.
NoiseSchedule build_edm_schedule(int steps, double sigma_min, double sigma_max, double rho);

// Log-SNR view of a schedule. lambda_t = log(a_vp / s_vp) for the
// variance-preserving coefficients a_vp = 1/sqrt(1+sigma²),
// s_vp = sigma * a_vp, i.e. lambda = -log(sigma); strictly increasing along
// the sampling direction. t_lambda inverts it by piecewise-linear
// interpolation over fractional step indices.
struct DpmSchedule {
    NoiseSchedule base;
    std::vector<double> lambdas;

    double lambda(size_t i) const { return lambdas[i]; }
    double time_of_lambda(double lam) const;
    double sigma_of_lambda(double lam) const;
};

DpmSchedule build_dpm_schedule(const NoiseSchedule& base);

// sigma-binned statistics of noise-level-correction residuals, used as the
// parameter-free corrector. Queries interpolate bin means linearly in
// log(sigma) and clamp outside the populated range.
struct LookupTable {
    std::vector<double> edges;  // num_bins + 1, increasing (log-spaced)
    std::vector<double> mean_r;
    std::vector<double> std_r;
    std::vector<uint64_t> counts;

    size_t bins() const { return counts.size(); }
    double center(size_t bin) const;
    double query(double sigma) const;
};

LookupTable build_lookup_table(const std::vector<std::pair<double, double>>& records,
                               int num_bins);

void save_lookup_table(const LookupTable& table, const std::string& path);
LookupTable load_lookup_table(const std::string& path);

}  // namespace nlc
