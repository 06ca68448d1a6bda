#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlc/manifold.hpp"
#include "nlc/net.hpp"
#include "nlc/schedule.hpp"

namespace nlc {

// Source of noise-level-correction residuals at sampling time: none, a
// trained corrector network, or a lookup table keyed on the scheduled sigma.
struct NlcSource {
    enum class Mode { off, network, lut };

    Mode mode = Mode::off;
    CorrectorFn corrector;
    const LookupTable* table = nullptr;

    static NlcSource off() { return {}; }
    static NlcSource network(CorrectorFn fn);
    static NlcSource lut(const LookupTable* table);

    // Residual actually used: 0, clamp(r_theta(x, sigma)), or the table mean.
    double residual(const Vec64& x, double sigma) const;
};

// sigma_hat = sigma * (1 + r); exactly sigma when correction is off.
double corrected_sigma(const NlcSource& nlc, const Vec64& x, double sigma);

enum class SamplerAlgo { ddim, ddpm, edm_euler, edm_heun, dpm2 };

struct SamplerConfig {
    SamplerAlgo algo = SamplerAlgo::ddim;
    double eta = 0.0;  // 0 = deterministic DDIM branch, 1 = DDPM branch
    bool normalize_direction = true;
    uint64_t seed = 0;
};

struct TrajectoryStep {
    double sigma = 0.0;      // scheduled level (0 on the final entry)
    double sigma_hat = 0.0;  // corrected level used at this state
    double r = 0.0;
    double dir_norm = 0.0;   // raw |eps_theta| before any normalization
    double dist = 0.0;       // oracle distance, filled by annotate_with_oracle
    double bias = 0.0;       // (dist - sqrt(n) sigma_hat) / (sqrt(n) sigma)
    double beta = 0.0;       // 1 - sigma_next / sigma (gradient-descent step size view)
    double consistency = 0.0;      // |A x_0|t - y| of the projected estimate
    double state_violation = 0.0;  // |A x_t - y| of the recorded state
    double delta_x = 0.0;          // |x_0|k - x_0|k-1| on iterative restoration
    Vec64 x;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;  // length = sampling steps + 1

    const Vec64& final_sample() const { return steps.back().x; }
};

// Direction estimate: raw denoiser output, or sqrt(n) * eps / |eps| when
// normalized (throws ZeroDirection if |eps| underflows 1e-12).
Vec64 direction(const DenoiserFn& denoiser, const Vec64& x, double sigma_hat, bool normalize,
                double* raw_norm = nullptr);

// x - sigma_hat * dir
Vec64 one_step_estimate(const Vec64& x, double sigma_hat, const Vec64& dir);

// DDIM/DDPM family with optional correction. Starts from
// x_T = sqrt(sigma_T² + 1) z and per step applies the corrected level,
// ratio-preserved next level, optional direction normalization, and the
// eta-weighted noise/signal split; the final (sentinel) step returns the
// one-step estimate.
Trajectory sample_ddim_ddpm(const DenoiserFn& denoiser, const NlcSource& nlc,
                            const NoiseSchedule& schedule, const SamplerConfig& config,
                            uint32_t dim, Rng& rng);

// EDM family (Euler or Heun), x_T = sigma_T * eps, never normalizes the
// direction. Heun averages the slopes at both ends of each step except the
// final one.
Trajectory sample_edm(const DenoiserFn& denoiser, const NlcSource& nlc,
                      const NoiseSchedule& schedule, bool heun, uint32_t dim, Rng& rng);

// Second-order log-SNR midpoint solver. The midpoint sits halfway between the
// current and next lambda; its corrected level is ratio-preserved from
// sigma_hat_t. The final step returns the one-step estimate.
Trajectory sample_dpm(const DenoiserFn& denoiser, const NlcSource& nlc,
                      const DpmSchedule& schedule, uint32_t dim, Rng& rng);

// Dispatch on config.algo; rejects normalize_direction for the edm/dpm
// family.
Trajectory run_sampler(const DenoiserFn& denoiser, const NlcSource& nlc,
                       const NoiseSchedule& schedule, const SamplerConfig& config, uint32_t dim,
                       Rng& rng);

// Fills dist and bias columns from the exact oracle.
void annotate_with_oracle(Trajectory& trajectory, const ManifoldSpec& spec);

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace nlc
