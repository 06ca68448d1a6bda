#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlc/manifold.hpp"
#include "nlc/net.hpp"
#include "nlc/schedule.hpp"
#include "nlc/threadpool.hpp"

namespace nlc {

struct TrainConfig {
    uint32_t batch_size = 128;
    uint64_t iterations = 50000;
    double lr = 3e-4;
    double delta = 0.5;  // corrector lambda-perturbation half-width
    uint64_t seed = 1;
    uint32_t report_interval = 100;
    uint32_t jobs = 0;          // 0 -> hardware concurrency
    uint32_t num_layers = 0;    // weight layers; 0 -> role default (denoiser 5, corrector 2)
    uint32_t hidden_dim = 128;
};

struct TrainReport {
    std::vector<uint64_t> iters;
    std::vector<double> losses;
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    uint64_t seed = 0;
    std::string checkpoint_path;
};

// Layer widths for a toy net: input n+1 (sample + log-sigma feature),
// `layers` weight layers of `hidden` units, output n (denoiser) or 1.
std::vector<uint32_t> mlp_dims(NetRole role, uint32_t n, uint32_t layers, uint32_t hidden);

// Denoising objective: mean over the batch of |net(x0 + sigma_t eps) - eps|²
// with t uniform over schedule indices and eps standard normal. Exact
// gradients for the drawn batch when grads != nullptr.
double denoiser_loss_and_grads(const MlpNet& net, const std::vector<const Vec64*>& batch,
                               const NoiseSchedule& schedule, Rng& rng, Grads* grads,
                               ThreadPool* pool = nullptr);

// Noise-level-correction objective: with lambda ~ U(1-delta, 1+delta) and
// x_hat = x0 + sigma_t * lambda * eps, the residual is
// sqrt(n) * sigma_t * (1 + r(x_hat, sigma_t)) - sigma_t * lambda * |eps|,
// squared and averaged over the batch.
double nlc_loss_and_grads(const MlpNet& net, const std::vector<const Vec64*>& batch,
                          const NoiseSchedule& schedule, double delta, Rng& rng, Grads* grads,
                          ThreadPool* pool = nullptr);

struct TrainResult {
    MlpNet net;
    AdamState adam;
    TrainReport report;
};

// Full training run: Adam on the role's objective, batches drawn with
// replacement, fully determined by config.seed.
TrainResult train(NetRole role, const Dataset& dataset, const NoiseSchedule& schedule,
                  const TrainConfig& config);

// Wall time goes to the log only, keeping report files byte-stable per seed.
void save_train_report(const TrainReport& report, const std::string& path);
void save_loss_csv(const TrainReport& report, const std::string& path);

}  // namespace nlc
