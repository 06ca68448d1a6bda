#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlc/sampler.hpp"

namespace nlc {

enum class OperatorKind { random_row, coordinate_mask, custom };

// Linear degradation operator A with its pseudo-inverse, defining the
// constraint set { x : A x = y }.
struct LinearOperator {
    OperatorKind kind = OperatorKind::custom;
    Mat64 a;       // r x n, full row rank
    Mat64 a_pinv;  // n x r
    uint64_t seed = 0;

    size_t rows() const { return a.rows; }
    size_t cols() const { return a.cols; }
};

LinearOperator make_operator(Mat64 a, OperatorKind kind, uint64_t seed);
// Dense standard-normal rows.
LinearOperator make_random_row_operator(uint32_t rows, uint32_t n, Rng& rng);
// Rows of the identity selecting the given coordinates.
LinearOperator make_coordinate_mask_operator(const std::vector<uint32_t>& coords, uint32_t n);

Vec64 apply_operator(const LinearOperator& op, const Vec64& x);

// Projection onto the constraint set: A† y + (I - A† A) x_hat.
Vec64 project_constraint(const LinearOperator& op, const Vec64& y, const Vec64& x_hat);

// Binary Mat64 layout (rows u32, cols u32, f64 LE entries) next to a JSON
// manifest at <path>.json carrying kind, dims and seed.
void save_operator(const LinearOperator& op, const std::string& path);
LinearOperator load_operator(const std::string& path);

// Null-space-projected DDIM/DDPM: each one-step estimate is projected onto
// the constraint before the noise/signal split re-noises it. Trajectory
// steps additionally record the constraint violation of the projected
// estimate.
Trajectory sample_ddnm(const DenoiserFn& denoiser, const NlcSource& nlc,
                       const NoiseSchedule& schedule, const LinearOperator& op, const Vec64& y,
                       const SamplerConfig& config, Rng& rng);

// Alternating projection with geometric noise decay and restart.
struct IterProjConfig {
    double sigma_max = 10.0;
    double sigma_min = 0.01;
    double sigma_restart = 1.0;
    double decay = 0.95;      // per-iteration factor on sigma
    double noise_mix = 0.5;   // weight of fresh noise in the re-noising blend
    uint32_t max_iterations = 200;
    double stop_tol = -1.0;   // < 0 -> 1e-4 * sqrt(n)
    uint64_t seed = 0;
};

struct IterProjResult {
    Vec64 sample;
    Trajectory trajectory;
    bool hit_max_iterations = false;
    size_t best_index = 0;  // iteration whose projected estimate was returned
};

// Loop: manifold step via a normalized one-step estimate, constraint
// projection, geometric decay with restart below sigma_min, re-noising with
// sqrt(1 - eta²) * eps_hat + eta * fresh noise. Stops when consecutive
// projected estimates move less than stop_tol or at max_iterations (a normal
// return carrying the estimate with the smallest corrected level).
IterProjResult iterproj(const DenoiserFn& denoiser, const NlcSource& nlc,
                        const LinearOperator& op, const Vec64& y, const IterProjConfig& config,
                        Rng& rng);

// CSV: iteration,sigma_k,sigma_hat,dist,consistency,delta_x
void write_restoration_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace nlc
