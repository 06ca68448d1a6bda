#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlc/math.hpp"
#include "nlc/rng.hpp"

namespace nlc {

// Union of m rotated d-spheres embedded in R^n: branch k is
// { R_k s : s on the unit sphere of the first d+1 coordinates, zero elsewhere }.
struct ManifoldSpec {
    uint32_t n = 0;  // ambient dimension
    uint32_t d = 0;  // intrinsic sphere dimension, d + 1 <= n
    uint32_t m = 0;  // number of rotated branches
    std::vector<Mat64> rotations;
    double noise_std = 1e-3;  // training-data jitter
};

ManifoldSpec make_manifold_spec(uint32_t n, uint32_t d, uint32_t m, double noise_std, Rng& rng);

// Point on the manifold: s uniform on S^d (normalized (d+1)-dim Gaussian,
// zero-padded), rotated by a uniformly chosen branch.
Vec64 sample_manifold_point(const ManifoldSpec& spec, Rng& rng);

// Exact distance to the sphere union.
//
// In branch-k coordinates p = R_kᵀ x, split p into the sphere plane
// (first d+1 entries, norm h) and its complement (norm q). The nearest branch
// point is the radial projection in the plane with the complement zeroed, so
// the branch distance is sqrt((h - 1)² + q²); the manifold distance is the
// minimum over branches. h = 0 degenerates gracefully to sqrt(1 + q²).
double exact_distance(const ManifoldSpec& spec, const Vec64& x);

// Nearest manifold point. Ties between branches resolve to the lowest branch
// index; a zero in-plane component projects to the fixed direction e1.
Vec64 exact_projection(const ManifoldSpec& spec, const Vec64& x);

struct Dataset {
    ManifoldSpec spec;
    uint64_t seed = 0;
    std::vector<Vec64> points;
};

Dataset generate_dataset(const ManifoldSpec& spec, size_t count, Rng& rng);

// Flat binary format: magic "NLCD", version, n, d, m, count (u32 LE), then
// rotations and points as little-endian doubles. A JSON sidecar at
// <path>.json mirrors the header plus noise_std and seed.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace nlc
