#pragma once

#include "nlc/math.hpp"
#include "nlc/rng.hpp"

namespace nlc {

// Random orthogonal matrix: QR of a Gaussian matrix, with the sign convention
// that the R diagonal is nonnegative (fixes the otherwise arbitrary column
// signs). Redraws on a numerically rank-deficient Gaussian draw.
Mat64 random_orthogonal(Rng& rng, size_t n);

// Moore-Penrose pseudo-inverse for full-(row|column)-rank operators via the
// normal equations: A† = Aᵀ(AAᵀ)⁻¹ when rows <= cols, (AᵀA)⁻¹Aᵀ otherwise.
// The Gram system is solved by partially pivoted elimination; rank is
// monitored on its pivots and RankDeficient is thrown when
// min|pivot| < 1e-10 * max|pivot|.
Mat64 pseudo_inverse(const Mat64& a);

// Solves a x = b by partially pivoted Gaussian elimination (square a).
Vec64 solve_linear(const Mat64& a, const Vec64& b);

}  // namespace nlc
