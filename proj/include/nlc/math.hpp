#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlc/error.hpp"

namespace nlc {

// All numeric state in this project is double precision.
using Vec64 = std::vector<double>;

// Row-major dense matrix.
struct Mat64 {
    size_t rows = 0;
    size_t cols = 0;
    Vec64 data;

    Mat64() = default;
    Mat64(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    double* row(size_t r) { return data.data() + r * cols; }
    const double* row(size_t r) const { return data.data() + r * cols; }

    static Mat64 identity(size_t n);
};

// --- vector ops ---

double dot(const Vec64& a, const Vec64& b);
double norm(const Vec64& a);
double norm_sq(const Vec64& a);

Vec64 add(const Vec64& a, const Vec64& b);
Vec64 sub(const Vec64& a, const Vec64& b);
Vec64 scaled(const Vec64& a, double s);

// y += s * x
void axpy(double s, const Vec64& x, Vec64& y);

bool all_finite(const Vec64& a);
bool all_finite(const Mat64& a);

// --- matrix ops ---

Mat64 transpose(const Mat64& a);
Vec64 matvec(const Mat64& a, const Vec64& x);
// aᵀ x without forming the transpose
Vec64 matvec_t(const Mat64& a, const Vec64& x);

Mat64 matmul(const Mat64& a, const Mat64& b);
// a bᵀ; inner loops run over contiguous rows of both operands
Mat64 matmul_nt(const Mat64& a, const Mat64& b);
// aᵀ b
Mat64 matmul_tn(const Mat64& a, const Mat64& b);

double max_abs_diff(const Mat64& a, const Mat64& b);
double max_abs_diff(const Vec64& a, const Vec64& b);

}  // namespace nlc
