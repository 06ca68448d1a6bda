#include "nlc/linalg.hpp"

#include <cmath>
#include <vector>

namespace nlc {

namespace {

constexpr double kRankTol = 1e-10;

// In-place LU factorization with partial pivoting. Returns false when the
// pivot ratio indicates rank deficiency.
bool lu_factor(Mat64& a, std::vector<size_t>& perm) {
    const size_t n = a.rows;
    perm.resize(n);
    for (size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    double max_pivot = 0.0;
    double min_pivot = 0.0;
    for (size_t k = 0; k < n; ++k) {
        size_t best = k;
        double best_abs = std::fabs(a.at(k, k));
        for (size_t r = k + 1; r < n; ++r) {
            const double v = std::fabs(a.at(r, k));
            if (v > best_abs) {
                best_abs = v;
                best = r;
            }
        }
        if (best != k) {
            for (size_t c = 0; c < n; ++c) {
                std::swap(a.at(k, c), a.at(best, c));
            }
            std::swap(perm[k], perm[best]);
        }
        if (k == 0) {
            max_pivot = best_abs;
            min_pivot = best_abs;
        } else {
            max_pivot = std::max(max_pivot, best_abs);
            min_pivot = std::min(min_pivot, best_abs);
        }
        if (best_abs <= kRankTol * max_pivot) {
            return false;
        }
        const double pivot = a.at(k, k);
        for (size_t r = k + 1; r < n; ++r) {
            const double factor = a.at(r, k) / pivot;
            a.at(r, k) = factor;
            for (size_t c = k + 1; c < n; ++c) {
                a.at(r, c) -= factor * a.at(k, c);
            }
        }
    }
    return min_pivot > kRankTol * max_pivot;
}

Vec64 lu_solve(const Mat64& lu, const std::vector<size_t>& perm, const Vec64& b) {
    const size_t n = lu.rows;
    Vec64 x(n);
    for (size_t i = 0; i < n; ++i) {
        x[i] = b[perm[i]];
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < i; ++j) {
            x[i] -= lu.at(i, j) * x[j];
        }
    }
    for (size_t i = n; i-- > 0;) {
        for (size_t j = i + 1; j < n; ++j) {
            x[i] -= lu.at(i, j) * x[j];
        }
        x[i] /= lu.at(i, i);
    }
    return x;
}

// Householder QR with explicit Q accumulation. Returns false when a working
// column underflows (rank-deficient input).
bool householder_qr(const Mat64& a, Mat64& q, Vec64& r_diag) {
    const size_t n = a.rows;
    Mat64 r = a;
    std::vector<Vec64> reflectors;
    reflectors.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        double col_norm_sq = 0.0;
        for (size_t i = k; i < n; ++i) {
            col_norm_sq += r.at(i, k) * r.at(i, k);
        }
        const double col_norm = std::sqrt(col_norm_sq);
        if (col_norm < 1e-300) {
            return false;
        }
        const double alpha = r.at(k, k) >= 0.0 ? -col_norm : col_norm;
        Vec64 v(n - k);
        for (size_t i = k; i < n; ++i) {
            v[i - k] = r.at(i, k);
        }
        v[0] -= alpha;
        const double v_norm = norm(v);
        if (v_norm > 1e-300) {
            for (auto& e : v) {
                e /= v_norm;
            }
            // R[k:, k:] -= 2 v (vᵀ R[k:, k:])
            for (size_t c = k; c < n; ++c) {
                double s = 0.0;
                for (size_t i = k; i < n; ++i) {
                    s += v[i - k] * r.at(i, c);
                }
                for (size_t i = k; i < n; ++i) {
                    r.at(i, c) -= 2.0 * v[i - k] * s;
                }
            }
        } else {
            v.assign(n - k, 0.0);
        }
        reflectors.push_back(std::move(v));
    }
    r_diag.resize(n);
    for (size_t k = 0; k < n; ++k) {
        r_diag[k] = r.at(k, k);
    }
    // Q = H_0 H_1 ... H_{n-1} I
    q = Mat64::identity(n);
    for (size_t k = n; k-- > 0;) {
        const Vec64& v = reflectors[k];
        for (size_t c = 0; c < n; ++c) {
            double s = 0.0;
            for (size_t i = k; i < n; ++i) {
                s += v[i - k] * q.at(i, c);
            }
            for (size_t i = k; i < n; ++i) {
                q.at(i, c) -= 2.0 * v[i - k] * s;
            }
        }
    }
    return true;
}

}  // namespace

Mat64 random_orthogonal(Rng& rng, size_t n) {
    require(n >= 1, ErrorKind::invalid_range, "random_orthogonal: n must be >= 1");
    for (;;) {
        Mat64 g(n, n);
        for (auto& v : g.data) {
            v = rng.gaussian();
        }
        Mat64 q;
        Vec64 r_diag;
        if (!householder_qr(g, q, r_diag)) {
            continue;  // measure-zero event; draw again
        }
        for (size_t j = 0; j < n; ++j) {
            if (r_diag[j] < 0.0) {
                for (size_t i = 0; i < n; ++i) {
                    q.at(i, j) = -q.at(i, j);
                }
            }
        }
        return q;
    }
}

Mat64 pseudo_inverse(const Mat64& a) {
    require(a.rows >= 1 && a.cols >= 1, ErrorKind::invalid_range, "pseudo_inverse: empty matrix");
    const bool wide = a.rows <= a.cols;
    // Gram matrix of the short side
    Mat64 gram = wide ? matmul_nt(a, a) : matmul_tn(a, a);
    std::vector<size_t> perm;
    if (!lu_factor(gram, perm)) {
        fail(ErrorKind::rank_deficient, "pseudo_inverse: Gram pivot ratio below 1e-10");
    }
    const size_t k = gram.rows;
    if (wide) {
        // A† = Aᵀ (AAᵀ)⁻¹: solve (AAᵀ) m_j = e_j, then A† column j = Aᵀ m_j
        Mat64 pinv(a.cols, a.rows);
        Vec64 e(k, 0.0);
        for (size_t j = 0; j < k; ++j) {
            e[j] = 1.0;
            const Vec64 m = lu_solve(gram, perm, e);
            e[j] = 0.0;
            const Vec64 col = matvec_t(a, m);
            for (size_t i = 0; i < a.cols; ++i) {
                pinv.at(i, j) = col[i];
            }
        }
        return pinv;
    }
    // A† = (AᵀA)⁻¹ Aᵀ: solve (AᵀA) x_j = (Aᵀ)_j per column of Aᵀ
    Mat64 at = transpose(a);
    Mat64 pinv(a.cols, a.rows);
    Vec64 rhs(k);
    for (size_t j = 0; j < a.rows; ++j) {
        for (size_t i = 0; i < k; ++i) {
            rhs[i] = at.at(i, j);
        }
        const Vec64 x = lu_solve(gram, perm, rhs);
        for (size_t i = 0; i < k; ++i) {
            pinv.at(i, j) = x[i];
        }
    }
    return pinv;
}

Vec64 solve_linear(const Mat64& a, const Vec64& b) {
    require(a.rows == a.cols, ErrorKind::dim_mismatch, "solve_linear: matrix not square");
    require(a.rows == b.size(), ErrorKind::dim_mismatch, "solve_linear: rhs length");
    Mat64 lu = a;
    std::vector<size_t> perm;
    if (!lu_factor(lu, perm)) {
        fail(ErrorKind::rank_deficient, "solve_linear: pivot ratio below 1e-10");
    }
    return lu_solve(lu, perm, b);
}

}  // namespace nlc
