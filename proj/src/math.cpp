#include "nlc/math.hpp"

#include <cmath>
#include <string>

namespace nlc {

namespace {

void check_same_len(const Vec64& a, const Vec64& b) {
    require(a.size() == b.size(), ErrorKind::dim_mismatch,
            "vector lengths " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

}  // namespace

Mat64 Mat64::identity(size_t n) {
    Mat64 m(n, n);
    for (size_t i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

double dot(const Vec64& a, const Vec64& b) {
    check_same_len(a, b);
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm_sq(const Vec64& a) {
    double s = 0.0;
    for (double v : a) {
        s += v * v;
    }
    return s;
}

double norm(const Vec64& a) {
    return std::sqrt(norm_sq(a));
}

Vec64 add(const Vec64& a, const Vec64& b) {
    check_same_len(a, b);
    Vec64 out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + b[i];
    }
    return out;
}

Vec64 sub(const Vec64& a, const Vec64& b) {
    check_same_len(a, b);
    Vec64 out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return out;
}

Vec64 scaled(const Vec64& a, double s) {
    Vec64 out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * s;
    }
    return out;
}

void axpy(double s, const Vec64& x, Vec64& y) {
    check_same_len(x, y);
    for (size_t i = 0; i < x.size(); ++i) {
        y[i] += s * x[i];
    }
}

bool all_finite(const Vec64& a) {
    for (double v : a) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

bool all_finite(const Mat64& a) {
    return all_finite(a.data);
}

Mat64 transpose(const Mat64& a) {
    Mat64 out(a.cols, a.rows);
    for (size_t r = 0; r < a.rows; ++r) {
        for (size_t c = 0; c < a.cols; ++c) {
            out.at(c, r) = a.at(r, c);
        }
    }
    return out;
}

Vec64 matvec(const Mat64& a, const Vec64& x) {
    require(a.cols == x.size(), ErrorKind::dim_mismatch, "matvec: cols != len(x)");
    Vec64 out(a.rows, 0.0);
    for (size_t r = 0; r < a.rows; ++r) {
        const double* row = a.row(r);
        double s = 0.0;
        for (size_t c = 0; c < a.cols; ++c) {
            s += row[c] * x[c];
        }
        out[r] = s;
    }
    return out;
}

Vec64 matvec_t(const Mat64& a, const Vec64& x) {
    require(a.rows == x.size(), ErrorKind::dim_mismatch, "matvec_t: rows != len(x)");
    Vec64 out(a.cols, 0.0);
    for (size_t r = 0; r < a.rows; ++r) {
        const double* row = a.row(r);
        const double xr = x[r];
        for (size_t c = 0; c < a.cols; ++c) {
            out[c] += row[c] * xr;
        }
    }
    return out;
}

Mat64 matmul(const Mat64& a, const Mat64& b) {
    require(a.cols == b.rows, ErrorKind::dim_mismatch, "matmul: inner dims differ");
    Mat64 out(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Mat64 matmul_nt(const Mat64& a, const Mat64& b) {
    require(a.cols == b.cols, ErrorKind::dim_mismatch, "matmul_nt: inner dims differ");
    Mat64 out(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double s = 0.0;
            for (size_t k = 0; k < a.cols; ++k) {
                s += arow[k] * brow[k];
            }
            orow[j] = s;
        }
    }
    return out;
}

Mat64 matmul_tn(const Mat64& a, const Mat64& b) {
    require(a.rows == b.rows, ErrorKind::dim_mismatch, "matmul_tn: inner dims differ");
    Mat64 out(a.cols, b.cols);
    for (size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            double* orow = out.row(i);
            for (size_t j = 0; j < b.cols; ++j) {
                orow[j] += aki * brow[j];
            }
        }
    }
    return out;
}

double max_abs_diff(const Mat64& a, const Mat64& b) {
    require(a.rows == b.rows && a.cols == b.cols, ErrorKind::dim_mismatch, "max_abs_diff: shape");
    return max_abs_diff(a.data, b.data);
}

double max_abs_diff(const Vec64& a, const Vec64& b) {
    check_same_len(a, b);
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

}  // namespace nlc
