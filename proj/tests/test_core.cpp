#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nlc/io.hpp"
#include "nlc/linalg.hpp"
#include "nlc/math.hpp"
#include "nlc/rng.hpp"

using namespace nlc;

namespace {

// Independent oracle: Gauss-Jordan inverse with full augmentation, written
// against a plain 2-D array so it shares nothing with the library path.
Mat64 gauss_jordan_inverse(const Mat64& a) {
    const size_t n = a.rows;
    std::vector<std::vector<double>> aug(n, std::vector<double>(2 * n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            aug[i][j] = a.at(i, j);
        }
        aug[i][n + i] = 1.0;
    }
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r) {
            if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) {
                pivot = r;
            }
        }
        std::swap(aug[col], aug[pivot]);
        const double p = aug[col][col];
        REQUIRE(std::fabs(p) > 1e-14);
        for (size_t j = 0; j < 2 * n; ++j) {
            aug[col][j] /= p;
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = aug[r][col];
            for (size_t j = 0; j < 2 * n; ++j) {
                aug[r][j] -= f * aug[col][j];
            }
        }
    }
    Mat64 inv(n, n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            inv.at(i, j) = aug[i][n + j];
        }
    }
    return inv;
}

Mat64 random_matrix(Rng& rng, size_t rows, size_t cols) {
    Mat64 m(rows, cols);
    for (auto& v : m.data) {
        v = rng.gaussian();
    }
    return m;
}

}  // namespace

TEST_CASE("rng: identical seed and call sequence give identical streams") {
    Rng a(7);
    Rng b(7);
    const Vec64 va = gaussian_vec(a, 4);
    const Vec64 vb = gaussian_vec(b, 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(va[i] == vb[i]);
    }
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: fork is independent of parent consumption and stream-distinct") {
    Rng parent(42);
    Rng child_before = parent.fork(3);
    (void)gaussian_vec(parent, 100);
    Rng child_after = parent.fork(3);
    CHECK(child_before.next_u64() == child_after.next_u64());
    CHECK(parent.fork(0).next_u64() != parent.fork(1).next_u64());
}

TEST_CASE("rng: gaussian sample moments at n=10000") {
    Rng rng(123);
    const Vec64 v = gaussian_vec(rng, 10000);
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= double(v.size());
    double var = 0.0;
    for (double x : v) {
        var += (x - mean) * (x - mean);
    }
    var /= double(v.size());
    CHECK(mean > -0.05);
    CHECK(mean < 0.05);
    CHECK(var > 0.94);
    CHECK(var < 1.06);
}

TEST_CASE("rng: chi concentration of |eps| at n=100") {
    // chi(100) has mean ~9.975 and std ~0.71; [8, 12] is a ~3/5.7-sigma band
    Rng rng(5);
    int inside = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double len = norm(gaussian_vec(rng, 100));
        if (len >= 8.0 && len <= 12.0) {
            ++inside;
        }
    }
    CHECK(inside >= 990);
}

TEST_CASE("rng: uniform(1-delta, 1+delta) is KS-close to uniform") {
    const double delta = 0.5;
    Rng rng(99);
    std::vector<double> draws(10000);
    for (auto& d : draws) {
        d = rng.uniform(1.0 - delta, 1.0 + delta);
        CHECK(d > 1.0 - delta);
        CHECK(d < 1.0 + delta);
    }
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    const double count = double(draws.size());
    for (size_t i = 0; i < draws.size(); ++i) {
        const double cdf = (draws[i] - (1.0 - delta)) / (2.0 * delta);
        ks = std::max(ks, std::fabs(cdf - double(i) / count));
        ks = std::max(ks, std::fabs(double(i + 1) / count - cdf));
    }
    CHECK(ks <= 0.05);
}

TEST_CASE("random_orthogonal: 1x1 is a sign") {
    Rng rng(1);
    const Mat64 r = random_orthogonal(rng, 1);
    CHECK(std::fabs(std::fabs(r.at(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("random_orthogonal: RtR = I at n=5") {
    Rng rng(2);
    const Mat64 r = random_orthogonal(rng, 5);
    const Mat64 gram = matmul_tn(r, r);
    CHECK(max_abs_diff(gram, Mat64::identity(5)) <= 1e-10);
}

TEST_CASE("random_orthogonal: isometry at n=100") {
    Rng rng(3);
    const Mat64 r = random_orthogonal(rng, 100);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec64 x = gaussian_vec(rng, 100);
        const double ratio = norm(matvec(r, x)) / norm(x);
        CHECK(std::fabs(ratio - 1.0) <= 1e-10);
    }
}

TEST_CASE("pseudo_inverse: identity") {
    const Mat64 pinv = pseudo_inverse(Mat64::identity(3));
    CHECK(max_abs_diff(pinv, Mat64::identity(3)) <= 1e-12);
}

TEST_CASE("pseudo_inverse: row vector closed form") {
    Rng rng(4);
    Mat64 a(1, 6);
    for (auto& v : a.data) {
        v = rng.gaussian();
    }
    const Mat64 pinv = pseudo_inverse(a);
    const double denom = norm_sq(a.data);
    for (size_t i = 0; i < 6; ++i) {
        CHECK(pinv.at(i, 0) == doctest::Approx(a.at(0, i) / denom).epsilon(1e-12));
    }
}

TEST_CASE("pseudo_inverse: matches independent normal-equations solve on 3x7") {
    Rng rng(8);
    const Mat64 a = random_matrix(rng, 3, 7);
    const Mat64 pinv = pseudo_inverse(a);

    // oracle: A† = Aᵀ (A Aᵀ)⁻¹ through Gauss-Jordan
    const Mat64 gram_inv = gauss_jordan_inverse(matmul_nt(a, a));
    const Mat64 oracle = matmul(transpose(a), gram_inv);
    CHECK(max_abs_diff(pinv, oracle) <= 1e-10);

    const Mat64 aba = matmul(matmul(a, pinv), a);
    CHECK(max_abs_diff(aba, a) <= 1e-8);
}

TEST_CASE("pseudo_inverse: Moore-Penrose identities on random shapes") {
    Rng rng(11);
    const std::pair<size_t, size_t> shapes[] = {{2, 9}, {5, 5}, {9, 4}, {1, 100}, {20, 100}};
    for (const auto& [rows, cols] : shapes) {
        const Mat64 a = random_matrix(rng, rows, cols);
        const Mat64 pinv = pseudo_inverse(a);
        const Mat64 ap = matmul(a, pinv);
        const Mat64 pa = matmul(pinv, a);
        CHECK(max_abs_diff(matmul(ap, a), a) <= 1e-8);
        CHECK(max_abs_diff(matmul(pa, pinv), pinv) <= 1e-8);
        CHECK(max_abs_diff(ap, transpose(ap)) <= 1e-8);
        CHECK(max_abs_diff(pa, transpose(pa)) <= 1e-8);
    }
}

TEST_CASE("pseudo_inverse: duplicate rows are rank deficient") {
    Rng rng(12);
    Mat64 a = random_matrix(rng, 3, 10);
    for (size_t c = 0; c < 10; ++c) {
        a.at(2, c) = a.at(0, c);
    }
    CHECK_THROWS_AS(pseudo_inverse(a), Error);
    try {
        pseudo_inverse(a);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::rank_deficient);
    }
}

TEST_CASE("solve_linear: round trip") {
    Rng rng(13);
    const Mat64 a = random_matrix(rng, 8, 8);
    const Vec64 x = gaussian_vec(rng, 8);
    const Vec64 b = matvec(a, x);
    CHECK(max_abs_diff(solve_linear(a, b), x) <= 1e-9);
}

TEST_CASE("crc32: standard check value") {
    // IEEE CRC-32 of "123456789" is 0xCBF43926
    CHECK(crc32(std::string("123456789")) == 0xCBF43926u);
}

TEST_CASE("byte buffer: round trip and truncation") {
    std::string buf;
    put_u8(buf, 0xAB);
    put_u32(buf, 0xDEADBEEFu);
    put_u64(buf, 0x0123456789ABCDEFull);
    put_f64(buf, -0.125);
    ByteReader reader(buf);
    CHECK(reader.u8() == 0xAB);
    CHECK(reader.u32() == 0xDEADBEEFu);
    CHECK(reader.u64() == 0x0123456789ABCDEFull);
    CHECK(reader.f64() == -0.125);
    CHECK(reader.remaining() == 0);

    ByteReader truncated(buf);
    truncated.bytes(16);
    CHECK_THROWS_AS(truncated.u64(), Error);
}

TEST_CASE("format_double round-trips") {
    const double values[] = {0.0, 1.0 / 3.0, -1e-300, 3.141592653589793, 1e17, -0.1};
    for (double v : values) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("matmul variants agree") {
    Rng rng(21);
    const Mat64 a = random_matrix(rng, 7, 5);
    const Mat64 b = random_matrix(rng, 5, 6);
    const Mat64 plain = matmul(a, b);
    CHECK(max_abs_diff(matmul_nt(a, transpose(b)), plain) <= 1e-13);
    CHECK(max_abs_diff(matmul_tn(transpose(a), b), plain) <= 1e-13);
}
