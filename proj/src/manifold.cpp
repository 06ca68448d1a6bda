#include "nlc/manifold.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "nlc/io.hpp"
#include "nlc/linalg.hpp"

namespace nlc {

namespace {

constexpr char kMagic[5] = "NLCD";
constexpr uint32_t kVersion = 1;

void check_spec(const ManifoldSpec& spec) {
    require(spec.n >= 1 && spec.d >= 1 && spec.m >= 1, ErrorKind::invalid_range,
            "manifold: n, d, m must be positive");
    require(spec.d + 1 <= spec.n, ErrorKind::invalid_range, "manifold: requires d + 1 <= n");
    require(spec.noise_std >= 0.0, ErrorKind::invalid_range, "manifold: noise_std < 0");
    require(spec.rotations.size() == spec.m, ErrorKind::dim_mismatch,
            "manifold: rotation count != m");
}

// (h, q²) split of x in branch-k coordinates
void branch_split(const ManifoldSpec& spec, const Vec64& x, size_t k, Vec64& local,
                  double* head_norm, double* tail_sq) {
    local = matvec_t(spec.rotations[k], x);
    double h = 0.0;
    for (size_t i = 0; i <= spec.d; ++i) {
        h += local[i] * local[i];
    }
    double q = 0.0;
    for (size_t i = spec.d + 1; i < spec.n; ++i) {
        q += local[i] * local[i];
    }
    *head_norm = std::sqrt(h);
    *tail_sq = q;
}

}  // namespace

ManifoldSpec make_manifold_spec(uint32_t n, uint32_t d, uint32_t m, double noise_std, Rng& rng) {
    ManifoldSpec spec;
    spec.n = n;
    spec.d = d;
    spec.m = m;
    spec.noise_std = noise_std;
    require(n >= 1 && d >= 1 && m >= 1, ErrorKind::invalid_range,
            "manifold: n, d, m must be positive");
    require(d + 1 <= n, ErrorKind::invalid_range, "manifold: requires d + 1 <= n");
    require(noise_std >= 0.0, ErrorKind::invalid_range, "manifold: noise_std < 0");
    spec.rotations.reserve(m);
    for (uint32_t k = 0; k < m; ++k) {
        spec.rotations.push_back(random_orthogonal(rng, n));
    }
    return spec;
}

Vec64 sample_manifold_point(const ManifoldSpec& spec, Rng& rng) {
    check_spec(spec);
    const size_t k = rng.uniform_index(spec.m);
    Vec64 s = gaussian_vec(rng, spec.d + 1);
    double s_norm = norm(s);
    while (s_norm < 1e-12) {
        s = gaussian_vec(rng, spec.d + 1);
        s_norm = norm(s);
    }
    Vec64 local(spec.n, 0.0);
    for (size_t i = 0; i <= spec.d; ++i) {
        local[i] = s[i] / s_norm;
    }
    return matvec(spec.rotations[k], local);
}

double exact_distance(const ManifoldSpec& spec, const Vec64& x) {
    check_spec(spec);
    require(x.size() == spec.n, ErrorKind::dim_mismatch, "exact_distance: len(x) != n");
    double best = std::numeric_limits<double>::infinity();
    Vec64 local;
    for (size_t k = 0; k < spec.m; ++k) {
        double head_norm = 0.0;
        double tail_sq = 0.0;
        branch_split(spec, x, k, local, &head_norm, &tail_sq);
        const double radial = head_norm - 1.0;
        const double dist = std::sqrt(radial * radial + tail_sq);
        if (dist < best) {
            best = dist;
        }
    }
    return best;
}

Vec64 exact_projection(const ManifoldSpec& spec, const Vec64& x) {
    check_spec(spec);
    require(x.size() == spec.n, ErrorKind::dim_mismatch, "exact_projection: len(x) != n");
    double best = std::numeric_limits<double>::infinity();
    size_t best_k = 0;
    double best_head = 0.0;
    Vec64 best_local;
    Vec64 local;
    for (size_t k = 0; k < spec.m; ++k) {
        double head_norm = 0.0;
        double tail_sq = 0.0;
        branch_split(spec, x, k, local, &head_norm, &tail_sq);
        const double radial = head_norm - 1.0;
        const double dist = std::sqrt(radial * radial + tail_sq);
        if (dist < best) {  // strict: ties keep the lowest k
            best = dist;
            best_k = k;
            best_head = head_norm;
            best_local = local;
        }
    }
    Vec64 proj_local(spec.n, 0.0);
    if (best_head < 1e-12) {
        proj_local[0] = 1.0;  // fixed tie-break direction e1
    } else {
        for (size_t i = 0; i <= spec.d; ++i) {
            proj_local[i] = best_local[i] / best_head;
        }
    }
    return matvec(spec.rotations[best_k], proj_local);
}

Dataset generate_dataset(const ManifoldSpec& spec, size_t count, Rng& rng) {
    check_spec(spec);
    require(count >= 1, ErrorKind::invalid_range, "generate_dataset: count must be >= 1");
    Dataset dataset;
    dataset.spec = spec;
    dataset.seed = rng.seed();
    dataset.points.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Vec64 x = sample_manifold_point(spec, rng);
        if (spec.noise_std > 0.0) {
            for (auto& v : x) {
                v += spec.noise_std * rng.gaussian();
            }
        }
        dataset.points.push_back(std::move(x));
    }
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    check_spec(dataset.spec);
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, dataset.spec.n);
    put_u32(buf, dataset.spec.d);
    put_u32(buf, dataset.spec.m);
    put_u32(buf, static_cast<uint32_t>(dataset.points.size()));
    for (const auto& r : dataset.spec.rotations) {
        for (double v : r.data) {
            put_f64(buf, v);
        }
    }
    for (const auto& p : dataset.points) {
        require(p.size() == dataset.spec.n, ErrorKind::dim_mismatch, "save_dataset: point dim");
        for (double v : p) {
            put_f64(buf, v);
        }
    }
    write_file_atomic(path, buf);

    nlohmann::json sidecar = {
        {"magic", "NLCD"},
        {"version", kVersion},
        {"n", dataset.spec.n},
        {"d", dataset.spec.d},
        {"m", dataset.spec.m},
        {"count", dataset.points.size()},
        {"noise_std", dataset.spec.noise_std},
        {"seed", dataset.seed},
    };
    write_file_atomic(path + ".json", sidecar.dump(2) + "\n");
}

Dataset load_dataset(const std::string& path) {
    const std::string buf = read_file(path);
    ByteReader reader(buf);
    require(reader.bytes(4) == "NLCD", ErrorKind::corrupt_payload, "dataset: bad magic");
    const uint32_t version = reader.u32();
    require(version == kVersion, ErrorKind::version_mismatch,
            "dataset: version " + std::to_string(version));
    Dataset dataset;
    dataset.spec.n = reader.u32();
    dataset.spec.d = reader.u32();
    dataset.spec.m = reader.u32();
    const uint32_t count = reader.u32();
    const uint32_t n = dataset.spec.n;
    dataset.spec.rotations.reserve(dataset.spec.m);
    for (uint32_t k = 0; k < dataset.spec.m; ++k) {
        Mat64 r(n, n);
        for (auto& v : r.data) {
            v = reader.f64();
        }
        const Mat64 gram = matmul_tn(r, r);
        require(max_abs_diff(gram, Mat64::identity(n)) <= 1e-10, ErrorKind::corrupt_payload,
                "dataset: rotation " + std::to_string(k) + " is not orthogonal");
        dataset.spec.rotations.push_back(std::move(r));
    }
    dataset.points.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Vec64 p(n);
        for (auto& v : p) {
            v = reader.f64();
        }
        dataset.points.push_back(std::move(p));
    }
    require(reader.remaining() == 0, ErrorKind::corrupt_payload, "dataset: trailing bytes");

    const std::string sidecar_path = path + ".json";
    if (file_exists(sidecar_path)) {
        const auto sidecar = nlohmann::json::parse(read_file(sidecar_path));
        dataset.spec.noise_std = sidecar.value("noise_std", dataset.spec.noise_std);
        dataset.seed = sidecar.value("seed", uint64_t{0});
    }
    check_spec(dataset.spec);
    return dataset;
}

}  // namespace nlc
