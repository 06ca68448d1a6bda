#include "nlc/constrained.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "nlc/io.hpp"
#include "nlc/linalg.hpp"

namespace nlc {

namespace {

const char* kind_name(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::random_row: return "random-row";
        case OperatorKind::coordinate_mask: return "coordinate-mask";
        case OperatorKind::custom: return "custom";
    }
    return "custom";
}

OperatorKind kind_from_name(const std::string& name) {
    if (name == "random-row") {
        return OperatorKind::random_row;
    }
    if (name == "coordinate-mask") {
        return OperatorKind::coordinate_mask;
    }
    return OperatorKind::custom;
}

}  // namespace

LinearOperator make_operator(Mat64 a, OperatorKind kind, uint64_t seed) {
    LinearOperator op;
    op.kind = kind;
    op.seed = seed;
    op.a_pinv = pseudo_inverse(a);
    op.a = std::move(a);
    return op;
}

LinearOperator make_random_row_operator(uint32_t rows, uint32_t n, Rng& rng) {
    require(rows >= 1 && rows <= n, ErrorKind::invalid_range,
            "random row operator: need 1 <= rows <= n");
    Mat64 a(rows, n);
    for (auto& v : a.data) {
        v = rng.gaussian();
    }
    return make_operator(std::move(a), OperatorKind::random_row, rng.seed());
}

LinearOperator make_coordinate_mask_operator(const std::vector<uint32_t>& coords, uint32_t n) {
    require(!coords.empty(), ErrorKind::invalid_range, "mask operator: no coordinates");
    Mat64 a(coords.size(), n);
    for (size_t i = 0; i < coords.size(); ++i) {
        require(coords[i] < n, ErrorKind::invalid_range, "mask operator: coordinate out of range");
        a.at(i, coords[i]) = 1.0;
    }
    return make_operator(std::move(a), OperatorKind::coordinate_mask, 0);
}

Vec64 apply_operator(const LinearOperator& op, const Vec64& x) {
    return matvec(op.a, x);
}

Vec64 project_constraint(const LinearOperator& op, const Vec64& y, const Vec64& x_hat) {
    require(y.size() == op.rows(), ErrorKind::dim_mismatch, "project_constraint: len(y)");
    require(x_hat.size() == op.cols(), ErrorKind::dim_mismatch, "project_constraint: len(x_hat)");
    // A† y + x_hat - A†(A x_hat)
    Vec64 out = matvec(op.a_pinv, y);
    const Vec64 ax = matvec(op.a, x_hat);
    const Vec64 back = matvec(op.a_pinv, ax);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] += x_hat[i] - back[i];
    }
    return out;
}

void save_operator(const LinearOperator& op, const std::string& path) {
    std::string buf;
    put_u32(buf, static_cast<uint32_t>(op.a.rows));
    put_u32(buf, static_cast<uint32_t>(op.a.cols));
    for (double v : op.a.data) {
        put_f64(buf, v);
    }
    write_file_atomic(path, buf);
    nlohmann::json manifest = {
        {"kind", kind_name(op.kind)},
        {"rows", op.a.rows},
        {"cols", op.a.cols},
        {"seed", op.seed},
    };
    write_file_atomic(path + ".json", manifest.dump(2) + "\n");
}

LinearOperator load_operator(const std::string& path) {
    const std::string buf = read_file(path);
    ByteReader reader(buf);
    const uint32_t rows = reader.u32();
    const uint32_t cols = reader.u32();
    require(rows >= 1 && cols >= 1, ErrorKind::corrupt_payload, "operator: bad dims");
    Mat64 a(rows, cols);
    for (auto& v : a.data) {
        v = reader.f64();
    }
    require(reader.remaining() == 0, ErrorKind::corrupt_payload, "operator: trailing bytes");
    OperatorKind kind = OperatorKind::custom;
    uint64_t seed = 0;
    const std::string manifest_path = path + ".json";
    if (file_exists(manifest_path)) {
        const auto manifest = nlohmann::json::parse(read_file(manifest_path));
        kind = kind_from_name(manifest.value("kind", "custom"));
        seed = manifest.value("seed", uint64_t{0});
    }
    return make_operator(std::move(a), kind, seed);
}

Trajectory sample_ddnm(const DenoiserFn& denoiser, const NlcSource& nlc,
                       const NoiseSchedule& schedule, const LinearOperator& op, const Vec64& y,
                       const SamplerConfig& config, Rng& rng) {
    require(schedule.steps() >= 1, ErrorKind::schedule_exhausted, "ddnm: empty schedule");
    require(config.eta >= 0.0 && config.eta <= 1.0, ErrorKind::config_invalid,
            "ddnm: eta must lie in [0, 1]");
    require(y.size() == op.rows(), ErrorKind::dim_mismatch, "ddnm: len(y)");
    const auto dim = static_cast<uint32_t>(op.cols());

    const double sigma_T = schedule.sigma(0);
    Vec64 x = gaussian_vec(rng, dim);
    for (auto& v : x) {
        v *= std::sqrt(sigma_T * sigma_T + 1.0);
    }

    Trajectory trajectory;
    trajectory.steps.reserve(schedule.steps() + 1);
    for (size_t t = 0; t < schedule.steps(); ++t) {
        const double sigma = schedule.sigma(t);
        const double sigma_next = schedule.sigma(t + 1);
        const double r = nlc.residual(x, sigma);
        const double sigma_hat = sigma * (1.0 + r);
        const double sigma_hat_next = (sigma_hat / sigma) * sigma_next;

        double raw_norm = 0.0;
        const Vec64 dir = direction(denoiser, x, sigma_hat, config.normalize_direction, &raw_norm);
        const Vec64 x_hat = one_step_estimate(x, sigma_hat, dir);
        const Vec64 x_proj = project_constraint(op, y, x_hat);

        const double sigma_noise =
            config.eta * (sigma_hat_next / sigma_hat) *
            std::sqrt(std::max(0.0, sigma_hat * sigma_hat - sigma_hat_next * sigma_hat_next));
        const double sigma_signal =
            sigma_noise == 0.0
                ? sigma_hat_next
                : std::sqrt(std::max(0.0, sigma_hat_next * sigma_hat_next - sigma_noise * sigma_noise));

        TrajectoryStep step;
        step.sigma = sigma;
        step.sigma_hat = sigma_hat;
        step.r = r;
        step.dir_norm = raw_norm;
        step.beta = 1.0 - sigma_next / sigma;
        step.consistency = norm(sub(apply_operator(op, x_proj), y));
        step.state_violation = norm(sub(apply_operator(op, x), y));
        step.x = x;
        trajectory.steps.push_back(std::move(step));

        x = x_proj;
        axpy(sigma_signal, dir, x);
        if (sigma_noise > 0.0) {
            const Vec64 omega = gaussian_vec(rng, dim);
            axpy(sigma_noise, omega, x);
        }
    }
    TrajectoryStep final_step;
    final_step.consistency = norm(sub(apply_operator(op, x), y));
    final_step.state_violation = final_step.consistency;
    final_step.x = std::move(x);
    trajectory.steps.push_back(std::move(final_step));
    return trajectory;
}

IterProjResult iterproj(const DenoiserFn& denoiser, const NlcSource& nlc,
                        const LinearOperator& op, const Vec64& y, const IterProjConfig& config,
                        Rng& rng) {
    require(config.sigma_min > 0.0 && config.sigma_min < config.sigma_restart &&
                config.sigma_restart <= config.sigma_max,
            ErrorKind::config_invalid, "iterproj: need 0 < sigma_min < sigma_restart <= sigma_max");
    require(config.decay > 0.0 && config.decay < 1.0, ErrorKind::config_invalid,
            "iterproj: decay must lie in (0, 1)");
    require(config.noise_mix >= 0.0 && config.noise_mix <= 1.0, ErrorKind::config_invalid,
            "iterproj: noise_mix must lie in [0, 1]");
    require(config.max_iterations >= 1, ErrorKind::config_invalid,
            "iterproj: max_iterations must be >= 1");
    require(y.size() == op.rows(), ErrorKind::dim_mismatch, "iterproj: len(y)");
    const auto dim = static_cast<uint32_t>(op.cols());
    const double stop_tol =
        config.stop_tol >= 0.0 ? config.stop_tol : 1e-4 * std::sqrt(double(dim));
    const double eta = config.noise_mix;

    double sigma_k = config.sigma_max;
    Vec64 x = gaussian_vec(rng, dim);
    for (auto& v : x) {
        v *= sigma_k;
    }

    IterProjResult result;
    Vec64 prev_proj;
    Vec64 best_proj;
    double best_sigma_hat = std::numeric_limits<double>::infinity();
    for (uint32_t k = 0;; ++k) {
        const double r = nlc.residual(x, sigma_k);
        const double sigma_hat = sigma_k * (1.0 + r);
        double raw_norm = 0.0;
        const Vec64 dir = direction(denoiser, x, sigma_hat, true, &raw_norm);
        const Vec64 x_hat = one_step_estimate(x, sigma_hat, dir);
        const Vec64 x_proj = project_constraint(op, y, x_hat);

        TrajectoryStep step;
        step.sigma = sigma_k;
        step.sigma_hat = sigma_hat;
        step.r = r;
        step.dir_norm = raw_norm;
        step.consistency = norm(sub(apply_operator(op, x_proj), y));
        step.state_violation = norm(sub(apply_operator(op, x), y));
        step.delta_x = prev_proj.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : norm(sub(x_proj, prev_proj));
        step.x = x;
        result.trajectory.steps.push_back(std::move(step));

        if (sigma_hat < best_sigma_hat) {
            best_sigma_hat = sigma_hat;
            best_proj = x_proj;
            result.best_index = k;
        }
        if (!prev_proj.empty() && norm(sub(x_proj, prev_proj)) < stop_tol) {
            best_proj = x_proj;
            result.best_index = k;
            break;
        }
        if (k + 1 >= config.max_iterations) {
            result.hit_max_iterations = true;
            break;
        }
        prev_proj = x_proj;

        double sigma_next = config.decay * sigma_k;
        if (sigma_next < config.sigma_min) {
            sigma_next = config.sigma_restart;
        }
        Vec64 mixed = gaussian_vec(rng, dim);
        for (size_t j = 0; j < dim; ++j) {
            mixed[j] = std::sqrt(1.0 - eta * eta) * dir[j] + eta * mixed[j];
        }
        x = x_proj;
        axpy(sigma_next, mixed, x);
        sigma_k = sigma_next;
    }

    TrajectoryStep final_step;
    final_step.consistency = norm(sub(apply_operator(op, best_proj), y));
    final_step.state_violation = final_step.consistency;
    final_step.x = best_proj;
    result.trajectory.steps.push_back(std::move(final_step));
    result.sample = std::move(best_proj);
    return result;
}

void write_restoration_csv(const Trajectory& trajectory, const std::string& path) {
    std::string csv = "iteration,sigma_k,sigma_hat,dist,consistency,delta_x\n";
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
        const auto& s = trajectory.steps[i];
        csv += std::to_string(i) + "," + format_double(s.sigma) + "," +
               format_double(s.sigma_hat) + "," + format_double(s.dist) + "," +
               format_double(s.consistency) + "," + format_double(s.delta_x) + "\n";
    }
    write_file_atomic(path, csv);
}

}  // namespace nlc
