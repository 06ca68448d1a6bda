#include "nlc/sampler.hpp"

#include <cmath>
#include <limits>

#include "nlc/io.hpp"

namespace nlc {

NlcSource NlcSource::network(CorrectorFn fn) {
    NlcSource source;
    source.mode = Mode::network;
    source.corrector = std::move(fn);
    return source;
}

NlcSource NlcSource::lut(const LookupTable* table) {
    require(table != nullptr, ErrorKind::config_invalid, "nlc source: null lookup table");
    NlcSource source;
    source.mode = Mode::lut;
    source.table = table;
    return source;
}

double NlcSource::residual(const Vec64& x, double sigma) const {
    switch (mode) {
        case Mode::off:
            return 0.0;
        case Mode::network:
            return std::max(corrector(x, sigma), kCorrectorFloor);
        case Mode::lut:
            return std::max(table->query(sigma), kCorrectorFloor);
    }
    return 0.0;
}

double corrected_sigma(const NlcSource& nlc, const Vec64& x, double sigma) {
    require(sigma > 0.0, ErrorKind::invalid_range, "corrected_sigma: sigma <= 0");
    if (nlc.mode == NlcSource::Mode::off) {
        return sigma;
    }
    return sigma * (1.0 + nlc.residual(x, sigma));
}

Vec64 direction(const DenoiserFn& denoiser, const Vec64& x, double sigma_hat, bool normalize,
                double* raw_norm) {
    Vec64 eps = denoiser(x, sigma_hat);
    require(eps.size() == x.size(), ErrorKind::dim_mismatch, "direction: denoiser output dim");
    const double eps_norm = norm(eps);
    if (raw_norm != nullptr) {
        *raw_norm = eps_norm;
    }
    if (!normalize) {
        return eps;
    }
    require(eps_norm > 1e-12, ErrorKind::zero_direction, "direction: |eps_theta| underflow");
    const double target = std::sqrt(double(x.size()));
    return scaled(eps, target / eps_norm);
}

Vec64 one_step_estimate(const Vec64& x, double sigma_hat, const Vec64& dir) {
    require(x.size() == dir.size(), ErrorKind::dim_mismatch, "one_step_estimate: dims");
    Vec64 out = x;
    axpy(-sigma_hat, dir, out);
    return out;
}

namespace {

void check_schedule(const NoiseSchedule& schedule) {
    require(schedule.steps() >= 1, ErrorKind::schedule_exhausted, "sampler: empty schedule");
}

TrajectoryStep make_final_step(Vec64 x) {
    TrajectoryStep step;
    step.x = std::move(x);
    return step;
}

}  // namespace

Trajectory sample_ddim_ddpm(const DenoiserFn& denoiser, const NlcSource& nlc,
                            const NoiseSchedule& schedule, const SamplerConfig& config,
                            uint32_t dim, Rng& rng) {
    check_schedule(schedule);
    require(config.eta >= 0.0 && config.eta <= 1.0, ErrorKind::config_invalid,
            "sampler: eta must lie in [0, 1]");
    require(dim >= 1, ErrorKind::invalid_range, "sampler: dim must be >= 1");

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
        // ratio-preserving: sigma_hat_next / sigma_hat = sigma_next / sigma,
        // ordered so r == 0 reproduces the scheduled level bit-exactly
        const double sigma_hat_next = (sigma_hat / sigma) * sigma_next;

        double raw_norm = 0.0;
        const Vec64 dir = direction(denoiser, x, sigma_hat, config.normalize_direction, &raw_norm);

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
        step.x = x;
        trajectory.steps.push_back(std::move(step));

        axpy(sigma_signal - sigma_hat, dir, x);
        if (sigma_noise > 0.0) {
            const Vec64 omega = gaussian_vec(rng, dim);
            axpy(sigma_noise, omega, x);
        }
    }
    trajectory.steps.push_back(make_final_step(std::move(x)));
    return trajectory;
}

Trajectory sample_edm(const DenoiserFn& denoiser, const NlcSource& nlc,
                      const NoiseSchedule& schedule, bool heun, uint32_t dim, Rng& rng) {
    check_schedule(schedule);
    require(dim >= 1, ErrorKind::invalid_range, "sampler: dim must be >= 1");

    Vec64 x = gaussian_vec(rng, dim);
    for (auto& v : x) {
        v *= schedule.sigma(0);
    }

    Trajectory trajectory;
    trajectory.steps.reserve(schedule.steps() + 1);
    for (size_t t = 0; t < schedule.steps(); ++t) {
        const double sigma = schedule.sigma(t);
        const double sigma_next = schedule.sigma(t + 1);
        const double r = nlc.residual(x, sigma);
        const double sigma_hat = sigma * (1.0 + r);
        const double sigma_hat_next = (sigma_hat / sigma) * sigma_next;

        const Vec64 eps_t = denoiser(x, sigma_hat);
        require(eps_t.size() == dim, ErrorKind::dim_mismatch, "edm: denoiser output dim");

        TrajectoryStep step;
        step.sigma = sigma;
        step.sigma_hat = sigma_hat;
        step.r = r;
        step.dir_norm = norm(eps_t);
        step.beta = 1.0 - sigma_next / sigma;
        step.x = x;
        trajectory.steps.push_back(std::move(step));

        Vec64 x_euler = x;
        axpy(sigma_hat_next - sigma_hat, eps_t, x_euler);
        if (heun && t + 1 < schedule.steps()) {
            const Vec64 eps_next = denoiser(x_euler, sigma_hat_next);
            Vec64 slope(dim);
            for (size_t j = 0; j < dim; ++j) {
                slope[j] = 0.5 * eps_t[j] + 0.5 * eps_next[j];
            }
            x_euler = x;
            axpy(sigma_hat_next - sigma_hat, slope, x_euler);
        }
        x = std::move(x_euler);
    }
    trajectory.steps.push_back(make_final_step(std::move(x)));
    return trajectory;
}

Trajectory sample_dpm(const DenoiserFn& denoiser, const NlcSource& nlc,
                      const DpmSchedule& schedule, uint32_t dim, Rng& rng) {
    check_schedule(schedule.base);
    require(dim >= 1, ErrorKind::invalid_range, "sampler: dim must be >= 1");

    Vec64 x = gaussian_vec(rng, dim);
    for (auto& v : x) {
        v *= schedule.base.sigma(0);
    }

    Trajectory trajectory;
    trajectory.steps.reserve(schedule.base.steps() + 1);
    for (size_t t = 0; t < schedule.base.steps(); ++t) {
        const double sigma = schedule.base.sigma(t);
        const double sigma_next = schedule.base.sigma(t + 1);
        const double r = nlc.residual(x, sigma);
        const double sigma_hat = sigma * (1.0 + r);

        TrajectoryStep step;
        step.sigma = sigma;
        step.sigma_hat = sigma_hat;
        step.r = r;
        step.beta = 1.0 - sigma_next / sigma;
        step.x = x;

        if (sigma_next == 0.0) {
            // sentinel: the update degenerates to the one-step estimate
            const Vec64 eps_t = denoiser(x, sigma_hat);
            step.dir_norm = norm(eps_t);
            trajectory.steps.push_back(std::move(step));
            axpy(-sigma_hat, eps_t, x);
            break;
        }

        const double lambda_t = schedule.lambda(t);
        const double lambda_next = schedule.lambda(t + 1);
        const double h = lambda_next - lambda_t;
        const double lambda_mid = 0.5 * (lambda_t + lambda_next);
        const double sigma_mid = schedule.sigma_of_lambda(lambda_mid);
        const double sigma_hat_mid = (sigma_hat / sigma) * sigma_mid;

        const Vec64 eps_t = denoiser(x, sigma_hat);
        require(eps_t.size() == dim, ErrorKind::dim_mismatch, "dpm: denoiser output dim");
        step.dir_norm = norm(eps_t);
        trajectory.steps.push_back(std::move(step));

        // midpoint state, then full step with the midpoint slope
        Vec64 u = x;
        axpy(-sigma_hat_mid * (std::exp(0.5 * h) - 1.0), eps_t, u);
        const Vec64 eps_mid = denoiser(u, sigma_hat_mid);
        axpy(-sigma_next * (std::exp(h) - 1.0), eps_mid, x);
    }
    trajectory.steps.push_back(make_final_step(std::move(x)));
    return trajectory;
}

Trajectory run_sampler(const DenoiserFn& denoiser, const NlcSource& nlc,
                       const NoiseSchedule& schedule, const SamplerConfig& config, uint32_t dim,
                       Rng& rng) {
    const bool edm_family = config.algo == SamplerAlgo::edm_euler ||
                            config.algo == SamplerAlgo::edm_heun ||
                            config.algo == SamplerAlgo::dpm2;
    require(!(edm_family && config.normalize_direction), ErrorKind::config_invalid,
            "sampler: edm/dpm do not normalize the direction");
    switch (config.algo) {
        case SamplerAlgo::ddim:
        case SamplerAlgo::ddpm:
            return sample_ddim_ddpm(denoiser, nlc, schedule, config, dim, rng);
        case SamplerAlgo::edm_euler:
            return sample_edm(denoiser, nlc, schedule, false, dim, rng);
        case SamplerAlgo::edm_heun:
            return sample_edm(denoiser, nlc, schedule, true, dim, rng);
        case SamplerAlgo::dpm2:
            return sample_dpm(denoiser, nlc, build_dpm_schedule(schedule), dim, rng);
    }
    fail(ErrorKind::config_invalid, "sampler: unknown algorithm");
}

void annotate_with_oracle(Trajectory& trajectory, const ManifoldSpec& spec) {
    const double sqrt_n = std::sqrt(double(spec.n));
    for (auto& step : trajectory.steps) {
        step.dist = exact_distance(spec, step.x);
        step.bias = step.sigma > 0.0
                        ? (step.dist - sqrt_n * step.sigma_hat) / (sqrt_n * step.sigma)
                        : std::numeric_limits<double>::quiet_NaN();
    }
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
    std::string csv = "step,sigma,sigma_hat,r,dir_norm,dist,bias,beta_t\n";
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
        const auto& s = trajectory.steps[i];
        csv += std::to_string(i) + "," + format_double(s.sigma) + "," +
               format_double(s.sigma_hat) + "," + format_double(s.r) + "," +
               format_double(s.dir_norm) + "," + format_double(s.dist) + "," +
               format_double(s.bias) + "," + format_double(s.beta) + "\n";
    }
    write_file_atomic(path, csv);
}

}  // namespace nlc
