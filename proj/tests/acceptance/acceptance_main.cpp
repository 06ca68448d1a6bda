// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line each. Training runs from scratch at pinned seeds and
// budgets, so a full pass takes a few minutes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "nlc/constrained.hpp"
#include "nlc/experiment.hpp"
#include "nlc/io.hpp"
#include "nlc/sampler.hpp"
#include "nlc/threadpool.hpp"
#include "nlc/training.hpp"

using namespace nlc;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) {
        ++g_failures;
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: reduction to the published baseline recursions
// ---------------------------------------------------------------------------

// Textbook single transitions, written straight from the published update
// rules and sharing no code with the library samplers.
namespace baseline {

Vec64 init_vp(double sigma_T, uint32_t dim, Rng& rng) {
    Vec64 x = gaussian_vec(rng, dim);
    const double s = std::sqrt(sigma_T * sigma_T + 1.0);
    for (auto& v : x) {
        v *= s;
    }
    return x;
}

Vec64 init_edm(double sigma_T, uint32_t dim, Rng& rng) {
    Vec64 x = gaussian_vec(rng, dim);
    for (auto& v : x) {
        v *= sigma_T;
    }
    return x;
}

Vec64 ddim_step(const DenoiserFn& eps, const Vec64& x, double sigma, double sigma_prev) {
    const Vec64 e = eps(x, sigma);
    Vec64 out = x;
    for (size_t j = 0; j < x.size(); ++j) {
        out[j] += (sigma_prev - sigma) * e[j];
    }
    return out;
}

Vec64 ddpm_step(const DenoiserFn& eps, const Vec64& x, double sigma, double sigma_prev,
                Rng& rng) {
    const double sigma_tp = sigma_prev * sigma_prev / sigma;
    const double mag = std::sqrt(std::max(0.0, sigma_prev * sigma_prev - sigma_tp * sigma_tp));
    const Vec64 e = eps(x, sigma);
    Vec64 out = x;
    for (size_t j = 0; j < x.size(); ++j) {
        out[j] += (sigma_tp - sigma) * e[j];
    }
    if (mag > 0.0) {
        const Vec64 w = gaussian_vec(rng, x.size());
        for (size_t j = 0; j < x.size(); ++j) {
            out[j] += mag * w[j];
        }
    }
    return out;
}

Vec64 edm_step(const DenoiserFn& eps, const Vec64& x, double sigma, double sigma_prev,
               bool heun) {
    const Vec64 e = eps(x, sigma);
    Vec64 out = x;
    for (size_t j = 0; j < x.size(); ++j) {
        out[j] += (sigma_prev - sigma) * e[j];
    }
    if (heun && sigma_prev > 0.0) {
        const Vec64 e2 = eps(out, sigma_prev);
        for (size_t j = 0; j < x.size(); ++j) {
            out[j] = x[j] + (sigma_prev - sigma) * (0.5 * e[j] + 0.5 * e2[j]);
        }
    }
    return out;
}

Vec64 dpm2_step(const DenoiserFn& eps, const Vec64& x, double sigma, double sigma_prev) {
    if (sigma_prev == 0.0) {
        const Vec64 e = eps(x, sigma);
        Vec64 out = x;
        for (size_t j = 0; j < x.size(); ++j) {
            out[j] -= sigma * e[j];
        }
        return out;
    }
    const double lam = -std::log(sigma);
    const double lam_prev = -std::log(sigma_prev);
    const double h = lam_prev - lam;
    const double sigma_mid = std::exp(-0.5 * (lam + lam_prev));
    const Vec64 e = eps(x, sigma);
    Vec64 u = x;
    for (size_t j = 0; j < x.size(); ++j) {
        u[j] -= sigma_mid * (std::exp(0.5 * h) - 1.0) * e[j];
    }
    const Vec64 em = eps(u, sigma_mid);
    Vec64 out = x;
    for (size_t j = 0; j < x.size(); ++j) {
        out[j] -= sigma_prev * (std::exp(h) - 1.0) * em[j];
    }
    return out;
}

Vec64 ddnm_step(const DenoiserFn& eps, const Vec64& x, double sigma, double sigma_prev,
                const Mat64& a, const Mat64& a_pinv, const Vec64& y, double eta, Rng& rng) {
    const Vec64 e = eps(x, sigma);
    Vec64 x0 = x;
    for (size_t j = 0; j < x.size(); ++j) {
        x0[j] -= sigma * e[j];
    }
    Vec64 proj = matvec(a_pinv, y);
    const Vec64 back = matvec(a_pinv, matvec(a, x0));
    for (size_t j = 0; j < x.size(); ++j) {
        proj[j] += x0[j] - back[j];
    }
    const double noise =
        eta * (sigma_prev / sigma) * std::sqrt(std::max(0.0, sigma * sigma - sigma_prev * sigma_prev));
    const double signal =
        noise == 0.0 ? sigma_prev
                     : std::sqrt(std::max(0.0, sigma_prev * sigma_prev - noise * noise));
    for (size_t j = 0; j < x.size(); ++j) {
        proj[j] += signal * e[j];
    }
    if (noise > 0.0) {
        const Vec64 w = gaussian_vec(rng, x.size());
        for (size_t j = 0; j < x.size(); ++j) {
            proj[j] += noise * w[j];
        }
    }
    return proj;
}

}  // namespace baseline

void criterion_reduction() {
    const uint32_t dim = 16;
    Rng net_rng(41);
    const MlpNet net = make_mlp(NetRole::denoiser, {dim + 1, 24, dim}, net_rng);
    const DenoiserFn eps = make_denoiser_fn(net);
    const NoiseSchedule grid = subsample(build_ddpm_schedule(1000, 1e-4, 0.02), 21);
    Rng op_rng(42);
    const LinearOperator op = make_random_row_operator(2, dim, op_rng);
    const Vec64 y(2, 0.0);

    double worst_all = 0.0;
    auto stepwise = [&](const std::string& name, auto mine, auto textbook) {
        double worst = 0.0;
        for (size_t t = 0; t + 1 < grid.steps() + 1 && t < 20; ++t) {
            const double sigma = grid.sigma(t);
            const double sigma_prev = grid.sigma(t + 1);
            Rng rng_a(900 + t);
            Rng rng_b(900 + t);
            const Vec64 got = mine(sigma, sigma_prev, rng_a);
            const Vec64 want = textbook(sigma, sigma_prev, rng_b);
            worst = std::max(worst, max_abs_diff(got, want));
        }
        worst_all = std::max(worst_all, worst);
        report(1, "reduction " + name, worst <= 1e-12, "worst dev " + fmt(worst));
    };

    SamplerConfig off;
    off.normalize_direction = false;

    stepwise(
        "ddim",
        [&](double s, double sp, Rng& rng) {
            SamplerConfig c = off;
            c.algo = SamplerAlgo::ddim;
            c.eta = 0.0;
            return sample_ddim_ddpm(eps, NlcSource::off(), make_custom_schedule({s, sp}), c, dim,
                                    rng)
                .steps[1]
                .x;
        },
        [&](double s, double sp, Rng& rng) {
            const Vec64 x = baseline::init_vp(s, dim, rng);
            return baseline::ddim_step(eps, x, s, sp);
        });

    stepwise(
        "ddpm",
        [&](double s, double sp, Rng& rng) {
            SamplerConfig c = off;
            c.algo = SamplerAlgo::ddpm;
            c.eta = 1.0;
            return sample_ddim_ddpm(eps, NlcSource::off(), make_custom_schedule({s, sp}), c, dim,
                                    rng)
                .steps[1]
                .x;
        },
        [&](double s, double sp, Rng& rng) {
            const Vec64 x = baseline::init_vp(s, dim, rng);
            return baseline::ddpm_step(eps, x, s, sp, rng);
        });

    for (const bool heun : {false, true}) {
        stepwise(
            heun ? "edm-heun" : "edm-euler",
            [&](double s, double sp, Rng& rng) {
                return sample_edm(eps, NlcSource::off(), make_custom_schedule({s, sp}), heun, dim,
                                  rng)
                    .steps[1]
                    .x;
            },
            [&](double s, double sp, Rng& rng) {
                const Vec64 x = baseline::init_edm(s, dim, rng);
                return baseline::edm_step(eps, x, s, sp, heun);
            });
    }

    stepwise(
        "dpm2",
        [&](double s, double sp, Rng& rng) {
            const DpmSchedule dpm = build_dpm_schedule(make_custom_schedule({s, sp}));
            return sample_dpm(eps, NlcSource::off(), dpm, dim, rng).steps[1].x;
        },
        [&](double s, double sp, Rng& rng) {
            const Vec64 x = baseline::init_edm(s, dim, rng);
            return baseline::dpm2_step(eps, x, s, sp);
        });

    stepwise(
        "ddnm",
        [&](double s, double sp, Rng& rng) {
            SamplerConfig c = off;
            c.eta = 1.0;
            return sample_ddnm(eps, NlcSource::off(), make_custom_schedule({s, sp}), op, y, c, rng)
                .steps[1]
                .x;
        },
        [&](double s, double sp, Rng& rng) {
            const Vec64 x = baseline::init_vp(s, dim, rng);
            return baseline::ddnm_step(eps, x, s, sp, op.a, op.a_pinv, y, 1.0, rng);
        });
}

// ---------------------------------------------------------------------------
// criterion 2: analytic gradients of both objectives vs central differences
// ---------------------------------------------------------------------------

void criterion_gradients() {
    const double h = 1e-5;
    Rng rng(51);
    const std::vector<std::vector<uint32_t>> hidden_stacks = {
        {}, {16}, {12, 12}, {32}, {8, 8, 8}};
    double worst = 0.0;
    size_t probes = 0;
    int shape_id = 0;
    for (const auto& stack : hidden_stacks) {
        const uint32_t n = 5 + 2 * shape_id;
        Dataset data;
        {
            Rng drng(60 + shape_id);
            const ManifoldSpec spec = make_manifold_spec(n, 1, 2, 1e-3, drng);
            data = generate_dataset(spec, 32, drng);
        }
        std::vector<const Vec64*> batch;
        for (size_t i = 0; i < 8; ++i) {
            batch.push_back(&data.points[i]);
        }
        const NoiseSchedule schedule = make_custom_schedule({3.0, 1.0, 0.2});
        const uint64_t draw_seed = 70 + shape_id;

        for (const bool denoiser : {true, false}) {
            std::vector<uint32_t> dims = {n + 1};
            dims.insert(dims.end(), stack.begin(), stack.end());
            dims.push_back(denoiser ? n : 1);
            MlpNet net =
                make_mlp(denoiser ? NetRole::denoiser : NetRole::corrector, dims, rng);
            auto loss_at = [&] {
                Rng lrng(draw_seed);
                return denoiser ? denoiser_loss_and_grads(net, batch, schedule, lrng, nullptr)
                                : nlc_loss_and_grads(net, batch, schedule, 0.5, lrng, nullptr);
            };
            Grads grads = make_grads(net);
            {
                Rng lrng(draw_seed);
                if (denoiser) {
                    denoiser_loss_and_grads(net, batch, schedule, lrng, &grads);
                } else {
                    nlc_loss_and_grads(net, batch, schedule, 0.5, lrng, &grads);
                }
            }
            for (int probe = 0; probe < 100; ++probe) {
                const size_t idx = rng.uniform_index(net.param_count());
                const double saved = get_param(net, idx);
                set_param(net, idx, saved + h);
                const double up = loss_at();
                set_param(net, idx, saved - h);
                const double down = loss_at();
                set_param(net, idx, saved);
                const double fd = (up - down) / (2.0 * h);
                const double an = get_grad(grads, idx);
                // coordinates below the h=1e-5 noise floor are held absolutely
                const double scale =
                    std::max({std::fabs(fd), std::fabs(an), 1e-3 * std::max(1.0, std::fabs(up))});
                worst = std::max(worst, std::fabs(fd - an) / scale);
                ++probes;
            }
        }
        ++shape_id;
    }
    report(2, "gradient oracle on both losses", worst <= 1e-6,
           fmt(double(probes)) + " probes, worst rel err " + fmt(worst));
}

// ---------------------------------------------------------------------------
// criteria 3, 4, 8, 6: the toy experiment
// ---------------------------------------------------------------------------

struct ArmStats {
    double final_dist_mean = 0.0;
    std::vector<double> mean_abs_bias;   // per step with sigma > 0
    std::vector<double> mean_violation;  // constrained: per step |A x_t - y|
};

ArmStats run_arm(const TrajectoryFactory& factory, const ManifoldSpec& spec, size_t seeds,
                 uint64_t base_seed, ThreadPool& pool) {
    struct PerSeed {
        double final_dist = 0.0;
        std::vector<double> abs_bias;
        std::vector<double> violation;
    };
    std::vector<PerSeed> rows(seeds);
    const Rng parent(base_seed);
    pool.run_chunks(seeds, [&](size_t i) {
        Rng rng = parent.fork(i);
        Trajectory traj = factory(i, rng);
        annotate_with_oracle(traj, spec);
        rows[i].final_dist = traj.steps.back().dist;
        for (const auto& step : traj.steps) {
            if (step.sigma > 0.0) {
                rows[i].abs_bias.push_back(std::fabs(step.bias));
                rows[i].violation.push_back(step.state_violation);
            }
        }
    });
    ArmStats stats;
    stats.mean_abs_bias.assign(rows.front().abs_bias.size(), 0.0);
    stats.mean_violation.assign(rows.front().violation.size(), 0.0);
    for (const auto& row : rows) {
        stats.final_dist_mean += row.final_dist;
        for (size_t i = 0; i < row.abs_bias.size(); ++i) {
            stats.mean_abs_bias[i] += row.abs_bias[i];
        }
        for (size_t i = 0; i < row.violation.size(); ++i) {
            stats.mean_violation[i] += row.violation[i];
        }
    }
    stats.final_dist_mean /= double(seeds);
    for (auto& v : stats.mean_abs_bias) {
        v /= double(seeds);
    }
    for (auto& v : stats.mean_violation) {
        v /= double(seeds);
    }
    return stats;
}

void criterion_toy() {
    // pinned toy configuration and budgets
    Rng data_rng(1);
    const ManifoldSpec spec = make_manifold_spec(100, 1, 4, 1e-3, data_rng);
    const Dataset data = generate_dataset(spec, 10000, data_rng);
    const NoiseSchedule train_grid = build_ddpm_schedule(1000, 1e-4, 0.02);
    const NoiseSchedule ten = subsample(train_grid, 10);

    TrainConfig den_cfg;
    den_cfg.iterations = 20000;
    den_cfg.batch_size = 128;
    den_cfg.lr = 1e-3;
    den_cfg.seed = 2;
    const TrainResult den = train(NetRole::denoiser, data, train_grid, den_cfg);

    TrainConfig cor_cfg;
    cor_cfg.iterations = 12000;
    cor_cfg.batch_size = 128;
    cor_cfg.lr = 1e-3;
    cor_cfg.delta = 0.5;
    cor_cfg.seed = 3;
    const TrainResult cor = train(NetRole::corrector, data, train_grid, cor_cfg);

    // training-curve sanity: late loss clearly below the early plateau
    {
        const auto& losses = den.report.losses;
        const bool pass = losses.back() < 0.5 * losses.front();
        report(3, "denoiser training curve drops 2x",
               pass, fmt(losses.front()) + " -> " + fmt(losses.back()));
    }

    const DenoiserFn eps = make_denoiser_fn(den.net);
    const CorrectorFn r_fn = make_corrector_fn(cor.net);

    // lookup table from corrected sampling runs
    std::vector<std::pair<double, double>> records;
    {
        SamplerConfig cfg;
        cfg.algo = SamplerAlgo::ddim;
        cfg.normalize_direction = true;
        const NlcSource source = NlcSource::network(r_fn);
        const Rng parent(4);
        for (size_t i = 0; i < 64; ++i) {
            Rng rng = parent.fork(i);
            const Trajectory traj = sample_ddim_ddpm(eps, source, ten, cfg, spec.n, rng);
            for (const auto& step : traj.steps) {
                if (step.sigma > 0.0) {
                    records.emplace_back(step.sigma, step.r);
                }
            }
        }
    }
    const LookupTable lut = build_lookup_table(records, 64);

    ThreadPool pool(0);
    const size_t seeds = 256;

    auto unconstrained_arm = [&](const NlcSource& source, bool normalize) {
        SamplerConfig cfg;
        cfg.algo = SamplerAlgo::ddim;
        cfg.eta = 0.0;
        cfg.normalize_direction = normalize;
        return run_arm(
            [&, cfg](size_t, Rng& rng) {
                return sample_ddim_ddpm(eps, source, ten, cfg, spec.n, rng);
            },
            spec, seeds, 5, pool);
    };

    const ArmStats base = unconstrained_arm(NlcSource::off(), false);
    const ArmStats nlc = unconstrained_arm(NlcSource::network(r_fn), true);
    const ArmStats lt = unconstrained_arm(NlcSource::lut(&lut), true);

    report(3, "10-step ddim-nlc beats ddim by >= 20% on final distance",
           nlc.final_dist_mean <= 0.8 * base.final_dist_mean,
           fmt(base.final_dist_mean) + " vs " + fmt(nlc.final_dist_mean));

    {
        bool pass = true;
        std::string detail;
        const size_t len = base.mean_abs_bias.size();
        for (size_t i = len - 3; i < len; ++i) {
            pass = pass && nlc.mean_abs_bias[i] < base.mean_abs_bias[i];
            detail += fmt(nlc.mean_abs_bias[i]) + "<" + fmt(base.mean_abs_bias[i]) + " ";
        }
        report(4, "ddim-nlc mean |bias| lower on the last 3 steps", pass, detail);
    }

    {
        bool exact = true;
        for (size_t b = 0; b < lut.bins(); ++b) {
            if (lut.counts[b] > 0 &&
                std::fabs(lut.query(lut.center(b)) - lut.mean_r[b]) > 1e-12) {
                exact = false;
            }
        }
        const bool between = lt.final_dist_mean <= base.final_dist_mean &&
                             lt.final_dist_mean >= nlc.final_dist_mean;
        report(8, "lut reproduces bin means; lt-nlc lands between ddim and ddim-nlc",
               exact && between,
               "ddim " + fmt(base.final_dist_mean) + " >= lt " + fmt(lt.final_dist_mean) +
                   " >= nlc " + fmt(nlc.final_dist_mean));
    }

    // criterion 5 uses the same manifold
    {
        bool pass = true;
        std::string detail;
        const Rng parent(8);
        size_t i = 0;
        for (double sigma_T : {5.0, 10.0, 50.0}) {
            Rng rng = parent.fork(i++);
            const InitialDistanceStats stats = initial_distance_check(spec, sigma_T, 500, rng);
            pass = pass && stats.exceeds_threshold;
            detail += "s" + fmt(sigma_T) + ":" + fmt(stats.mean_dist_sq / stats.threshold) + "x ";
        }
        report(5, "mean dist(x_T)^2 exceeds n sigma_T^2 at sigma_T in {5,10,50}", pass, detail);
    }

    // criterion 6: constrained arms under A in R^{1x100}, b = 0
    Rng op_rng(7);
    const LinearOperator op = make_random_row_operator(1, spec.n, op_rng);
    const Vec64 y(1, 0.0);

    auto ddnm_arm = [&](const NlcSource& source, bool normalize) {
        SamplerConfig cfg;
        cfg.eta = 0.0;
        cfg.normalize_direction = normalize;
        return run_arm(
            [&, cfg](size_t, Rng& rng) {
                return sample_ddnm(eps, source, ten, op, y, cfg, rng);
            },
            spec, seeds, 6, pool);
    };
    const ArmStats ddnm_base = ddnm_arm(NlcSource::off(), false);
    const ArmStats ddnm_nlc = ddnm_arm(NlcSource::network(r_fn), true);

    auto mean_tail3 = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (size_t i = v.size() - 3; i < v.size(); ++i) {
            acc += v[i];
        }
        return acc / 3.0;
    };
    {
        const bool dist_better = ddnm_nlc.final_dist_mean < ddnm_base.final_dist_mean;
        // the early steps are dominated by the shared init, so the consistency
        // comparison is made where the methods act: the last 3 live steps
        const double cons_base = mean_tail3(ddnm_base.mean_violation);
        const double cons_nlc = mean_tail3(ddnm_nlc.mean_violation);
        report(6, "ddnm-nlc beats ddnm on final distance and late-step |Ax - b|",
               dist_better && cons_nlc < cons_base,
               "dist " + fmt(ddnm_nlc.final_dist_mean) + "<" + fmt(ddnm_base.final_dist_mean) +
                   ", |Ax-b| " + fmt(cons_nlc) + "<" + fmt(cons_base));
    }

    // IterProj-NLC: feasibility at every iteration and the head-to-head
    {
        IterProjConfig ip;
        ip.max_iterations = 400;
        ip.stop_tol = 0.0;
        const NlcSource source = NlcSource::network(r_fn);
        const double op_scale = std::sqrt(norm_sq(op.a.data));
        std::vector<double> final_dists(seeds);
        std::vector<uint8_t> feasible(seeds, 1);
        const Rng parent(6);
        pool.run_chunks(seeds, [&](size_t i) {
            Rng rng = parent.fork(i);
            const IterProjResult result = iterproj(eps, source, op, y, ip, rng);
            for (const auto& step : result.trajectory.steps) {
                const double rel_tol = 1e-8 * std::max(1.0, op_scale * norm(step.x));
                if (step.consistency > rel_tol) {
                    feasible[i] = 0;
                }
            }
            final_dists[i] = exact_distance(spec, result.sample);
        });
        bool all_feasible = true;
        double mean_dist = 0.0;
        for (size_t i = 0; i < seeds; ++i) {
            all_feasible = all_feasible && feasible[i] == 1;
            mean_dist += final_dists[i];
        }
        mean_dist /= double(seeds);
        report(6, "iterproj-nlc feasible at every iteration and at least ddnm-nlc quality",
               all_feasible && mean_dist <= ddnm_nlc.final_dist_mean,
               "mean dist " + fmt(mean_dist) + " vs ddnm-nlc " + fmt(ddnm_nlc.final_dist_mean) +
                   (all_feasible ? ", all feasible" : ", FEASIBILITY VIOLATED"));
    }
}

// ---------------------------------------------------------------------------
// criterion 7: projection algebra
// ---------------------------------------------------------------------------

void criterion_projection_algebra() {
    Rng rng(71);
    double worst_mp = 0.0;
    double worst_proj = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const uint32_t rows = 1 + rng.uniform_index(20);
        const LinearOperator op = make_random_row_operator(rows, 100, rng);
        const Mat64 apa = matmul(matmul(op.a, op.a_pinv), op.a);
        worst_mp = std::max(worst_mp, max_abs_diff(apa, op.a));
        const Mat64 pap = matmul(matmul(op.a_pinv, op.a), op.a_pinv);
        worst_mp = std::max(worst_mp, max_abs_diff(pap, op.a_pinv));
        const Mat64 ap = matmul(op.a, op.a_pinv);
        worst_mp = std::max(worst_mp, max_abs_diff(ap, transpose(ap)));
        const Mat64 pa = matmul(op.a_pinv, op.a);
        worst_mp = std::max(worst_mp, max_abs_diff(pa, transpose(pa)));

        const Vec64 y = gaussian_vec(rng, rows);
        const Vec64 x_hat = gaussian_vec(rng, 100);
        const Vec64 proj = project_constraint(op, y, x_hat);
        const double violation = norm(sub(apply_operator(op, proj), y));
        const double scale =
            std::max(1.0, std::sqrt(norm_sq(op.a.data)) * norm(x_hat) + norm(y));
        worst_proj = std::max(worst_proj, violation / scale);
    }
    report(7, "Moore-Penrose identities and projection feasibility on 50 operators",
           worst_mp <= 1e-8 && worst_proj <= 1e-8,
           "worst identity dev " + fmt(worst_mp) + ", worst rel violation " + fmt(worst_proj));
}

// ---------------------------------------------------------------------------
// criterion 9: byte-identical artifacts for every command
// ---------------------------------------------------------------------------

int shell(const std::string& args) {
    const std::string cmd = "NLC_LOG=quiet " NLC_CLI_PATH " " + args + " >/dev/null 2>/dev/null";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

void criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "nlc_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto p = [&](const std::string& name) { return (dir / name).string(); };

    bool pass = true;
    std::string detail = "all commands byte-identical";
    // run each command twice against the same output paths, snapshotting the
    // artifact bytes in between
    auto run_twice = [&](const std::string& name, const std::string& args,
                         const std::vector<std::string>& outputs) {
        if (!pass) {
            return;
        }
        if (shell(args) != 0) {
            pass = false;
            detail = name + " exited nonzero";
            return;
        }
        std::vector<std::string> snapshot;
        for (const auto& out : outputs) {
            snapshot.push_back(read_file(p(out)));
        }
        if (shell(args) != 0) {
            pass = false;
            detail = name + " exited nonzero on rerun";
            return;
        }
        for (size_t i = 0; i < outputs.size(); ++i) {
            if (read_file(p(outputs[i])) != snapshot[i]) {
                pass = false;
                detail = name + " produced differing " + outputs[i];
                return;
            }
        }
    };

    run_twice("gen-data",
              "gen-data --n 12 --d 1 --m 2 --count 400 --seed 3 --out " + p("d.nlcd"),
              {"d.nlcd", "d.nlcd.json"});
    run_twice("train-denoiser",
              "train-denoiser --data " + p("d.nlcd") + " --out " + p("den.nlcn") +
                  " --iterations 150 --batch 16 --layers 2 --hidden 16 --seed 4 --jobs 2"
                  " --report " + p("rep.json") + " --loss-csv " + p("loss.csv"),
              {"den.nlcn", "rep.json", "loss.csv"});
    run_twice("train-nlc",
              "train-nlc --data " + p("d.nlcd") + " --denoiser " + p("den.nlcn") + " --out " +
                  p("cor.nlcn") + " --iterations 100 --batch 16 --hidden 16 --seed 5 --jobs 2",
              {"cor.nlcn"});
    run_twice("build-lut",
              "build-lut --data " + p("d.nlcd") + " --denoiser " + p("den.nlcn") +
                  " --corrector " + p("cor.nlcn") + " --steps 5 --num-seeds 6 --seed 6 --out " +
                  p("lut.json"),
              {"lut.json"});
    run_twice("sample",
              "sample --data " + p("d.nlcd") + " --denoiser " + p("den.nlcn") +
                  " --algo ddim --steps 5 --nlc network --corrector " + p("cor.nlcn") +
                  " --num-seeds 4 --seed 7 --jobs 2 --out-prefix " + p("s_"),
              {"s_summary.json", "s_traj0.csv"});
    run_twice("restore",
              "restore --data " + p("d.nlcd") + " --denoiser " + p("den.nlcn") +
                  " --algo iterproj --op random-row --op-rows 1 --op-seed 8 --ip-max-iters 20"
                  " --num-seeds 4 --seed 9 --jobs 2 --out-prefix " + p("r_") + " --save-op " +
                  p("op.bin"),
              {"r_summary.json", "r_restore0.csv", "op.bin", "op.bin.json"});
    run_twice("eval",
              "eval --data " + p("d.nlcd") + " --sigmas 5,10 --samples 150 --seed 10 --out " +
                  p("e.json"),
              {"e.json"});
    run_twice("report",
              "report --inputs " + p("s_summary.json") + " " + p("r_summary.json") +
                  " --out " + p("c.json") + " --plot-csv " + p("plot.csv"),
              {"c.json", "plot.csv"});

    report(9, "every command is byte-deterministic under a fixed seed", pass, detail);
    fs::remove_all(dir);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_reduction();
    criterion_gradients();
    criterion_projection_algebra();
    criterion_determinism();
    criterion_toy();
    std::printf("%s (%d failing)\n", g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
