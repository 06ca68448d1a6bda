#include "nlc/training.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "nlc/io.hpp"

namespace nlc {

namespace {

// Fixed reduction chunk so results are identical for any worker count.
constexpr size_t kChunk = 32;

struct ChunkResult {
    double loss = 0.0;
    Grads grads;
};

size_t sample_dim(const MlpNet& net) {
    return net.dims.front() - 1;
}

void check_batch(const MlpNet& net, const std::vector<const Vec64*>& batch) {
    require(!batch.empty(), ErrorKind::invalid_range, "loss: empty batch");
    for (const Vec64* x0 : batch) {
        require(x0 != nullptr && x0->size() == sample_dim(net), ErrorKind::dim_mismatch,
                "loss: sample dim does not match net input");
    }
}

double reduce_chunks(const MlpNet& net, size_t batch_size, Grads* grads, ThreadPool* pool,
                     const std::function<void(size_t, size_t, size_t, ChunkResult&)>& run) {
    const size_t num_chunks = (batch_size + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(num_chunks);
    auto body = [&](size_t c) {
        const size_t begin = c * kChunk;
        const size_t end = std::min(batch_size, begin + kChunk);
        if (grads != nullptr) {
            results[c].grads = make_grads(net);
        }
        run(c, begin, end, results[c]);
    };
    if (pool != nullptr) {
        pool->run_chunks(num_chunks, body);
    } else {
        for (size_t c = 0; c < num_chunks; ++c) {
            body(c);
        }
    }
    double loss = 0.0;
    for (size_t c = 0; c < num_chunks; ++c) {
        loss += results[c].loss;
        if (grads != nullptr) {
            grads->add(results[c].grads);
        }
    }
    return loss / double(batch_size);
}

}  // namespace

std::vector<uint32_t> mlp_dims(NetRole role, uint32_t n, uint32_t layers, uint32_t hidden) {
    if (layers == 0) {
        layers = role == NetRole::denoiser ? 5 : 2;
    }
    require(layers >= 1 && hidden >= 1, ErrorKind::invalid_range, "mlp_dims: bad layer spec");
    std::vector<uint32_t> dims;
    dims.push_back(n + 1);
    for (uint32_t l = 0; l + 1 < layers; ++l) {
        dims.push_back(hidden);
    }
    dims.push_back(role == NetRole::denoiser ? n : 1);
    return dims;
}

double denoiser_loss_and_grads(const MlpNet& net, const std::vector<const Vec64*>& batch,
                               const NoiseSchedule& schedule, Rng& rng, Grads* grads,
                               ThreadPool* pool) {
    require(net.role == NetRole::denoiser, ErrorKind::config_invalid,
            "denoiser loss: net role must be denoiser");
    check_batch(net, batch);
    const size_t n = sample_dim(net);
    const size_t batch_size = batch.size();

    // One salt per call; sample i draws (t, eps) from fork(i), so the batch
    // randomness is independent of chunking and worker count.
    const Rng base(rng.next_u64());

    return reduce_chunks(net, batch_size, grads, pool,
                         [&](size_t, size_t begin, size_t end, ChunkResult& out) {
        const size_t rows = end - begin;
        Mat64 chunk_in(rows, n + 1);
        Mat64 targets(rows, n);
        for (size_t i = 0; i < rows; ++i) {
            Rng sample_rng = base.fork(begin + i);
            const size_t t = sample_rng.uniform_index(schedule.steps());
            const double sigma = schedule.sigma(t);
            const double scale = input_scale(sigma);
            const Vec64& x0 = *batch[begin + i];
            double* in_row = chunk_in.row(i);
            double* eps_row = targets.row(i);
            for (size_t j = 0; j < n; ++j) {
                const double eps = sample_rng.gaussian();
                eps_row[j] = eps;
                in_row[j] = (x0[j] + sigma * eps) * scale;
            }
            in_row[n] = std::log(sigma);
        }
        ForwardCache cache;
        Mat64 pred = forward_batch(net, chunk_in, grads != nullptr ? &cache : nullptr);
        Mat64 upstream(rows, n);
        const double grad_scale = 2.0 / double(batch_size);
        for (size_t i = 0; i < rows; ++i) {
            const double* eps_row = targets.row(i);
            const double* pred_row = pred.row(i);
            double* up_row = upstream.row(i);
            for (size_t j = 0; j < n; ++j) {
                const double resid = pred_row[j] - eps_row[j];
                out.loss += resid * resid;
                up_row[j] = grad_scale * resid;
            }
        }
        if (grads != nullptr) {
            backward_batch(net, cache, upstream, out.grads);
        }
    });
}

double nlc_loss_and_grads(const MlpNet& net, const std::vector<const Vec64*>& batch,
                          const NoiseSchedule& schedule, double delta, Rng& rng, Grads* grads,
                          ThreadPool* pool) {
    require(net.role == NetRole::corrector, ErrorKind::config_invalid,
            "nlc loss: net role must be corrector");
    require(delta >= 0.0 && delta < 1.0, ErrorKind::invalid_range, "nlc loss: delta not in [0,1)");
    check_batch(net, batch);
    const size_t n = sample_dim(net);
    const size_t batch_size = batch.size();
    const double sqrt_n = std::sqrt(double(n));

    const Rng base(rng.next_u64());

    return reduce_chunks(net, batch_size, grads, pool,
                         [&](size_t, size_t begin, size_t end, ChunkResult& out) {
        const size_t rows = end - begin;
        Mat64 chunk_in(rows, n + 1);
        Vec64 sigmas(rows);
        Vec64 true_levels(rows);  // sigma * lambda * |eps|
        for (size_t i = 0; i < rows; ++i) {
            // per sample: t, lambda, then the noise vector
            Rng sample_rng = base.fork(begin + i);
            const size_t t = sample_rng.uniform_index(schedule.steps());
            const double sigma = schedule.sigma(t);
            const double lambda =
                delta > 0.0 ? sample_rng.uniform(1.0 - delta, 1.0 + delta) : 1.0;
            const double scale = input_scale(sigma);
            const Vec64& x0 = *batch[begin + i];
            double* in_row = chunk_in.row(i);
            double eps_norm_sq = 0.0;
            for (size_t j = 0; j < n; ++j) {
                const double eps = sample_rng.gaussian();
                eps_norm_sq += eps * eps;
                in_row[j] = (x0[j] + sigma * lambda * eps) * scale;
            }
            in_row[n] = std::log(sigma);
            sigmas[i] = sigma;
            true_levels[i] = sigma * lambda * std::sqrt(eps_norm_sq);
        }
        ForwardCache cache;
        Mat64 pred = forward_batch(net, chunk_in, grads != nullptr ? &cache : nullptr);
        Mat64 upstream(rows, 1);
        const double grad_scale = 2.0 / double(batch_size);
        for (size_t i = 0; i < rows; ++i) {
            const double sigma = sigmas[i];
            const double r = pred.at(i, 0);
            const double resid = sqrt_n * sigma * (1.0 + r) - true_levels[i];
            out.loss += resid * resid;
            upstream.at(i, 0) = grad_scale * resid * sqrt_n * sigma;
        }
        if (grads != nullptr) {
            backward_batch(net, cache, upstream, out.grads);
        }
    });
}

TrainResult train(NetRole role, const Dataset& dataset, const NoiseSchedule& schedule,
                  const TrainConfig& config) {
    require(config.batch_size >= 1, ErrorKind::invalid_range, "train: batch_size must be >= 1");
    require(config.iterations >= 1, ErrorKind::invalid_range, "train: iterations must be >= 1");
    require(config.delta >= 0.0 && config.delta < 1.0, ErrorKind::invalid_range,
            "train: delta not in [0,1)");
    require(!dataset.points.empty(), ErrorKind::invalid_range, "train: empty dataset");

    const auto start = std::chrono::steady_clock::now();
    Rng master(config.seed);
    Rng init_rng = master.fork(0);
    Rng batch_rng = master.fork(1);

    TrainResult result;
    result.net = make_mlp(role, mlp_dims(role, dataset.spec.n, config.num_layers,
                                         config.hidden_dim), init_rng);
    result.adam = make_adam(result.net, config.lr);
    result.report.seed = config.seed;

    ThreadPool pool(config.jobs);
    Grads grads = make_grads(result.net);
    std::vector<const Vec64*> batch(config.batch_size);
    double loss = 0.0;
    for (uint64_t iter = 1; iter <= config.iterations; ++iter) {
        for (auto& slot : batch) {
            slot = &dataset.points[batch_rng.uniform_index(dataset.points.size())];
        }
        grads.zero();
        if (role == NetRole::denoiser) {
            loss = denoiser_loss_and_grads(result.net, batch, schedule, batch_rng, &grads, &pool);
        } else {
            loss = nlc_loss_and_grads(result.net, batch, schedule, config.delta, batch_rng,
                                      &grads, &pool);
        }
        require(std::isfinite(loss), ErrorKind::non_finite_gradient, "train: loss diverged");
        adam_step(result.adam, result.net, grads);
        if (iter % config.report_interval == 0) {
            result.report.iters.push_back(iter);
            result.report.losses.push_back(loss);
            log_debug("iter " + std::to_string(iter) + " loss " + format_double(loss));
        }
    }
    result.report.final_loss = loss;
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log_info("trained " + std::string(role == NetRole::denoiser ? "denoiser" : "corrector") +
             ": " + std::to_string(config.iterations) + " iterations, final loss " +
             format_double(loss) + " (" + format_double(result.report.wall_seconds) + "s)");
    return result;
}

void save_train_report(const TrainReport& report, const std::string& path) {
    nlohmann::json j = {
        {"seed", report.seed},
        {"final_loss", report.final_loss},
        {"checkpoint", report.checkpoint_path},
        {"iters", report.iters},
        {"losses", report.losses},
    };
    write_file_atomic(path, j.dump(2) + "\n");
}

void save_loss_csv(const TrainReport& report, const std::string& path) {
    std::string csv = "iteration,loss\n";
    for (size_t i = 0; i < report.iters.size(); ++i) {
        csv += std::to_string(report.iters[i]) + "," + format_double(report.losses[i]) + "\n";
    }
    write_file_atomic(path, csv);
}

}  // namespace nlc
