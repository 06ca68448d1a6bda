// Command-line front end for the diffusion sampling laboratory: data
// generation, training, lookup-table building, sampling, restoration,
// evaluation and reporting. Every command is deterministic under --seed and
// writes its artifacts atomically.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlc/constrained.hpp"
#include "nlc/experiment.hpp"
#include "nlc/io.hpp"
#include "nlc/linalg.hpp"
#include "nlc/manifold.hpp"
#include "nlc/net.hpp"
#include "nlc/sampler.hpp"
#include "nlc/schedule.hpp"
#include "nlc/training.hpp"

namespace {

using namespace nlc;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config_invalid:
        case ErrorKind::invalid_range:
            return 2;
        case ErrorKind::io:
        case ErrorKind::version_mismatch:
        case ErrorKind::corrupt_payload:
            return 3;
        default:
            return 1;
    }
}

void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
}

void check_input(const std::string& path, const std::string& flag) {
    require(file_exists(path), ErrorKind::config_invalid,
            flag + " does not exist: " + path);
}

// --- shared option bundles ---

struct ScheduleOpts {
    std::string family = "ddpm";
    int train_T = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double rho = 7.0;
    int steps = 10;

    void attach(CLI::App* cmd, bool with_steps) {
        cmd->add_option("--schedule-family", family, "ddpm | edm")
            ->check(CLI::IsMember({"ddpm", "edm"}));
        cmd->add_option("--schedule-T", train_T, "base grid size of the linear-beta schedule");
        cmd->add_option("--beta-min", beta_min, "linear-beta start");
        cmd->add_option("--beta-max", beta_max, "linear-beta end");
        cmd->add_option("--sigma-min", sigma_min, "edm schedule floor");
        cmd->add_option("--sigma-max", sigma_max, "edm schedule ceiling");
        cmd->add_option("--rho", rho, "edm interpolation exponent");
        if (with_steps) {
            cmd->add_option("--steps", steps, "sampling steps");
        }
    }

    NoiseSchedule training_schedule() const {
        return build_ddpm_schedule(train_T, beta_min, beta_max);
    }

    NoiseSchedule sampling_schedule() const {
        if (family == "edm") {
            return build_edm_schedule(steps, sigma_min, sigma_max, rho);
        }
        NoiseSchedule full = build_ddpm_schedule(train_T, beta_min, beta_max);
        if (steps == train_T) {
            return full;
        }
        return subsample(full, steps);
    }
};

struct NlcOpts {
    std::string mode = "off";
    std::string corrector_path;
    std::string lut_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--nlc", mode, "off | network | lut")
            ->check(CLI::IsMember({"off", "network", "lut"}));
        cmd->add_option("--corrector", corrector_path, "corrector checkpoint (network mode)");
        cmd->add_option("--lut", lut_path, "lookup table json (lut mode)");
    }

    void validate() const {
        if (mode == "network") {
            require(!corrector_path.empty(), ErrorKind::config_invalid,
                    "--nlc network requires --corrector");
            check_input(corrector_path, "--corrector");
        }
        if (mode == "lut") {
            require(!lut_path.empty(), ErrorKind::config_invalid, "--nlc lut requires --lut");
            check_input(lut_path, "--lut");
        }
    }
};

// Owns whatever the NlcSource points into.
struct NlcBundle {
    MlpNet corrector;
    LookupTable table;
    NlcSource source = NlcSource::off();
};

NlcBundle load_nlc(const NlcOpts& opts, uint32_t n) {
    NlcBundle bundle;
    if (opts.mode == "network") {
        Checkpoint ck = load_checkpoint(opts.corrector_path);
        require(ck.net.role == NetRole::corrector, ErrorKind::config_invalid,
                "--corrector checkpoint does not hold a corrector");
        require(ck.net.dims.front() == n + 1, ErrorKind::config_invalid,
                "--corrector input dim does not match the dataset dimension");
        bundle.corrector = std::move(ck.net);
    } else if (opts.mode == "lut") {
        bundle.table = load_lookup_table(opts.lut_path);
    }
    return bundle;
}

// The source must be built after the bundle stops moving.
NlcSource bundle_source(const NlcBundle& bundle, const NlcOpts& opts) {
    if (opts.mode == "network") {
        const MlpNet* net = &bundle.corrector;
        return NlcSource::network(
            [net](const Vec64& x, double s) { return corrector_eval(*net, x, s); });
    }
    if (opts.mode == "lut") {
        return NlcSource::lut(&bundle.table);
    }
    return NlcSource::off();
}

MlpNet load_denoiser(const std::string& path, uint32_t n) {
    Checkpoint ck = load_checkpoint(path);
    require(ck.net.role == NetRole::denoiser, ErrorKind::config_invalid,
            "--denoiser checkpoint does not hold a denoiser");
    require(ck.net.dims.front() == n + 1 && ck.net.dims.back() == n, ErrorKind::config_invalid,
            "--denoiser dims do not match the dataset dimension");
    return std::move(ck.net);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stod(item));
        }
    }
    require(!out.empty(), ErrorKind::config_invalid, "empty numeric list: " + text);
    return out;
}

Vec64 read_vector_file(const std::string& path, size_t expected) {
    std::stringstream ss(read_file(path));
    Vec64 out;
    double v = 0.0;
    while (ss >> v) {
        out.push_back(v);
    }
    require(out.size() == expected, ErrorKind::config_invalid,
            "vector file " + path + " holds " + std::to_string(out.size()) + " values, expected " +
                std::to_string(expected));
    return out;
}

// --- commands ---

struct GenDataCmd {
    uint32_t n = 100, d = 1, m = 4;
    uint32_t count = 10000;
    double noise_std = 1e-3;
    uint64_t seed = 1;
    std::string out;

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand("gen-data", "generate a sphere-union dataset");
        cmd->add_option("--n", n, "ambient dimension");
        cmd->add_option("--d", d, "sphere dimension");
        cmd->add_option("--m", m, "number of rotated branches");
        cmd->add_option("--count", count, "number of samples");
        cmd->add_option("--noise-std", noise_std, "training jitter std");
        cmd->add_option("--seed", seed, "rng seed");
        cmd->add_option("--out", out, "output dataset path")->required();
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    int run() const {
        ensure_parent_dir(out);
        Rng rng(seed);
        const ManifoldSpec spec = make_manifold_spec(n, d, m, noise_std, rng);
        const Dataset data = generate_dataset(spec, count, rng);
        save_dataset(data, out);
        log_info("wrote dataset " + out + " (" + std::to_string(count) + " points)");
        return 0;
    }
};

struct TrainCmd {
    NetRole role;
    std::string data_path, out_path, denoiser_path, report_path, loss_csv_path;
    TrainConfig config;
    ScheduleOpts schedule;

    explicit TrainCmd(NetRole r) : role(r) {
        config.iterations = r == NetRole::denoiser ? 50000 : 20000;
    }

    void attach(CLI::App& app, std::function<int()>& action) {
        const bool denoiser = role == NetRole::denoiser;
        auto* cmd = app.add_subcommand(denoiser ? "train-denoiser" : "train-nlc",
                                       denoiser ? "train the denoiser network"
                                                : "train the noise-level-correction network");
        cmd->add_option("--data", data_path, "dataset path")->required();
        cmd->add_option("--out", out_path, "checkpoint output path")->required();
        cmd->add_option("--iterations", config.iterations, "training iterations");
        cmd->add_option("--batch", config.batch_size, "batch size");
        cmd->add_option("--lr", config.lr, "Adam learning rate");
        cmd->add_option("--seed", config.seed, "rng seed");
        cmd->add_option("--layers", config.num_layers, "weight layers (0 = role default)");
        cmd->add_option("--hidden", config.hidden_dim, "hidden width");
        cmd->add_option("--report-interval", config.report_interval, "loss recording interval");
        cmd->add_option("--jobs", config.jobs, "worker threads (0 = hardware)");
        cmd->add_option("--report", report_path, "write a training report json");
        cmd->add_option("--loss-csv", loss_csv_path, "write the loss curve as csv");
        if (!denoiser) {
            cmd->add_option("--delta", config.delta, "lambda-perturbation half-width");
            cmd->add_option("--denoiser", denoiser_path,
                            "frozen denoiser checkpoint (pipeline prerequisite)")
                ->required();
        }
        schedule.attach(cmd, false);
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    int run() const {
        check_input(data_path, "--data");
        const Dataset data = load_dataset(data_path);
        if (role == NetRole::corrector) {
            check_input(denoiser_path, "--denoiser");
            (void)load_denoiser(denoiser_path, data.spec.n);
        }
        const NoiseSchedule sched = schedule.training_schedule();
        TrainResult result = train(role, data, sched, config);

        ensure_parent_dir(out_path);
        Checkpoint ck;
        ck.net = std::move(result.net);
        ck.adam = std::move(result.adam);
        ck.seed = config.seed;
        ck.iterations = config.iterations;
        ck.final_loss = result.report.final_loss;
        save_checkpoint(ck, out_path);
        result.report.checkpoint_path = out_path;
        if (!report_path.empty()) {
            ensure_parent_dir(report_path);
            save_train_report(result.report, report_path);
        }
        if (!loss_csv_path.empty()) {
            ensure_parent_dir(loss_csv_path);
            save_loss_csv(result.report, loss_csv_path);
        }
        log_info("wrote checkpoint " + out_path);
        return 0;
    }
};

struct BuildLutCmd {
    std::string data_path, denoiser_path, corrector_path, out_path;
    ScheduleOpts schedule;
    uint32_t num_seeds = 64;
    int bins = 64;
    uint64_t seed = 1;

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand(
            "build-lut", "record corrector residuals over corrected sampling runs");
        cmd->add_option("--data", data_path, "dataset path")->required();
        cmd->add_option("--denoiser", denoiser_path, "denoiser checkpoint")->required();
        cmd->add_option("--corrector", corrector_path, "corrector checkpoint")->required();
        cmd->add_option("--out", out_path, "lookup table json output")->required();
        cmd->add_option("--num-seeds", num_seeds, "sampling runs to record");
        cmd->add_option("--bins", bins, "log-spaced sigma bins");
        cmd->add_option("--seed", seed, "rng seed");
        schedule.attach(cmd, true);
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    int run() const {
        check_input(data_path, "--data");
        check_input(denoiser_path, "--denoiser");
        check_input(corrector_path, "--corrector");
        const Dataset data = load_dataset(data_path);
        const MlpNet denoiser = load_denoiser(denoiser_path, data.spec.n);
        NlcOpts nlc_opts;
        nlc_opts.mode = "network";
        nlc_opts.corrector_path = corrector_path;
        const NlcBundle nlc = load_nlc(nlc_opts, data.spec.n);
        const NlcSource source = bundle_source(nlc, nlc_opts);

        const NoiseSchedule sched = schedule.sampling_schedule();
        SamplerConfig config;
        config.algo = SamplerAlgo::ddim;
        config.eta = 0.0;
        config.normalize_direction = true;

        const DenoiserFn fn = make_denoiser_fn(denoiser);
        const Rng parent(seed);
        std::vector<std::pair<double, double>> records;
        for (uint32_t i = 0; i < num_seeds; ++i) {
            Rng rng = parent.fork(i);
            const Trajectory traj = sample_ddim_ddpm(fn, source, sched, config, data.spec.n, rng);
            for (const auto& step : traj.steps) {
                if (step.sigma > 0.0) {
                    records.emplace_back(step.sigma, step.r);
                }
            }
        }
        const LookupTable table = build_lookup_table(records, bins);
        ensure_parent_dir(out_path);
        save_lookup_table(table, out_path);
        log_info("wrote lookup table " + out_path + " from " + std::to_string(records.size()) +
                 " records");
        return 0;
    }
};

struct SampleCmd {
    std::string data_path, denoiser_path, out_prefix;
    std::string algo = "ddim";
    std::string normalize = "auto";
    double eta = -1.0;  // <0 -> algorithm default
    uint32_t num_seeds = 256;
    uint32_t dump_trajectories = 1;
    uint64_t seed = 1;
    uint32_t jobs = 0;
    NlcOpts nlc_opts;
    ScheduleOpts schedule;

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand("sample", "run a batch of unconstrained sampling seeds");
        cmd->add_option("--data", data_path, "dataset path (manifold oracle)")->required();
        cmd->add_option("--denoiser", denoiser_path, "denoiser checkpoint")->required();
        cmd->add_option("--algo", algo, "ddim | ddpm | edm-euler | edm-heun | dpm2")
            ->check(CLI::IsMember({"ddim", "ddpm", "edm-euler", "edm-heun", "dpm2"}));
        cmd->add_option("--eta", eta, "randomness scale (default: 0 for ddim, 1 for ddpm)");
        cmd->add_option("--normalize", normalize, "direction normalization: auto | on | off")
            ->check(CLI::IsMember({"auto", "on", "off"}));
        cmd->add_option("--num-seeds", num_seeds, "trajectories to aggregate");
        cmd->add_option("--dump-trajectories", dump_trajectories, "per-seed csv dumps");
        cmd->add_option("--seed", seed, "base rng seed");
        cmd->add_option("--jobs", jobs, "worker threads (0 = hardware)");
        cmd->add_option("--out-prefix", out_prefix, "output path prefix")->required();
        nlc_opts.attach(cmd);
        schedule.attach(cmd, true);
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    SamplerConfig make_config() const {
        SamplerConfig config;
        if (algo == "ddim") {
            config.algo = SamplerAlgo::ddim;
            config.eta = eta < 0.0 ? 0.0 : eta;
        } else if (algo == "ddpm") {
            config.algo = SamplerAlgo::ddpm;
            config.eta = eta < 0.0 ? 1.0 : eta;
        } else if (algo == "edm-euler") {
            config.algo = SamplerAlgo::edm_euler;
        } else if (algo == "edm-heun") {
            config.algo = SamplerAlgo::edm_heun;
        } else {
            config.algo = SamplerAlgo::dpm2;
        }
        const bool edm_family = config.algo == SamplerAlgo::edm_euler ||
                                config.algo == SamplerAlgo::edm_heun ||
                                config.algo == SamplerAlgo::dpm2;
        if (normalize == "auto") {
            // corrected runs decouple magnitude from direction; baselines
            // keep the raw recursion
            config.normalize_direction = !edm_family && nlc_opts.mode != "off";
        } else {
            config.normalize_direction = normalize == "on";
        }
        require(!(edm_family && config.normalize_direction), ErrorKind::config_invalid,
                "--normalize on is not valid for edm/dpm samplers");
        return config;
    }

    int run() const {
        check_input(data_path, "--data");
        check_input(denoiser_path, "--denoiser");
        nlc_opts.validate();
        require(num_seeds >= 2, ErrorKind::config_invalid, "--num-seeds must be >= 2");

        const Dataset data = load_dataset(data_path);
        const uint32_t n = data.spec.n;
        const MlpNet denoiser = load_denoiser(denoiser_path, n);
        const NlcBundle nlc = load_nlc(nlc_opts, n);
        const NlcSource source = bundle_source(nlc, nlc_opts);
        const NoiseSchedule sched = schedule.sampling_schedule();
        const SamplerConfig config = make_config();
        const DenoiserFn fn = make_denoiser_fn(denoiser);

        const TrajectoryFactory factory = [&](size_t, Rng& rng) {
            return run_sampler(fn, source, sched, config, n, rng);
        };
        const std::string method = algo + (nlc_opts.mode == "off" ? "" : "-" + nlc_opts.mode);
        const nlohmann::json snapshot = {
            {"algo", algo},           {"nlc", nlc_opts.mode},
            {"eta", config.eta},      {"normalize", config.normalize_direction},
            {"steps", sched.steps()}, {"num_seeds", num_seeds},
            {"seed", seed},
        };
        const RunReport report =
            aggregate_runs(method, snapshot, data.spec, factory, num_seeds, seed, jobs);
        ensure_parent_dir(out_prefix + "summary.json");
        save_report(report, out_prefix + "summary.json");

        const Rng parent(seed);
        for (uint32_t i = 0; i < std::min(dump_trajectories, num_seeds); ++i) {
            Rng rng = parent.fork(i);
            Trajectory traj = factory(i, rng);
            annotate_with_oracle(traj, data.spec);
            write_trajectory_csv(traj, out_prefix + "traj" + std::to_string(i) + ".csv");
        }
        log_info("wrote " + out_prefix + "summary.json (" + method + ", mean final dist " +
                 format_double(report.final_dist_mean) + ")");
        return 0;
    }
};

struct RestoreCmd {
    std::string data_path, denoiser_path, out_prefix, y_file, op_file, save_op_path;
    std::string algo = "ddnm";
    std::string op_kind = "random-row";
    std::string keep_coords;
    uint32_t op_rows = 1;
    uint64_t op_seed = 7;
    double eta = 0.0;
    uint32_t num_seeds = 256;
    uint32_t dump_trajectories = 1;
    uint64_t seed = 1;
    uint32_t jobs = 0;
    NlcOpts nlc_opts;
    ScheduleOpts schedule;
    IterProjConfig ip;

    RestoreCmd() { ip.stop_tol = 0.0; }  // fixed-length runs aggregate cleanly

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand("restore", "constrained generation under A x = y");
        cmd->add_option("--data", data_path, "dataset path (manifold oracle)")->required();
        cmd->add_option("--denoiser", denoiser_path, "denoiser checkpoint")->required();
        cmd->add_option("--algo", algo, "ddnm | iterproj")
            ->check(CLI::IsMember({"ddnm", "iterproj"}));
        cmd->add_option("--op", op_kind, "random-row | coordinate-mask | file")
            ->check(CLI::IsMember({"random-row", "coordinate-mask", "file"}));
        cmd->add_option("--op-rows", op_rows, "rows of a random-row operator");
        cmd->add_option("--op-seed", op_seed, "seed for a random-row operator");
        cmd->add_option("--keep-coords", keep_coords, "coordinate-mask indices, comma separated");
        cmd->add_option("--op-file", op_file, "operator file (--op file)");
        cmd->add_option("--save-op", save_op_path, "also write the operator used");
        cmd->add_option("--y-file", y_file, "observation vector (default: zeros)");
        cmd->add_option("--eta", eta, "ddnm randomness scale");
        cmd->add_option("--num-seeds", num_seeds, "restorations to aggregate");
        cmd->add_option("--dump-trajectories", dump_trajectories, "per-seed csv dumps");
        cmd->add_option("--seed", seed, "base rng seed");
        cmd->add_option("--jobs", jobs, "worker threads (0 = hardware)");
        cmd->add_option("--out-prefix", out_prefix, "output path prefix")->required();
        cmd->add_option("--ip-sigma-max", ip.sigma_max, "iterproj initial noise level");
        cmd->add_option("--ip-sigma-min", ip.sigma_min, "iterproj decay floor");
        cmd->add_option("--ip-sigma-restart", ip.sigma_restart, "iterproj restart level");
        cmd->add_option("--ip-decay", ip.decay, "iterproj geometric decay");
        cmd->add_option("--ip-noise-mix", ip.noise_mix, "iterproj fresh-noise weight");
        cmd->add_option("--ip-max-iters", ip.max_iterations, "iterproj iteration cap");
        cmd->add_option("--ip-stop-tol", ip.stop_tol,
                        "iterproj early-stop tolerance (0 = run to the cap)");
        nlc_opts.attach(cmd);
        schedule.attach(cmd, true);
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    LinearOperator build_operator(uint32_t n) const {
        if (op_kind == "file") {
            require(!op_file.empty(), ErrorKind::config_invalid, "--op file requires --op-file");
            check_input(op_file, "--op-file");
            LinearOperator op = load_operator(op_file);
            require(op.cols() == n, ErrorKind::config_invalid,
                    "operator columns do not match the dataset dimension");
            return op;
        }
        if (op_kind == "coordinate-mask") {
            require(!keep_coords.empty(), ErrorKind::config_invalid,
                    "--op coordinate-mask requires --keep-coords");
            std::vector<uint32_t> coords;
            for (double v : parse_double_list(keep_coords)) {
                coords.push_back(static_cast<uint32_t>(v));
            }
            return make_coordinate_mask_operator(coords, n);
        }
        Rng rng(op_seed);
        return make_random_row_operator(op_rows, n, rng);
    }

    // Early-stopped runs are padded by carrying the last live iteration
    // forward so per-step aggregates stay rectangular.
    void pad_to_fixed_length(Trajectory& traj) const {
        const size_t want = size_t(ip.max_iterations) + 1;
        if (traj.steps.size() >= want || traj.steps.size() < 2) {
            return;
        }
        const TrajectoryStep last_live = traj.steps[traj.steps.size() - 2];
        const TrajectoryStep final_step = traj.steps.back();
        traj.steps.pop_back();
        while (traj.steps.size() + 1 < want) {
            traj.steps.push_back(last_live);
        }
        traj.steps.push_back(final_step);
    }

    int run() const {
        check_input(data_path, "--data");
        check_input(denoiser_path, "--denoiser");
        nlc_opts.validate();
        require(num_seeds >= 2, ErrorKind::config_invalid, "--num-seeds must be >= 2");

        const Dataset data = load_dataset(data_path);
        const uint32_t n = data.spec.n;
        const MlpNet denoiser = load_denoiser(denoiser_path, n);
        const NlcBundle nlc = load_nlc(nlc_opts, n);
        const NlcSource source = bundle_source(nlc, nlc_opts);
        const LinearOperator op = build_operator(n);
        const Vec64 y =
            y_file.empty() ? Vec64(op.rows(), 0.0) : read_vector_file(y_file, op.rows());
        if (!save_op_path.empty()) {
            ensure_parent_dir(save_op_path);
            save_operator(op, save_op_path);
        }
        const DenoiserFn fn = make_denoiser_fn(denoiser);

        TrajectoryFactory factory;
        nlohmann::json snapshot = {
            {"algo", algo},         {"nlc", nlc_opts.mode},   {"op", op_kind},
            {"op_rows", op.rows()}, {"num_seeds", num_seeds}, {"seed", seed},
        };
        NoiseSchedule sched;
        SamplerConfig ddnm_config;
        if (algo == "ddnm") {
            sched = schedule.sampling_schedule();
            snapshot["steps"] = sched.steps();
            snapshot["eta"] = eta;
            ddnm_config.eta = eta;
            ddnm_config.normalize_direction = nlc_opts.mode != "off";
            factory = [&](size_t, Rng& rng) {
                return sample_ddnm(fn, source, sched, op, y, ddnm_config, rng);
            };
        } else {
            snapshot["max_iterations"] = ip.max_iterations;
            factory = [&](size_t, Rng& rng) {
                IterProjResult result = iterproj(fn, source, op, y, ip, rng);
                pad_to_fixed_length(result.trajectory);
                return std::move(result.trajectory);
            };
        }
        const std::string method = algo + (nlc_opts.mode == "off" ? "" : "-" + nlc_opts.mode);
        const RunReport report = aggregate_runs(method, snapshot, data.spec, factory, num_seeds,
                                                seed, jobs, /*constrained=*/true);
        ensure_parent_dir(out_prefix + "summary.json");
        save_report(report, out_prefix + "summary.json");

        const Rng parent(seed);
        for (uint32_t i = 0; i < std::min(dump_trajectories, num_seeds); ++i) {
            Rng rng = parent.fork(i);
            Trajectory traj = factory(i, rng);
            annotate_with_oracle(traj, data.spec);
            write_restoration_csv(traj, out_prefix + "restore" + std::to_string(i) + ".csv");
        }
        log_info("wrote " + out_prefix + "summary.json (" + method + ", mean final dist " +
                 format_double(report.final_dist_mean) + ", mean consistency " +
                 format_double(report.final_consistency_mean) + ")");
        return 0;
    }
};

struct EvalCmd {
    std::string data_path, out_path;
    std::string sigmas = "5,10,50";
    uint32_t samples = 500;
    uint64_t seed = 1;

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand("eval", "initial-distance statistics on the manifold");
        cmd->add_option("--data", data_path, "dataset path")->required();
        cmd->add_option("--sigmas", sigmas, "comma-separated noise levels");
        cmd->add_option("--samples", samples, "draws per level");
        cmd->add_option("--seed", seed, "rng seed");
        cmd->add_option("--out", out_path, "output json")->required();
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    int run() const {
        check_input(data_path, "--data");
        const Dataset data = load_dataset(data_path);
        nlohmann::json out = nlohmann::json::array();
        const Rng parent(seed);
        size_t i = 0;
        for (double sigma : parse_double_list(sigmas)) {
            Rng rng = parent.fork(i++);
            const InitialDistanceStats stats =
                initial_distance_check(data.spec, sigma, samples, rng);
            out.push_back({
                {"sigma_T", stats.sigma_T},
                {"samples", stats.num_samples},
                {"mean_dist_sq", stats.mean_dist_sq},
                {"threshold_n_sigma_sq", stats.threshold},
                {"exceeds_threshold", stats.exceeds_threshold},
            });
        }
        ensure_parent_dir(out_path);
        write_file_atomic(out_path, out.dump(2) + "\n");
        log_info("wrote " + out_path);
        return 0;
    }
};

struct ReportCmd {
    std::vector<std::string> inputs;
    std::string out_path, plot_csv;

    void attach(CLI::App& app, std::function<int()>& action) {
        auto* cmd = app.add_subcommand("report", "compare run summaries");
        cmd->add_option("--inputs", inputs, "run summary json files")->required()->expected(-2);
        cmd->add_option("--out", out_path, "comparison json output")->required();
        cmd->add_option("--plot-csv", plot_csv, "long-format csv for plotting");
        cmd->callback([this, &action] { action = [this] { return run(); }; });
    }

    int run() const {
        std::vector<RunReport> reports;
        for (const auto& path : inputs) {
            check_input(path, "--inputs");
            reports.push_back(load_report(path));
        }
        const ComparisonTable table = compare(reports);
        ensure_parent_dir(out_path);
        save_comparison(table, out_path);
        if (!plot_csv.empty()) {
            ensure_parent_dir(plot_csv);
            write_plot_csv(reports, plot_csv);
        }
        log_info("wrote " + out_path);
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion sampling laboratory with noise-level correction"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a TOML-style config file");

    GenDataCmd gen_data;
    TrainCmd train_denoiser(NetRole::denoiser);
    TrainCmd train_nlc(NetRole::corrector);
    BuildLutCmd build_lut;
    SampleCmd sample;
    RestoreCmd restore;
    EvalCmd eval;
    ReportCmd report;

    std::function<int()> action;
    gen_data.attach(app, action);
    train_denoiser.attach(app, action);
    train_nlc.attach(app, action);
    build_lut.attach(app, action);
    sample.attach(app, action);
    restore.attach(app, action);
    eval.attach(app, action);
    report.attach(app, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error kind=ConfigInvalid msg=\"" << e.what() << "\"\n";
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const nlc::Error& e) {
        std::cerr << "error kind=" << nlc::to_string(e.kind()) << " msg=\"" << e.what() << "\"\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error kind=Runtime msg=\"" << e.what() << "\"\n";
        return 1;
    }
}
