#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlc/math.hpp"
#include "nlc/rng.hpp"

namespace nlc {

enum class NetRole : uint8_t { denoiser = 0, corrector = 1 };

// Dense feedforward net: SiLU on hidden layers, identity output. A corrector
// net additionally floors its (scalar) output at kCorrectorFloor so the
// corrected noise level sigma * (1 + r) stays positive.
constexpr double kCorrectorFloor = -0.99;

struct MlpNet {
    NetRole role = NetRole::denoiser;
    std::vector<uint32_t> dims;   // input..output
    std::vector<Mat64> weights;   // weights[l]: dims[l+1] x dims[l]
    std::vector<Vec64> biases;

    size_t num_layers() const { return weights.size(); }
    size_t param_count() const;
};

// Fan-in scaled uniform init: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), b = 0.
MlpNet make_mlp(NetRole role, const std::vector<uint32_t>& dims, Rng& rng);

double silu(double z);
double silu_grad(double z);

Vec64 forward(const MlpNet& net, const Vec64& input);

struct Grads {
    std::vector<Mat64> weights;
    std::vector<Vec64> biases;

    void zero();
    void add(const Grads& other);
    void scale(double s);
};

Grads make_grads(const MlpNet& net);

// Exact gradients of <upstream, forward(net, input)> w.r.t. all parameters.
Grads backward(const MlpNet& net, const Vec64& input, const Vec64& upstream);

// Batched variants (one sample per row) used by the training loop.
struct ForwardCache {
    std::vector<Mat64> activations;  // activations[0] = input, ..., [L] = output
    std::vector<Mat64> pre;          // pre[l] = preactivation of layer l
};

Mat64 forward_batch(const MlpNet& net, const Mat64& inputs, ForwardCache* cache);
void backward_batch(const MlpNet& net, const ForwardCache& cache, const Mat64& upstream,
                    Grads& accum);

// Flat parameter order: per layer, weight matrix row-major then bias.
double get_param(const MlpNet& net, size_t index);
void set_param(MlpNet& net, size_t index, double value);
double get_grad(const Grads& grads, size_t index);

struct AdamState {
    uint64_t step = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Grads m;
    Grads v;
};

AdamState make_adam(const MlpNet& net, double lr);

// Standard bias-corrected Adam update; rejects non-finite gradients.
void adam_step(AdamState& state, MlpNet& net, const Grads& grads);

// --- sigma-conditioned evaluation ---
//
// Networks consume (x * c_in(sigma), log sigma) with c_in = 1/sqrt(1+sigma²):
// the scalar noise level enters as a log feature and the sample is rescaled to
// the variance-preserving frame so input magnitudes stay O(sqrt(n)) across the
// schedule's dynamic range.

double input_scale(double sigma);
Vec64 conditioned_input(const Vec64& x, double sigma);

Vec64 denoiser_eval(const MlpNet& net, const Vec64& x, double sigma);
double corrector_eval(const MlpNet& net, const Vec64& x, double sigma);

using DenoiserFn = std::function<Vec64(const Vec64& x, double sigma)>;
using CorrectorFn = std::function<double(const Vec64& x, double sigma)>;

// The returned closures capture `net` by pointer; the net must outlive them.
DenoiserFn make_denoiser_fn(const MlpNet& net);
CorrectorFn make_corrector_fn(const MlpNet& net);

// --- checkpointing ---
//
// Binary format: magic "NLCN", version u32, role u8, layer count + dims (u32),
// run metadata (seed, iterations, final loss), Adam hyperparameters and step,
// little-endian f64 payload (parameters, Adam m, Adam v), CRC32 trailer.

struct Checkpoint {
    MlpNet net;
    AdamState adam;
    uint64_t seed = 0;
    uint64_t iterations = 0;
    double final_loss = 0.0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace nlc
