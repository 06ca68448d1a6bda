#include "nlc/net.hpp"

#include <cmath>

#include "nlc/io.hpp"
#include "nlc/linalg.hpp"

namespace nlc {

namespace {

constexpr char kMagic[5] = "NLCN";
constexpr uint32_t kVersion = 1;

void check_dims(const std::vector<uint32_t>& dims) {
    require(dims.size() >= 2, ErrorKind::invalid_range, "mlp: need at least input and output dims");
    for (uint32_t d : dims) {
        require(d >= 1, ErrorKind::invalid_range, "mlp: zero layer width");
    }
}

void apply_output(const MlpNet& net, Vec64& out) {
    if (net.role == NetRole::corrector) {
        for (auto& v : out) {
            v = std::max(v, kCorrectorFloor);
        }
    }
}

}  // namespace

size_t MlpNet::param_count() const {
    size_t count = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        count += weights[l].data.size() + biases[l].size();
    }
    return count;
}

MlpNet make_mlp(NetRole role, const std::vector<uint32_t>& dims, Rng& rng) {
    check_dims(dims);
    if (role == NetRole::corrector) {
        require(dims.back() == 1, ErrorKind::invalid_range, "corrector output dim must be 1");
    }
    MlpNet net;
    net.role = role;
    net.dims = dims;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const bool last = l + 2 == dims.size();
        Mat64 w(dims[l + 1], dims[l]);
        if (last) {
            // small uniform output head
            const double bound = 1.0 / std::sqrt(double(dims[l]));
            for (auto& v : w.data) {
                v = rng.uniform(-bound, bound);
            }
        } else {
            // norm-preserving hidden transport: cropped orthogonal frame with a
            // gain compensating the SiLU variance loss
            const double gain = 1.4;
            const size_t big = std::max(dims[l], dims[l + 1]);
            const Mat64 q = random_orthogonal(rng, big);
            for (size_t i = 0; i < w.rows; ++i) {
                for (size_t j = 0; j < w.cols; ++j) {
                    w.at(i, j) = gain * q.at(i, j);
                }
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(dims[l + 1], 0.0);
    }
    return net;
}

double silu(double z) {
    return z / (1.0 + std::exp(-z));
}

double silu_grad(double z) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

Vec64 forward(const MlpNet& net, const Vec64& input) {
    require(input.size() == net.dims.front(), ErrorKind::dim_mismatch, "forward: input dim");
    Vec64 act = input;
    const size_t layers = net.num_layers();
    for (size_t l = 0; l < layers; ++l) {
        Vec64 z = matvec(net.weights[l], act);
        for (size_t i = 0; i < z.size(); ++i) {
            z[i] += net.biases[l][i];
        }
        if (l + 1 < layers) {
            for (auto& v : z) {
                v = silu(v);
            }
        }
        act = std::move(z);
    }
    apply_output(net, act);
    return act;
}

void Grads::zero() {
    for (auto& w : weights) {
        std::fill(w.data.begin(), w.data.end(), 0.0);
    }
    for (auto& b : biases) {
        std::fill(b.begin(), b.end(), 0.0);
    }
}

void Grads::add(const Grads& other) {
    for (size_t l = 0; l < weights.size(); ++l) {
        for (size_t i = 0; i < weights[l].data.size(); ++i) {
            weights[l].data[i] += other.weights[l].data[i];
        }
        for (size_t i = 0; i < biases[l].size(); ++i) {
            biases[l][i] += other.biases[l][i];
        }
    }
}

void Grads::scale(double s) {
    for (auto& w : weights) {
        for (auto& v : w.data) {
            v *= s;
        }
    }
    for (auto& b : biases) {
        for (auto& v : b) {
            v *= s;
        }
    }
}

Grads make_grads(const MlpNet& net) {
    Grads g;
    for (size_t l = 0; l < net.num_layers(); ++l) {
        g.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

Grads backward(const MlpNet& net, const Vec64& input, const Vec64& upstream) {
    require(input.size() == net.dims.front(), ErrorKind::dim_mismatch, "backward: input dim");
    require(upstream.size() == net.dims.back(), ErrorKind::dim_mismatch, "backward: upstream dim");
    const size_t layers = net.num_layers();
    // forward pass, keeping activations and preactivations
    std::vector<Vec64> acts(layers + 1);
    std::vector<Vec64> pre(layers);
    acts[0] = input;
    for (size_t l = 0; l < layers; ++l) {
        Vec64 z = matvec(net.weights[l], acts[l]);
        for (size_t i = 0; i < z.size(); ++i) {
            z[i] += net.biases[l][i];
        }
        pre[l] = z;
        if (l + 1 < layers) {
            for (auto& v : z) {
                v = silu(v);
            }
        }
        acts[l + 1] = std::move(z);
    }

    Grads grads = make_grads(net);
    Vec64 delta = upstream;
    if (net.role == NetRole::corrector) {
        // no gradient through an active output floor
        for (size_t i = 0; i < delta.size(); ++i) {
            if (pre[layers - 1][i] <= kCorrectorFloor) {
                delta[i] = 0.0;
            }
        }
    }
    for (size_t l = layers; l-- > 0;) {
        Mat64& dw = grads.weights[l];
        const Vec64& a = acts[l];
        for (size_t i = 0; i < delta.size(); ++i) {
            double* row = dw.row(i);
            const double di = delta[i];
            for (size_t j = 0; j < a.size(); ++j) {
                row[j] += di * a[j];
            }
            grads.biases[l][i] += di;
        }
        if (l > 0) {
            Vec64 prev = matvec_t(net.weights[l], delta);
            for (size_t i = 0; i < prev.size(); ++i) {
                prev[i] *= silu_grad(pre[l - 1][i]);
            }
            delta = std::move(prev);
        }
    }
    return grads;
}

Mat64 forward_batch(const MlpNet& net, const Mat64& inputs, ForwardCache* cache) {
    require(inputs.cols == net.dims.front(), ErrorKind::dim_mismatch, "forward_batch: input dim");
    const size_t layers = net.num_layers();
    if (cache != nullptr) {
        cache->activations.assign(layers + 1, Mat64());
        cache->pre.assign(layers, Mat64());
        cache->activations[0] = inputs;
    }
    Mat64 act = inputs;
    for (size_t l = 0; l < layers; ++l) {
        // accumulate-form product (vectorizes; matmul_nt's dot-reduction does not)
        Mat64 z = matmul(act, transpose(net.weights[l]));
        for (size_t r = 0; r < z.rows; ++r) {
            double* row = z.row(r);
            for (size_t c = 0; c < z.cols; ++c) {
                row[c] += net.biases[l][c];
            }
        }
        if (cache != nullptr) {
            cache->pre[l] = z;
        }
        if (l + 1 < layers) {
            for (auto& v : z.data) {
                v = silu(v);
            }
        } else if (net.role == NetRole::corrector) {
            for (auto& v : z.data) {
                v = std::max(v, kCorrectorFloor);
            }
        }
        act = std::move(z);
        if (cache != nullptr) {
            cache->activations[l + 1] = act;
        }
    }
    return act;
}

void backward_batch(const MlpNet& net, const ForwardCache& cache, const Mat64& upstream,
                    Grads& accum) {
    const size_t layers = net.num_layers();
    require(upstream.cols == net.dims.back(), ErrorKind::dim_mismatch, "backward_batch: upstream");
    Mat64 delta = upstream;
    if (net.role == NetRole::corrector) {
        const Mat64& z_out = cache.pre[layers - 1];
        for (size_t i = 0; i < delta.data.size(); ++i) {
            if (z_out.data[i] <= kCorrectorFloor) {
                delta.data[i] = 0.0;
            }
        }
    }
    for (size_t l = layers; l-- > 0;) {
        const Mat64 dw = matmul_tn(delta, cache.activations[l]);
        for (size_t i = 0; i < dw.data.size(); ++i) {
            accum.weights[l].data[i] += dw.data[i];
        }
        for (size_t r = 0; r < delta.rows; ++r) {
            const double* row = delta.row(r);
            for (size_t c = 0; c < delta.cols; ++c) {
                accum.biases[l][c] += row[c];
            }
        }
        if (l > 0) {
            Mat64 prev = matmul(delta, net.weights[l]);
            const Mat64& z = cache.pre[l - 1];
            for (size_t i = 0; i < prev.data.size(); ++i) {
                prev.data[i] *= silu_grad(z.data[i]);
            }
            delta = std::move(prev);
        }
    }
}

namespace {

// resolves a flat index to (layer, weight-or-bias, offset)
template <typename Net, typename Fn>
auto with_param(Net& net, size_t index, Fn&& fn) {
    for (size_t l = 0; l < net.weights.size(); ++l) {
        if (index < net.weights[l].data.size()) {
            return fn(net.weights[l].data[index]);
        }
        index -= net.weights[l].data.size();
        if (index < net.biases[l].size()) {
            return fn(net.biases[l][index]);
        }
        index -= net.biases[l].size();
    }
    fail(ErrorKind::invalid_range, "parameter index out of range");
}

}  // namespace

double get_param(const MlpNet& net, size_t index) {
    return with_param(net, index, [](const double& v) { return v; });
}

void set_param(MlpNet& net, size_t index, double value) {
    with_param(net, index, [value](double& v) { return v = value; });
}

double get_grad(const Grads& grads, size_t index) {
    return with_param(grads, index, [](const double& v) { return v; });
}

AdamState make_adam(const MlpNet& net, double lr) {
    AdamState state;
    state.lr = lr;
    state.m = make_grads(net);
    state.v = make_grads(net);
    return state;
}

void adam_step(AdamState& state, MlpNet& net, const Grads& grads) {
    state.step += 1;
    const double bias1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bias2 = 1.0 - std::pow(state.beta2, double(state.step));
    auto update = [&](double& p, double& m, double& v, double g) {
        require(std::isfinite(g), ErrorKind::non_finite_gradient, "adam_step: non-finite gradient");
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bias1;
        const double v_hat = v / bias2;
        p -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    };
    for (size_t l = 0; l < net.num_layers(); ++l) {
        auto& w = net.weights[l].data;
        auto& wm = state.m.weights[l].data;
        auto& wv = state.v.weights[l].data;
        const auto& wg = grads.weights[l].data;
        for (size_t i = 0; i < w.size(); ++i) {
            update(w[i], wm[i], wv[i], wg[i]);
        }
        auto& b = net.biases[l];
        auto& bm = state.m.biases[l];
        auto& bv = state.v.biases[l];
        const auto& bg = grads.biases[l];
        for (size_t i = 0; i < b.size(); ++i) {
            update(b[i], bm[i], bv[i], bg[i]);
        }
    }
}

double input_scale(double sigma) {
    return 1.0 / std::sqrt(1.0 + sigma * sigma);
}

Vec64 conditioned_input(const Vec64& x, double sigma) {
    require(sigma > 0.0, ErrorKind::invalid_range, "conditioned_input: sigma <= 0");
    Vec64 in(x.size() + 1);
    const double scale = input_scale(sigma);
    for (size_t i = 0; i < x.size(); ++i) {
        in[i] = x[i] * scale;
    }
    in[x.size()] = std::log(sigma);
    return in;
}

Vec64 denoiser_eval(const MlpNet& net, const Vec64& x, double sigma) {
    require(net.role == NetRole::denoiser, ErrorKind::config_invalid, "denoiser_eval: wrong role");
    require(net.dims.front() == x.size() + 1 && net.dims.back() == x.size(),
            ErrorKind::dim_mismatch, "denoiser_eval: net dims do not match sample dim");
    return forward(net, conditioned_input(x, sigma));
}

double corrector_eval(const MlpNet& net, const Vec64& x, double sigma) {
    require(net.role == NetRole::corrector, ErrorKind::config_invalid, "corrector_eval: wrong role");
    require(net.dims.front() == x.size() + 1, ErrorKind::dim_mismatch,
            "corrector_eval: net dims do not match sample dim");
    return forward(net, conditioned_input(x, sigma))[0];
}

DenoiserFn make_denoiser_fn(const MlpNet& net) {
    const MlpNet* ptr = &net;
    return [ptr](const Vec64& x, double sigma) { return denoiser_eval(*ptr, x, sigma); };
}

CorrectorFn make_corrector_fn(const MlpNet& net) {
    const MlpNet* ptr = &net;
    return [ptr](const Vec64& x, double sigma) { return corrector_eval(*ptr, x, sigma); };
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    const MlpNet& net = checkpoint.net;
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u8(buf, static_cast<uint8_t>(net.role));
    put_u32(buf, static_cast<uint32_t>(net.dims.size()));
    for (uint32_t d : net.dims) {
        put_u32(buf, d);
    }
    put_u64(buf, checkpoint.seed);
    put_u64(buf, checkpoint.iterations);
    put_f64(buf, checkpoint.final_loss);
    put_u64(buf, checkpoint.adam.step);
    put_f64(buf, checkpoint.adam.lr);
    put_f64(buf, checkpoint.adam.beta1);
    put_f64(buf, checkpoint.adam.beta2);
    put_f64(buf, checkpoint.adam.eps);
    const size_t params = net.param_count();
    put_u64(buf, uint64_t(params) * 3);
    auto dump = [&](const std::vector<Mat64>& ws, const std::vector<Vec64>& bs) {
        for (size_t l = 0; l < ws.size(); ++l) {
            for (double v : ws[l].data) {
                put_f64(buf, v);
            }
            for (double v : bs[l]) {
                put_f64(buf, v);
            }
        }
    };
    dump(net.weights, net.biases);
    dump(checkpoint.adam.m.weights, checkpoint.adam.m.biases);
    dump(checkpoint.adam.v.weights, checkpoint.adam.v.biases);
    put_u32(buf, crc32(buf));
    write_file_atomic(path, buf);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::string buf = read_file(path);
    require(buf.size() >= 4, ErrorKind::corrupt_payload, "checkpoint: truncated");
    const uint32_t stored_crc = [&] {
        require(buf.size() >= 8, ErrorKind::corrupt_payload, "checkpoint: truncated");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[buf.size() - 4 + i])) << (8 * i);
        }
        return v;
    }();
    ByteReader reader(buf);
    require(reader.bytes(4) == "NLCN", ErrorKind::corrupt_payload, "checkpoint: bad magic");
    const uint32_t version = reader.u32();
    require(version == kVersion, ErrorKind::version_mismatch,
            "checkpoint: version " + std::to_string(version));
    require(crc32(buf, buf.size() - 4) == stored_crc, ErrorKind::corrupt_payload,
            "checkpoint: checksum mismatch");

    Checkpoint checkpoint;
    MlpNet& net = checkpoint.net;
    const uint8_t role = reader.u8();
    require(role <= 1, ErrorKind::corrupt_payload, "checkpoint: bad role tag");
    net.role = static_cast<NetRole>(role);
    const uint32_t num_dims = reader.u32();
    require(num_dims >= 2 && num_dims < 64, ErrorKind::corrupt_payload, "checkpoint: dims count");
    net.dims.resize(num_dims);
    for (auto& d : net.dims) {
        d = reader.u32();
        require(d >= 1, ErrorKind::corrupt_payload, "checkpoint: zero dim");
    }
    checkpoint.seed = reader.u64();
    checkpoint.iterations = reader.u64();
    checkpoint.final_loss = reader.f64();
    checkpoint.adam.step = reader.u64();
    checkpoint.adam.lr = reader.f64();
    checkpoint.adam.beta1 = reader.f64();
    checkpoint.adam.beta2 = reader.f64();
    checkpoint.adam.eps = reader.f64();
    const uint64_t payload = reader.u64();
    for (size_t l = 0; l + 1 < num_dims; ++l) {
        net.weights.emplace_back(net.dims[l + 1], net.dims[l]);
        net.biases.emplace_back(net.dims[l + 1], 0.0);
    }
    require(payload == uint64_t(net.param_count()) * 3, ErrorKind::corrupt_payload,
            "checkpoint: payload length mismatch");
    auto slurp = [&](std::vector<Mat64>& ws, std::vector<Vec64>& bs) {
        for (size_t l = 0; l < ws.size(); ++l) {
            for (auto& v : ws[l].data) {
                v = reader.f64();
            }
            for (auto& v : bs[l]) {
                v = reader.f64();
            }
        }
    };
    checkpoint.adam.m = make_grads(net);
    checkpoint.adam.v = make_grads(net);
    slurp(net.weights, net.biases);
    slurp(checkpoint.adam.m.weights, checkpoint.adam.m.biases);
    slurp(checkpoint.adam.v.weights, checkpoint.adam.v.biases);
    require(reader.remaining() == 4, ErrorKind::corrupt_payload, "checkpoint: trailing bytes");
    return checkpoint;
}

}  // namespace nlc
