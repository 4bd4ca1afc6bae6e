// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/fusion.h"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#endif

namespace luxprobe {

template <typename Scalar>
MlpParams<Scalar>::MlpParams(std::vector<int> layer_widths) : widths(std::move(layer_widths)) {
    require(widths.size() >= 2, "network needs at least an input and an output layer");
    for (int w : widths) require(w > 0, "layer widths must be positive");
    values.assign(weight_offset(layer_count()), Scalar(0));
}

template <typename Scalar>
std::size_t MlpParams<Scalar>::weight_offset(int layer) const {
    std::size_t off = 0;
    for (int l = 0; l < layer; ++l) {
        off += static_cast<std::size_t>(widths[l + 1]) * (widths[l] + 1);
    }
    return off;
}

template struct MlpParams<float>;
template struct MlpParams<double>;

namespace {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using RowMajorMap = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename S>
using VectorMap = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>;

template <typename S>
S softplus(S z) {
    return std::max(z, S(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename S>
S sigmoid(S z) {
    if (z >= S(0)) return S(1) / (S(1) + std::exp(-z));
    const S e = std::exp(z);
    return e / (S(1) + e);
}

// Buffers reused across batches; reallocating megabyte-sized matrices every
// step costs more than the products themselves.
template <typename S>
struct Workspace {
    Matrix<S> input;
    // Owned copies of the weights and gradient sums, so products never run on
    // maps whose alignment depends on the parameter vector's allocation.
    std::vector<Matrix<S>> weight;
    std::vector<Matrix<S>> grad_w;
    std::vector<Matrix<S>> grad_b;
    Matrix<S> gw;
    std::vector<Matrix<S>> pre;  // affine outputs per layer
    std::vector<Matrix<S>> act;  // act[l] is the input of layer l, l > 0
    Matrix<S> dz;
    Matrix<S> da;
};

// Columns per pass. Keeps every activation buffer of a pass inside L2.
constexpr std::size_t kChunk = 512;

template <typename S>
const Matrix<S>& layer_input(const Workspace<S>& ws, int l) {
    return l == 0 ? ws.input : ws.act[static_cast<std::size_t>(l)];
}

template <typename S>
void load_weights(const MlpParams<S>& net, Workspace<S>& ws) {
    const auto layers = static_cast<std::size_t>(net.layer_count());
    ws.weight.resize(layers);
    ws.pre.resize(layers);
    ws.act.resize(layers);
    for (int l = 0; l < net.layer_count(); ++l) {
        ws.weight[l] = RowMajorMap<S>(net.values.data() + net.weight_offset(l), net.widths[l + 1], net.widths[l]);
    }
}

template <typename S>
void forward_all(const MlpParams<S>& net, std::span<const S> inputs, Workspace<S>& ws) {
    const int layers = net.layer_count();
    const auto n = static_cast<Eigen::Index>(inputs.size() / static_cast<std::size_t>(net.widths.front()));
    ws.input = Eigen::Map<const Matrix<S>>(inputs.data(), net.widths.front(), n);
    for (int l = 0; l < layers; ++l) {
        const VectorMap<S> b(net.values.data() + net.bias_offset(l), net.widths[l + 1]);
        Matrix<S>& z = ws.pre[l];
        z.resize(net.widths[l + 1], n);
        z.noalias() = ws.weight[l] * layer_input(ws, l);
        z.colwise() += b;
        if (l + 1 < layers) ws.act[l + 1] = z.cwiseMax(S(kLeakySlope) * z);
    }
}

template <typename S>
S loss_and_gradient(const MlpParams<S>& net, std::span<const S> inputs, std::span<const S> targets, S delta,
                    std::span<S> grad, Workspace<S>& ws) {
    const int in_w = net.widths.front();
    const int out_w = net.widths.back();
    const int layers = net.layer_count();
    const std::size_t n = inputs.size() / in_w;
    require(n > 0 && inputs.size() == n * in_w, "input batch size is not a multiple of the input width");
    require(targets.size() == n * out_w, "target batch has the wrong size");
    require(grad.size() == net.size(), "gradient buffer has the wrong size");
    require(delta > S(0), "Huber delta must be positive");

    load_weights(net, ws);
    ws.grad_w.resize(static_cast<std::size_t>(layers));
    ws.grad_b.resize(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        ws.grad_w[l].setZero(net.widths[l + 1], net.widths[l]);
        ws.grad_b[l].setZero(net.widths[l + 1], 1);
    }

    const S inv_count = S(1) / static_cast<S>(targets.size());
    double loss = 0;
    for (std::size_t begin = 0; begin < n; begin += kChunk) {
        const std::size_t m = std::min(kChunk, n - begin);
        forward_all(net, inputs.subspan(begin * in_w, m * in_w), ws);
        const Matrix<S>& z_out = ws.pre.back();
        const S* t = targets.data() + begin * out_w;

        ws.dz.resize(out_w, static_cast<Eigen::Index>(m));
        for (Eigen::Index i = 0; i < ws.dz.size(); ++i) {
            const S z = z_out.data()[i];
            const S e = softplus(z) - t[i];
            const S ae = std::abs(e);
            loss += ae <= delta ? S(0.5) * e * e : delta * (ae - S(0.5) * delta);
            const S dl = ae <= delta ? e : (e > 0 ? delta : -delta);
            ws.dz.data()[i] = dl * inv_count * sigmoid(z);
        }

        for (int l = layers - 1; l >= 0; --l) {
            ws.gw.noalias() = ws.dz * layer_input(ws, l).transpose();
            ws.grad_w[l] += ws.gw;
            // Fixed column order; rowwise().sum() changes its order with alignment.
            for (Eigen::Index j = 0; j < ws.dz.cols(); ++j) ws.grad_b[l] += ws.dz.col(j);
            if (l > 0) {
                ws.da.noalias() = ws.weight[l].transpose() * ws.dz;
                ws.da = (ws.pre[l - 1].array() > S(0)).select(ws.da, S(kLeakySlope) * ws.da);
                ws.dz.swap(ws.da);
            }
        }
    }

    for (int l = 0; l < layers; ++l) {
        Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            grad.data() + net.weight_offset(l), net.widths[l + 1], net.widths[l]) = ws.grad_w[l];
        Eigen::Map<Matrix<S>>(grad.data() + net.bias_offset(l), net.widths[l + 1], 1) = ws.grad_b[l];
    }
    return static_cast<S>(loss * static_cast<double>(inv_count));
}

}  // namespace

template <typename Scalar>
void mlp_forward(const MlpParams<Scalar>& net, std::span<const Scalar> inputs, std::span<Scalar> outputs) {
    const int in_w = net.widths.front();
    const int out_w = net.widths.back();
    require(inputs.size() % in_w == 0, "input batch size is not a multiple of the input width");
    const std::size_t n = inputs.size() / in_w;
    require(outputs.size() == n * out_w, "output buffer has the wrong size");
    if (n == 0) return;
    Workspace<Scalar> ws;
    load_weights(net, ws);
    forward_all(net, inputs, ws);
    const Matrix<Scalar>& z = ws.pre.back();
    for (std::size_t i = 0; i < outputs.size(); ++i) outputs[i] = softplus(z.data()[i]);
}

template <typename Scalar>
Scalar mlp_loss_and_gradient(const MlpParams<Scalar>& net, std::span<const Scalar> inputs,
                             std::span<const Scalar> targets, Scalar delta, std::span<Scalar> grad) {
    Workspace<Scalar> ws;
    return loss_and_gradient(net, inputs, targets, delta, grad, ws);
}

template void mlp_forward<float>(const MlpParams<float>&, std::span<const float>, std::span<float>);
template void mlp_forward<double>(const MlpParams<double>&, std::span<const double>, std::span<double>);
template float mlp_loss_and_gradient<float>(const MlpParams<float>&, std::span<const float>, std::span<const float>,
                                            float, std::span<float>);
template double mlp_loss_and_gradient<double>(const MlpParams<double>&, std::span<const double>,
                                              std::span<const double>, double, std::span<double>);

double huber_loss(double pred, double target, double delta) {
    require(delta > 0.0, "Huber delta must be positive");
    const double e = pred - target;
    const double ae = std::abs(e);
    return ae <= delta ? 0.5 * e * e : delta * (ae - 0.5 * delta);
}

const std::vector<int>& FusionNet::default_widths() {
    static const std::vector<int> widths{6, 64, 64, 64, 64, 3};
    return widths;
}

FusionNet::FusionNet() : params_(default_widths()) {}

FusionNet::FusionNet(MlpParams<float> params) : params_(std::move(params)) {
    require(params_.widths.front() == 6 && params_.widths.back() == 3,
            "fusion network must map 6 inputs to 3 outputs");
    require(params_.values.size() == params_.weight_offset(params_.layer_count()),
            "parameter count does not match layer widths");
}

FusionNet FusionNet::initialize(std::uint64_t seed, std::vector<int> widths) {
    MlpParams<float> p(std::move(widths));
    Rng rng(seed);
    for (int l = 0; l < p.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.widths[l]));
        const std::size_t begin = p.weight_offset(l);
        const std::size_t end = p.weight_offset(l + 1);
        for (std::size_t i = begin; i < end; ++i) p.values[i] = static_cast<float>(rng.uniform(-bound, bound));
    }
    return FusionNet(std::move(p));
}

bool FusionNet::all_finite() const {
    return std::all_of(params_.values.begin(), params_.values.end(), [](float v) { return std::isfinite(v); });
}

namespace {

void require_finite(const FusionNet& net) {
    if (!net.all_finite()) fail(ErrorCode::NonFinite, "fusion network has non-finite parameters");
}

}  // namespace

Rgb fusion_forward(const FusionNet& net, const Rgb& ldr, const Rgb& log) {
    require_finite(net);
    const float in[6] = {ldr.r, ldr.g, ldr.b, log.r, log.g, log.b};
    float out[3];
    mlp_forward<float>(net.params(), in, out);
    return {out[0], out[1], out[2]};
}

EnvironmentMap fuse_image(const FusionNet& net, const DualToneMaps& maps) {
    require_finite(net);
    require(maps.ldr.width() == maps.log.width() && maps.ldr.height() == maps.log.height(),
            "ldr and log channels must share dimensions");
    Image out(maps.width(), maps.height());
    const auto ldr = maps.ldr.pixels();
    const auto log = maps.log.pixels();
    auto dst = out.pixels();

    constexpr std::size_t kChunk = 4096;
    std::vector<float> in(kChunk * 6);
    std::vector<float> res(kChunk * 3);
    for (std::size_t begin = 0; begin < dst.size(); begin += kChunk) {
        const std::size_t n = std::min(kChunk, dst.size() - begin);
        for (std::size_t i = 0; i < n; ++i) {
            const Rgb& a = ldr[begin + i];
            const Rgb& b = log[begin + i];
            float* x = &in[i * 6];
            x[0] = a.r, x[1] = a.g, x[2] = a.b, x[3] = b.r, x[4] = b.g, x[5] = b.b;
        }
        mlp_forward<float>(net.params(), std::span<const float>(in.data(), n * 6), std::span<float>(res.data(), n * 3));
        for (std::size_t i = 0; i < n; ++i) dst[begin + i] = {res[i * 3], res[i * 3 + 1], res[i * 3 + 2]};
    }
    return EnvironmentMap(std::move(out));
}

std::vector<TrainingPair> sample_training_pairs(Rng& rng, std::size_t count, const SamplerOptions& options) {
    require(count > 0, "sample count must be positive");
    require(options.min_radiance > 0.0 && options.max_radiance > options.min_radiance, "invalid radiance range");
    const double log_lo = std::log(options.min_radiance);
    const double log_hi = std::log(options.max_radiance);
    std::vector<TrainingPair> pairs(count);
    for (TrainingPair& pair : pairs) {
        const double base = std::exp(rng.uniform(log_lo, log_hi));
        const double exposure = std::exp2(rng.uniform(options.min_exposure_stops, options.max_exposure_stops));
        for (std::size_t k = 0; k < 3; ++k) {
            const double tint = std::exp(rng.uniform(-options.hue_jitter, options.hue_jitter));
            const auto e = static_cast<float>(std::min(base * tint * exposure, kLogMax));
            pair.hdr[k] = e;
            pair.ldr[k] = static_cast<float>(std::clamp(tonemap_ldr(e), 0.0, 1.0));
            pair.log[k] = static_cast<float>(std::clamp(tonemap_log(e), 0.0, 1.0));
        }
        if (rng.uniform() < options.quantize_probability) {
            for (std::size_t k = 0; k < 3; ++k) {
                pair.ldr[k] = quantize8(pair.ldr[k]);
                pair.log[k] = quantize8(pair.log[k]);
            }
        }
    }
    return pairs;
}

PairSource synthetic_pair_source(std::uint64_t seed, const SamplerOptions& options) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng, options](std::size_t count) { return sample_training_pairs(*rng, count, options); };
}

namespace {

// Flushes denormal floats to zero while training. Small activations in
// partly trained nets otherwise go subnormal and halve the step rate.
class FlushDenormals {
public:
#if defined(__SSE__) || defined(__x86_64__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

}  // namespace

TrainResult train_fusion(const TrainConfig& config, const PairSource& source,
                         const std::function<void(std::size_t, double)>& progress) {
    require(config.learning_rate > 0.0, "learning rate must be positive");
    require(config.huber_delta > 0.0, "Huber delta must be positive");
    require(config.batch_size > 0 && config.steps > 0, "batch size and step count must be positive");

    const FlushDenormals ftz;
    FusionNet net = FusionNet::initialize(config.seed, config.widths);
    MlpParams<float>& params = net.params();
    const std::size_t np = params.size();
    std::vector<float> grad(np), m(np, 0.0f), v(np, 0.0f);
    std::vector<float> inputs(config.batch_size * 6), targets(config.batch_size * 3);
    Workspace<float> ws;

    const auto warmup = static_cast<std::size_t>(config.warmup_fraction * static_cast<double>(config.steps));
    double loss = 0.0;
    for (std::size_t step = 0; step < config.steps; ++step) {
        const std::vector<TrainingPair> batch = source(config.batch_size);
        require(batch.size() == config.batch_size, "pair source returned the wrong batch size");
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const TrainingPair& p = batch[i];
            float* x = &inputs[i * 6];
            x[0] = p.ldr.r, x[1] = p.ldr.g, x[2] = p.ldr.b, x[3] = p.log.r, x[4] = p.log.g, x[5] = p.log.b;
            float* y = &targets[i * 3];
            y[0] = p.hdr.r, y[1] = p.hdr.g, y[2] = p.hdr.b;
        }
        loss = loss_and_gradient<float>(params, inputs, targets, static_cast<float>(config.huber_delta), grad, ws);
        if (!std::isfinite(loss)) {
            fail(ErrorCode::Divergence, "training diverged at step " + std::to_string(step));
        }

        double lr = config.learning_rate;
        if (step < warmup) {
            lr *= static_cast<double>(step + 1) / static_cast<double>(warmup);
        } else {
            const double t = static_cast<double>(step - warmup) / static_cast<double>(std::max<std::size_t>(1, config.steps - warmup));
            lr *= 0.5 * (1.0 + std::cos(kPi * t));
        }
        const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step + 1));
        const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step + 1));
        const auto b1 = static_cast<float>(config.beta1);
        const auto b2 = static_cast<float>(config.beta2);
        const auto step_size = static_cast<float>(lr / bc1);
        const auto inv_bc2 = static_cast<float>(1.0 / bc2);
        const auto eps = static_cast<float>(config.epsilon);
        for (std::size_t i = 0; i < np; ++i) {
            m[i] = b1 * m[i] + (1.0f - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0f - b2) * grad[i] * grad[i];
            params.values[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
        }
        if (progress) progress(step, loss);
    }
    if (!net.all_finite()) fail(ErrorCode::Divergence, "training produced non-finite parameters");
    return {std::move(net), loss};
}

TrainResult train_fusion(const TrainConfig& config) {
    return train_fusion(config, synthetic_pair_source(Rng::splitmix(config.seed ^ 0x5a5a5a5aULL), config.sampler));
}

namespace {

constexpr char kMagic[4] = {'L', 'X', 'F', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::filesystem::path fusion_sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path side = path;
    side += ".txt";
    return side;
}

void write_fusion_net(const std::filesystem::path& path, const FusionNet& net) {
    const MlpParams<float>& p = net.params();
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCode::Io, path.string() + ": cannot open for writing");
        out.write(kMagic, 4);
        put_u32(out, kVersion);
        put_u32(out, static_cast<std::uint32_t>(p.layer_count()));
        put_u32(out, static_cast<std::uint32_t>(p.size()));
        for (float v : p.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
        if (!out) fail(ErrorCode::Io, path.string() + ": write failed");
    }
    std::ofstream side(fusion_sidecar_path(path));
    if (!side) fail(ErrorCode::Io, fusion_sidecar_path(path).string() + ": cannot open for writing");
    side << "luxprobe fusion network v" << kVersion << "\nwidths";
    for (int w : p.widths) side << ' ' << w;
    side << "\nhidden leaky_relu " << kLeakySlope << "\noutput softplus\n";
}

FusionNet read_fusion_net(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, path.string() + ": cannot open for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        fail(ErrorCode::Format, path.string() + ": not a fusion network file");
    }
    std::ifstream side(fusion_sidecar_path(path));
    if (!side) fail(ErrorCode::Io, fusion_sidecar_path(path).string() + ": missing layer-width sidecar");
    std::vector<int> widths;
    std::string line;
    while (std::getline(side, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "widths") {
            int w = 0;
            while (ls >> w) widths.push_back(w);
        }
    }
    if (widths.size() < 2) fail(ErrorCode::Format, fusion_sidecar_path(path).string() + ": no widths line");

    if (get_u32(&bytes[4]) != kVersion) fail(ErrorCode::Format, path.string() + ": unsupported version");
    MlpParams<float> params;
    try {
        params = MlpParams<float>(widths);
    } catch (const Error& e) {
        fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
    if (get_u32(&bytes[8]) != static_cast<std::uint32_t>(params.layer_count()) ||
        get_u32(&bytes[12]) != params.size() || bytes.size() != 16 + 4 * params.size()) {
        fail(ErrorCode::Format, path.string() + ": header does not match sidecar widths");
    }
    for (std::size_t i = 0; i < params.size(); ++i) params.values[i] = std::bit_cast<float>(get_u32(&bytes[16 + 4 * i]));
    try {
        return FusionNet(std::move(params));
    } catch (const Error& e) {
        fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
}

}  // namespace luxprobe
