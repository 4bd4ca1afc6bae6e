// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "luxprobe/image.h"
#include "luxprobe/random.h"
#include "luxprobe/tonemap.h"

namespace luxprobe {

inline constexpr double kLeakySlope = 0.01;

// Flat parameter storage of a dense network. Layer l stores its weight
// matrix row-major (widths[l+1] rows by widths[l] columns) followed by its
// bias vector. Hidden layers use LeakyReLU, the output layer softplus.
template <typename Scalar>
struct MlpParams {
    std::vector<int> widths;
    std::vector<Scalar> values;

    MlpParams() = default;
    explicit MlpParams(std::vector<int> layer_widths);

    int layer_count() const { return static_cast<int>(widths.size()) - 1; }
    std::size_t weight_offset(int layer) const;
    std::size_t bias_offset(int layer) const { return weight_offset(layer) + widths[layer + 1] * widths[layer]; }
    std::size_t size() const { return values.size(); }
};

extern template struct MlpParams<float>;
extern template struct MlpParams<double>;

// Column-major batch: `inputs` holds widths.front() values per sample,
// `outputs` receives widths.back() values per sample.
template <typename Scalar>
void mlp_forward(const MlpParams<Scalar>& net, std::span<const Scalar> inputs, std::span<Scalar> outputs);

// Mean Huber loss over every output element of the batch, and its exact
// gradient with respect to every parameter (written to `grad`, same layout
// as net.values).
template <typename Scalar>
Scalar mlp_loss_and_gradient(const MlpParams<Scalar>& net, std::span<const Scalar> inputs,
                             std::span<const Scalar> targets, Scalar delta, std::span<Scalar> grad);

double huber_loss(double pred, double target, double delta);

// Per-pixel fusion network mapping (ldr rgb, log rgb) to HDR rgb.
class FusionNet {
public:
    static const std::vector<int>& default_widths();

    // All-zero parameters.
    FusionNet();
    explicit FusionNet(MlpParams<float> params);

    // Uniform fan-in scaled initialization: every weight and bias of layer l
    // drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static FusionNet initialize(std::uint64_t seed, std::vector<int> widths = default_widths());

    const MlpParams<float>& params() const { return params_; }
    MlpParams<float>& params() { return params_; }

    bool all_finite() const;

private:
    MlpParams<float> params_;
};

Rgb fusion_forward(const FusionNet& net, const Rgb& ldr, const Rgb& log);

// Applies the network to every pixel.
EnvironmentMap fuse_image(const FusionNet& net, const DualToneMaps& maps);

struct TrainingPair {
    Rgb ldr;
    Rgb log;
    Rgb hdr;
};

struct SamplerOptions {
    double min_radiance = 1e-3;
    double max_radiance = 1e4;
    // Half-width, in natural-log units, of the per-channel chromaticity jitter.
    double hue_jitter = 0.25;
    double min_exposure_stops = -2.0;
    double max_exposure_stops = 2.0;
    // Probability that a pair's LDR inputs are snapped to the 8-bit grid.
    double quantize_probability = 1.0;
};

// Draws HDR colors with a log-uniform shared intensity, a per-channel
// chromaticity jitter and a random exposure, clamps them to the range the
// log channel can represent, and encodes them with the dual tonemap.
std::vector<TrainingPair> sample_training_pairs(Rng& rng, std::size_t count, const SamplerOptions& options = {});

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 4096;
    std::size_t steps = 20000;
    double huber_delta = 1.0;
    std::uint64_t seed = 0;
    SamplerOptions sampler;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Fraction of steps spent on linear warmup before cosine decay to zero.
    double warmup_fraction = 0.02;
    std::vector<int> widths = FusionNet::default_widths();
};

struct TrainResult {
    FusionNet net;
    double final_loss = 0.0;
};

// Produces `count` supervised pairs per call.
using PairSource = std::function<std::vector<TrainingPair>(std::size_t count)>;

PairSource synthetic_pair_source(std::uint64_t seed, const SamplerOptions& options);

// Mini-batch Adam on the mean Huber loss with a warmup plus cosine learning
// rate schedule. Throws ErrorCode::Divergence if the loss stops being finite.
TrainResult train_fusion(const TrainConfig& config, const PairSource& source,
                         const std::function<void(std::size_t step, double loss)>& progress = {});
TrainResult train_fusion(const TrainConfig& config);

// Binary layout: "LXFN", uint32 version, uint32 layer count, uint32 parameter
// count, then little-endian float32 parameters. Layer widths go to a text
// sidecar at `<path>.txt`.
void write_fusion_net(const std::filesystem::path& path, const FusionNet& net);
FusionNet read_fusion_net(const std::filesystem::path& path);
std::filesystem::path fusion_sidecar_path(const std::filesystem::path& path);

}  // namespace luxprobe
