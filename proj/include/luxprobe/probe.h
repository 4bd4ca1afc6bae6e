// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "luxprobe/image.h"

namespace luxprobe {

enum class MaterialKind { MirrorBall, MatteSilver, GrayDiffuse };

struct Material {
    MaterialKind kind = MaterialKind::MirrorBall;
    Rgb albedo{1.0f, 1.0f, 1.0f};
    double exponent = 64.0;  // Phong lobe, MatteSilver only

    static Material mirror() { return {MaterialKind::MirrorBall, {1.0f, 1.0f, 1.0f}}; }
    static Material matte_silver() { return {MaterialKind::MatteSilver, {0.9f, 0.9f, 0.9f}, 64.0}; }
    static Material gray_diffuse() { return {MaterialKind::GrayDiffuse, {0.5f, 0.5f, 0.5f}}; }
};

// "mirror", "matte", "diffuse".
std::string_view material_name(MaterialKind kind);

// Rows at which prefiltered maps are computed (capped for cost).
inline constexpr int kPrefilterRows = 64;

// Irradiance E(n) = sum over all texels of L(w) max(0, n.w) dOmega, at
// `out_height` rows. Each output texel sums its inputs in a fixed serial order.
EnvironmentMap prefilter_diffuse(const EnvironmentMap& env, int out_height);

// Normalized Phong lobe: sum L(w) max(0, r.w)^n dOmega / sum max(0, r.w)^n dOmega.
// Texels whose lobe weight falls below 1e-8 of the peak are skipped.
EnvironmentMap prefilter_glossy(const EnvironmentMap& env, double exponent, int out_height);

struct ProbeImage {
    Image pixels;
    std::vector<std::uint8_t> mask;  // row-major, 1 inside the sphere's disc

    int size() const { return pixels.width(); }
    bool inside(int col, int row) const {
        return mask[static_cast<std::size_t>(row) * static_cast<std::size_t>(size()) + static_cast<std::size_t>(col)] != 0;
    }
};

// Orthographic view of a unit sphere along -z. Pixel (i, j) maps to disc
// coordinates u = 2(i + 0.5)/size - 1, v = 1 - 2(j + 0.5)/size.
ProbeImage render_probe(const EnvironmentMap& env, const Material& material, int size);

std::vector<ProbeImage> render_probe_sequence(const std::vector<EnvironmentMap>& envs, const Material& material,
                                              int size);

}  // namespace luxprobe
