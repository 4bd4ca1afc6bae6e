// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/probe.h"

#include <algorithm>

#include "luxprobe/envmap.h"
#include "parallel.h"

namespace luxprobe {
namespace {

// Input texels flattened for the convolution loops.
struct Texels {
    int width = 0;
    int height = 0;
    std::vector<double> x, y, z;     // directions
    std::vector<double> r, g, b;     // radiance times solid angle
    std::vector<double> d_omega;
    std::vector<double> theta;       // polar angle per row
};

Texels gather(const EnvironmentMap& env) {
    Texels t;
    t.width = env.width();
    t.height = env.height();
    const std::size_t n = env.pixels().size();
    for (auto* v : {&t.x, &t.y, &t.z, &t.r, &t.g, &t.b, &t.d_omega}) v->resize(n);
    t.theta.resize(static_cast<std::size_t>(t.height));
    for (int row = 0; row < t.height; ++row) {
        const double dw = solid_angle(row, t.width, t.height);
        t.theta[static_cast<std::size_t>(row)] = kPi * (row + 0.5) / t.height;
        for (int col = 0; col < t.width; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * t.width + col;
            const Direction d = pixel_to_direction(col, row, t.width, t.height);
            const Rgb& L = env.at(col, row);
            t.x[i] = d.x();
            t.y[i] = d.y();
            t.z[i] = d.z();
            t.r[i] = L.r * dw;
            t.g[i] = L.g * dw;
            t.b[i] = L.b * dw;
            t.d_omega[i] = dw;
        }
    }
    return t;
}

void check_out_height(const EnvironmentMap& env, int out_height) {
    require(out_height >= 1 && out_height <= env.height(), "prefilter height must lie in [1, input height]");
}

}  // namespace

std::string_view material_name(MaterialKind kind) {
    switch (kind) {
        case MaterialKind::MirrorBall: return "mirror";
        case MaterialKind::MatteSilver: return "matte";
        case MaterialKind::GrayDiffuse: return "diffuse";
    }
    return "unknown";
}

EnvironmentMap prefilter_diffuse(const EnvironmentMap& env, int out_height) {
    check_out_height(env, out_height);
    const Texels t = gather(env);
    const int ow = 2 * out_height;
    EnvironmentMap out(ow, out_height);
    detail::parallel_for(out_height, [&](int orow) {
        const double theta_o = kPi * (orow + 0.5) / out_height;
        for (int ocol = 0; ocol < ow; ++ocol) {
            const Direction n = pixel_to_direction(ocol, orow, ow, out_height);
            double er = 0.0, eg = 0.0, eb = 0.0;
            for (int row = 0; row < t.height; ++row) {
                // No texel of this row faces n.
                if (std::cos(std::abs(t.theta[static_cast<std::size_t>(row)] - theta_o)) <= 0.0) continue;
                const std::size_t begin = static_cast<std::size_t>(row) * t.width;
                for (std::size_t i = begin; i < begin + static_cast<std::size_t>(t.width); ++i) {
                    const double c = n.x() * t.x[i] + n.y() * t.y[i] + n.z() * t.z[i];
                    if (c <= 0.0) continue;
                    er += c * t.r[i];
                    eg += c * t.g[i];
                    eb += c * t.b[i];
                }
            }
            out.at(ocol, orow) = {static_cast<float>(er), static_cast<float>(eg), static_cast<float>(eb)};
        }
    });
    return out;
}

EnvironmentMap prefilter_glossy(const EnvironmentMap& env, double exponent, int out_height) {
    check_out_height(env, out_height);
    require(exponent > 0.0, "glossy exponent must be positive");
    const Texels t = gather(env);
    const int ow = 2 * out_height;
    // Cosine below which max(0, cos)^n < 1e-8.
    const double cutoff = std::pow(1e-8, 1.0 / exponent);
    EnvironmentMap out(ow, out_height);
    detail::parallel_for(out_height, [&](int orow) {
        const double theta_o = kPi * (orow + 0.5) / out_height;
        for (int ocol = 0; ocol < ow; ++ocol) {
            const Direction dir = pixel_to_direction(ocol, orow, ow, out_height);
            double sr = 0.0, sg = 0.0, sb = 0.0, sw = 0.0;
            for (int row = 0; row < t.height; ++row) {
                if (std::cos(std::abs(t.theta[static_cast<std::size_t>(row)] - theta_o)) < cutoff) continue;
                const std::size_t begin = static_cast<std::size_t>(row) * t.width;
                for (std::size_t i = begin; i < begin + static_cast<std::size_t>(t.width); ++i) {
                    const double c = dir.x() * t.x[i] + dir.y() * t.y[i] + dir.z() * t.z[i];
                    if (c < cutoff) continue;
                    const double w = std::pow(c, exponent);
                    sr += w * t.r[i];
                    sg += w * t.g[i];
                    sb += w * t.b[i];
                    sw += w * t.d_omega[i];
                }
            }
            // A lobe narrower than the input grid can miss every texel; fall
            // back to the direct lookup.
            out.at(ocol, orow) = sw > 0.0 ? Rgb{static_cast<float>(sr / sw), static_cast<float>(sg / sw),
                                                static_cast<float>(sb / sw)}
                                          : sample_direction(env.image(), dir);
        }
    });
    return out;
}

ProbeImage render_probe(const EnvironmentMap& env, const Material& material, int size) {
    require(size >= 16, "probe size must be at least 16 pixels");
    require(material.exponent > 0.0, "material exponent must be positive");
    for (std::size_t k = 0; k < 3; ++k) {
        require(material.albedo[k] >= 0.0f && material.albedo[k] <= 1.0f, "albedo must lie in [0, 1]");
    }
    require(env.height() > 0, "environment map is empty");

    const int rows = std::min(env.height(), kPrefilterRows);
    EnvironmentMap filtered;
    switch (material.kind) {
        case MaterialKind::MirrorBall: break;
        case MaterialKind::MatteSilver: filtered = prefilter_glossy(env, material.exponent, rows); break;
        case MaterialKind::GrayDiffuse: filtered = prefilter_diffuse(env, rows); break;
    }

    ProbeImage probe{Image(size, size), std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 0)};
    detail::parallel_for(size, [&](int j) {
        const double v = 1.0 - 2.0 * (j + 0.5) / size;
        for (int i = 0; i < size; ++i) {
            const double u = 2.0 * (i + 0.5) / size - 1.0;
            const double rr = u * u + v * v;
            if (rr > 1.0) continue;
            probe.mask[static_cast<std::size_t>(j) * size + i] = 1;
            const Vec3 n{u, v, std::sqrt(1.0 - rr)};
            Rgb radiance;
            if (material.kind == MaterialKind::GrayDiffuse) {
                const Rgb e = sample_direction(filtered.image(), Direction::normalized(n));
                for (std::size_t k = 0; k < 3; ++k) radiance[k] = static_cast<float>(material.albedo[k] / kPi * e[k]);
            } else {
                // Reflect the eye direction (0, 0, 1) about n.
                const Direction r = Direction::normalized(n * (2.0 * n.z) - Vec3{0.0, 0.0, 1.0});
                const Rgb l = sample_direction(material.kind == MaterialKind::MirrorBall ? env.image() : filtered.image(), r);
                for (std::size_t k = 0; k < 3; ++k) radiance[k] = material.albedo[k] * l[k];
            }
            probe.pixels.at(i, j) = radiance;
        }
    });
    return probe;
}

std::vector<ProbeImage> render_probe_sequence(const std::vector<EnvironmentMap>& envs, const Material& material,
                                              int size) {
    require(!envs.empty(), "probe sequence needs at least one environment map");
    for (const EnvironmentMap& e : envs) {
        require(e.width() == envs.front().width() && e.height() == envs.front().height(),
                "sequence maps must share dimensions");
    }
    std::vector<ProbeImage> out;
    out.reserve(envs.size());
    for (const EnvironmentMap& e : envs) out.push_back(render_probe(e, material, size));
    return out;
}

}  // namespace luxprobe
