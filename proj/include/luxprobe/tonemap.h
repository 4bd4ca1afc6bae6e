// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "luxprobe/image.h"

namespace luxprobe {

// Radiance that the extended-Reinhard channel maps to exactly 1.
inline constexpr double kLdrMax = 16.0;
// Radiance that the log channel maps to exactly 1.
inline constexpr double kLogMax = 10000.0;

// Extended Reinhard: E / (1 + E) * (1 + E / kLdrMax^2), unclipped.
double tonemap_ldr(double radiance);
// log(1 + E) / log(1 + kLogMax), unclipped.
double tonemap_log(double radiance);

// Positive root of E^2 / kLdrMax^2 + E (1 - ldr) - ldr = 0.
double inverse_ldr(double ldr);
// (1 + kLogMax)^log - 1.
double inverse_log(double log_value);

// Rule-based fusion of the two channels. The log-channel estimate E_L picks
// the regime: below 8 the Reinhard inverse is used, above 16 the log inverse,
// and in between the two are blended linearly with w = (E_L - 8) / 8.
double inverse_rule(double ldr, double log_value);

struct DualToneMaps {
    Image ldr;
    Image log;

    int width() const { return ldr.width(); }
    int height() const { return ldr.height(); }
};

// Both channels per pixel and per color channel, clipped to [0, 1].
DualToneMaps tonemap_dual(const EnvironmentMap& env);

// Per-pixel inverse_rule. Channel dimensions must agree and form a 2:1 map.
EnvironmentMap inverse_dual(const DualToneMaps& maps);

enum class ToneCurveKind { Gamma24sRGB, ACESApprox, FilmicApprox, AgXApprox };

// Display transform for turning linear radiance into LDR training crops.
// Each curve is monotone non-decreasing on [0, inf) and maps 0 to 0. The
// analytic fits and their coefficients are listed in docs/tone_curves.md.
struct ToneCurve {
    ToneCurveKind kind = ToneCurveKind::Gamma24sRGB;
    // Display encoding exponent applied after the ACES and Filmic fits.
    double gamma = 2.4;
    // Linear white point of the Filmic fit.
    double filmic_white = 11.2;

    static ToneCurve gamma24() { return {ToneCurveKind::Gamma24sRGB}; }
    static ToneCurve aces() { return {ToneCurveKind::ACESApprox}; }
    static ToneCurve filmic() { return {ToneCurveKind::FilmicApprox}; }
    static ToneCurve agx() { return {ToneCurveKind::AgXApprox}; }

    // Maps one linear value to a display value in [0, 1].
    double apply(double x) const;
};

// "gamma24", "aces", "filmic", "agx".
std::string_view tone_curve_name(ToneCurveKind kind);
ToneCurve parse_tone_curve(std::string_view name);

Image apply_display_tonemap(const Image& img, const ToneCurve& curve);

// Nearest-rank percentile (1-based rank ceil(p * n), clamped to [1, n]).
double percentile_nearest_rank(std::span<const double> values, double p);

struct Exposure {
    double scale = 1.0;
    Image image;
};

// Scales `img` so the luminance at `percentile` becomes `target`.
Exposure auto_expose(const Image& img, double percentile, double target);

// Snaps to the 8-bit grid: round(v * 255) / 255 with ties away from zero.
float quantize8(float v);
Image quantize8(const Image& img);

}  // namespace luxprobe
