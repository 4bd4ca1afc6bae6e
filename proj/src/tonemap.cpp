// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/tonemap.h"

#include <algorithm>
#include <vector>

namespace luxprobe {

double tonemap_ldr(double e) {
    // Grouped so that E = kLdrMax evaluates to exactly 1.
    return e * (1.0 + e / (kLdrMax * kLdrMax)) / (1.0 + e);
}

double tonemap_log(double e) { return std::log1p(e) / std::log1p(kLogMax); }

double inverse_ldr(double ldr) {
    const double a = 1.0 / (kLdrMax * kLdrMax);
    const double b = 1.0 - ldr;
    // Rationalized root, free of cancellation for small ldr.
    return 2.0 * ldr / (b + std::sqrt(b * b + 4.0 * a * ldr));
}

double inverse_log(double log_value) { return std::expm1(log_value * std::log1p(kLogMax)); }

double inverse_rule(double ldr, double log_value) {
    const double from_log = inverse_log(log_value);
    const double w = std::clamp((from_log - 8.0) / 8.0, 0.0, 1.0);
    if (w == 1.0) return from_log;
    const double from_ldr = inverse_ldr(ldr);
    if (w == 0.0) return from_ldr;
    return (1.0 - w) * from_ldr + w * from_log;
}

DualToneMaps tonemap_dual(const EnvironmentMap& env) {
    DualToneMaps out{Image(env.width(), env.height()), Image(env.width(), env.height())};
    const auto src = env.pixels();
    auto ldr = out.ldr.pixels();
    auto log = out.log.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double e = src[i][k];
            ldr[i][k] = static_cast<float>(std::clamp(tonemap_ldr(e), 0.0, 1.0));
            log[i][k] = static_cast<float>(std::clamp(tonemap_log(e), 0.0, 1.0));
        }
    }
    return out;
}

EnvironmentMap inverse_dual(const DualToneMaps& maps) {
    require(maps.ldr.width() == maps.log.width() && maps.ldr.height() == maps.log.height(),
            "ldr and log channels must share dimensions");
    Image out(maps.width(), maps.height());
    const auto ldr = maps.ldr.pixels();
    const auto log = maps.log.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) dst[i][k] = static_cast<float>(inverse_rule(ldr[i][k], log[i][k]));
    }
    return EnvironmentMap(std::move(out));
}

namespace {

double aces_fit(double x) {
    // Narkowicz 2015 fit of the ACES RRT+ODT.
    return (x * (2.51 * x + 0.03)) / (x * (2.43 * x + 0.59) + 0.14);
}

double hable(double x) {
    constexpr double A = 0.15, B = 0.50, C = 0.10, D = 0.20, E = 0.02, F = 0.30;
    return ((x * (A * x + C * B) + D * E) / (x * (A * x + B) + D * F)) - E / F;
}

double agx_contrast(double x) {
    // Sixth-order fit of the AgX default contrast curve, applied per channel
    // on a log2 encoding spanning [-12.47393, 4.026069] stops.
    constexpr double kMinEv = -12.47393;
    constexpr double kMaxEv = 4.026069;
    const double ev = x > 0.0 ? std::clamp(std::log2(x), kMinEv, kMaxEv) : kMinEv;
    const double t = (ev - kMinEv) / (kMaxEv - kMinEv);
    const double t2 = t * t;
    const double t4 = t2 * t2;
    return 15.5 * t4 * t2 - 40.14 * t4 * t + 31.96 * t4 - 6.868 * t2 * t + 0.4298 * t2 + 0.1191 * t - 0.00232;
}

double encode(double v, double gamma) { return std::pow(std::clamp(v, 0.0, 1.0), 1.0 / gamma); }

}  // namespace

double ToneCurve::apply(double x) const {
    if (!(x > 0.0)) return 0.0;
    switch (kind) {
        case ToneCurveKind::Gamma24sRGB:
            return encode(x, 2.4);
        case ToneCurveKind::ACESApprox:
            return encode(aces_fit(x), gamma);
        case ToneCurveKind::FilmicApprox:
            // Exposure bias of 2 as in the original Uncharted 2 operator.
            return encode(hable(2.0 * x) / hable(filmic_white), gamma);
        case ToneCurveKind::AgXApprox:
            return std::clamp(agx_contrast(x), 0.0, 1.0);
    }
    return 0.0;
}

std::string_view tone_curve_name(ToneCurveKind kind) {
    switch (kind) {
        case ToneCurveKind::Gamma24sRGB: return "gamma24";
        case ToneCurveKind::ACESApprox: return "aces";
        case ToneCurveKind::FilmicApprox: return "filmic";
        case ToneCurveKind::AgXApprox: return "agx";
    }
    return "unknown";
}

ToneCurve parse_tone_curve(std::string_view name) {
    for (auto kind : {ToneCurveKind::Gamma24sRGB, ToneCurveKind::ACESApprox, ToneCurveKind::FilmicApprox,
                      ToneCurveKind::AgXApprox}) {
        if (tone_curve_name(kind) == name) return ToneCurve{kind};
    }
    fail(ErrorCode::Usage, "unknown tone curve '" + std::string(name) + "' (expected gamma24|aces|filmic|agx)");
}

Image apply_display_tonemap(const Image& img, const ToneCurve& curve) {
    Image out(img.width(), img.height());
    const auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) dst[i][k] = static_cast<float>(curve.apply(src[i][k]));
    }
    return out;
}

double percentile_nearest_rank(std::span<const double> values, double p) {
    require(!values.empty(), "percentile of an empty set");
    require(p >= 0.0 && p <= 1.0, "percentile must lie in [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    const auto n = static_cast<long>(sorted.size());
    // The small slack keeps products like 0.99 * 100 from rounding up a rank.
    long rank = static_cast<long>(std::ceil(p * static_cast<double>(n) - 1e-9));
    rank = std::clamp(rank, 1L, n);
    std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
    return sorted[static_cast<std::size_t>(rank - 1)];
}

Exposure auto_expose(const Image& img, double percentile, double target) {
    std::vector<double> lum(img.size());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) lum[i] = luminance(px[i]);
    const double reference = percentile_nearest_rank(lum, percentile);
    if (!(reference > 0.0)) {
        fail(ErrorCode::DegenerateExposure, "degenerate exposure: luminance percentile is zero");
    }
    Exposure out{target / reference, Image(img.width(), img.height())};
    auto dst = out.image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) dst[i][k] = static_cast<float>(px[i][k] * out.scale);
    }
    return out;
}

float quantize8(float v) {
    // std::round rounds half away from zero.
    return static_cast<float>(std::round(static_cast<double>(v) * 255.0) / 255.0);
}

Image quantize8(const Image& img) {
    Image out = img;
    for (Rgb& p : out.pixels()) {
        for (std::size_t k = 0; k < 3; ++k) p[k] = quantize8(p[k]);
    }
    return out;
}

}  // namespace luxprobe
