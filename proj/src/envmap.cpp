// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/envmap.h"

#include <algorithm>
#include <numeric>
#include <string>

namespace luxprobe {
namespace {

void require_equirect(int width, int height) {
    require(height > 0 && width == 2 * height,
            "equirectangular grid must satisfy width == 2 * height (got " + std::to_string(width) + "x" +
                std::to_string(height) + ")");
}

Vec3 spherical(double phi, double theta) {
    const double st = std::sin(theta);
    return {st * std::sin(phi), std::cos(theta), -st * std::cos(phi)};
}

int wrap(int i, int n) {
    const int m = i % n;
    return m < 0 ? m + n : m;
}

// Returns true and sets `shift` when yaw corresponds to a whole number of columns.
bool grid_aligned(double yaw_deg, int width, long& shift) {
    const double cols = yaw_deg * width / 360.0;
    const double rounded = std::round(cols);
    if (std::abs(cols - rounded) > 1e-9) return false;
    shift = static_cast<long>(rounded);
    return true;
}

}  // namespace

Direction pixel_to_direction(int col, int row, int width, int height) {
    require_equirect(width, height);
    require(col >= 0 && col < width && row >= 0 && row < height,
            "pixel (" + std::to_string(col) + ", " + std::to_string(row) + ") outside " + std::to_string(width) +
                "x" + std::to_string(height) + " map");
    const double phi = kTwoPi * (col + 0.5) / width - kPi;
    const double theta = kPi * (row + 0.5) / height;
    return Direction::normalized(spherical(phi, theta));
}

PixelCoord direction_to_pixel(const Direction& dir, int width, int height) {
    const double theta = std::acos(std::clamp(dir.y(), -1.0, 1.0));
    double row = theta * height / kPi - 0.5;
    row = std::clamp(row, 0.0, static_cast<double>(height - 1));

    if (dir.x() == 0.0 && dir.z() == 0.0) return {width / 2.0, row};

    const double phi = std::atan2(dir.x(), -dir.z());
    double col = (phi + kPi) * width / kTwoPi - 0.5;
    if (col < 0.0) col += width;
    if (col >= width) col -= width;
    return {col, row};
}

double solid_angle(int row, int width, int height) {
    require(row >= 0 && row < height, "row out of range");
    // Evaluate the southern half through its mirror row so the two
    // hemispheres agree bit for bit.
    if (2 * row >= height) row = height - 1 - row;
    const double top = kPi * row / height;
    const double bottom = kPi * (row + 1) / height;
    return (kTwoPi / width) * (std::cos(top) - std::cos(bottom));
}

Rgb sample_bilinear(const Image& image, double col, double row) {
    const int w = image.width();
    const int h = image.height();
    row = std::clamp(row, 0.0, static_cast<double>(h - 1));
    const double c0f = std::floor(col);
    const double r0f = std::floor(row);
    const double fc = col - c0f;
    const double fr = row - r0f;
    const int c0 = wrap(static_cast<int>(c0f), w);
    const int c1 = wrap(c0 + 1, w);
    const int r0 = static_cast<int>(r0f);
    const int r1 = std::min(r0 + 1, h - 1);

    const Rgb& a = image.at(c0, r0);
    const Rgb& b = image.at(c1, r0);
    const Rgb& c = image.at(c0, r1);
    const Rgb& d = image.at(c1, r1);
    const double wa = (1.0 - fc) * (1.0 - fr);
    const double wb = fc * (1.0 - fr);
    const double wc = (1.0 - fc) * fr;
    const double wd = fc * fr;
    Rgb out;
    for (std::size_t k = 0; k < 3; ++k) {
        // Skip zero-weight taps so a constant input reproduces itself exactly.
        double v = 0.0;
        if (wa != 0.0) v += wa * a[k];
        if (wb != 0.0) v += wb * b[k];
        if (wc != 0.0) v += wc * c[k];
        if (wd != 0.0) v += wd * d[k];
        out[k] = static_cast<float>(v);
    }
    return out;
}

Rgb sample_direction(const Image& image, const Direction& dir) {
    const PixelCoord p = direction_to_pixel(dir, image.width(), image.height());
    return sample_bilinear(image, p.col, p.row);
}

EnvironmentMap rotate_env(const EnvironmentMap& env, double yaw_deg) {
    const int w = env.width();
    const int h = env.height();
    EnvironmentMap out(w, h);

    long shift = 0;
    if (grid_aligned(yaw_deg, w, shift)) {
        const int k = static_cast<int>(shift % w);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) out.at(c, r) = env.at(wrap(c + k, w), r);
        }
        return out;
    }

    // Pure azimuthal shift: only the column coordinate is fractional.
    const double offset = yaw_deg * w / 360.0;
    const double base = std::floor(offset);
    const double frac = offset - base;
    const int k = wrap(static_cast<int>(std::fmod(base, static_cast<double>(w))), w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const Rgb& a = env.at(wrap(c + k, w), r);
            const Rgb& b = env.at(wrap(c + k + 1, w), r);
            Rgb& o = out.at(c, r);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                o[ch] = static_cast<float>((1.0 - frac) * a[ch] + frac * b[ch]);
            }
        }
    }
    return out;
}

Direction rotate_direction(const Direction& dir, double yaw_deg) {
    const double a = deg_to_rad(-yaw_deg);
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    const Vec3& v = dir.vec();
    return Direction::normalized({v.x * ca - v.z * sa, v.y, v.z * ca + v.x * sa});
}

DirectionMap::DirectionMap(int width, int height) : width_(width), height_(height) {
    require_equirect(width, height);
    dirs_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
}

DirectionMap gen_direction_map(int width, int height, double yaw_deg) {
    DirectionMap map(width, height);
    long shift = 0;
    if (grid_aligned(yaw_deg, width, shift)) {
        const int k = static_cast<int>(shift % width);
        for (int r = 0; r < height; ++r) {
            for (int c = 0; c < width; ++c) map.at(c, r) = pixel_to_direction(wrap(c + k, width), r, width, height);
        }
        return map;
    }
    const double yaw = deg_to_rad(yaw_deg);
    for (int r = 0; r < height; ++r) {
        const double theta = kPi * (r + 0.5) / height;
        for (int c = 0; c < width; ++c) {
            const double phi = kTwoPi * (c + 0.5) / width - kPi + yaw;
            map.at(c, r) = Direction::normalized(spherical(phi, theta));
        }
    }
    return map;
}

Image direction_map_image(const DirectionMap& map) {
    Image img(map.width(), map.height());
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            const Direction& d = map.at(c, r);
            img.at(c, r) = {static_cast<float>(d.x()), static_cast<float>(d.y()), static_cast<float>(d.z())};
        }
    }
    return img;
}

Direction peak_direction(const EnvironmentMap& env, double percentile) {
    require(percentile >= 0.0 && percentile <= 1.0, "peak percentile must lie in [0, 1]");
    const int w = env.width();
    const int h = env.height();
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

    std::vector<double> lum(n);
    std::vector<double> weight(n);
    double total_weight = 0.0;
    bool any_positive = false;
    for (int r = 0; r < h; ++r) {
        const double dw = solid_angle(r, w, h);
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            lum[i] = luminance(env.at(c, r));
            weight[i] = dw;
            total_weight += dw;
            any_positive = any_positive || lum[i] > 0.0;
        }
    }
    if (!any_positive) fail(ErrorCode::NoPeak, "no peak: environment map has no positive luminance");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return lum[a] != lum[b] ? lum[a] < lum[b] : a < b;
    });

    // Solid-angle-weighted nearest rank: first luminance whose cumulative
    // weight fraction reaches the percentile.
    double threshold = lum[order.back()];
    double cumulative = 0.0;
    for (std::size_t i : order) {
        cumulative += weight[i];
        if (cumulative >= percentile * total_weight) {
            threshold = lum[i];
            break;
        }
    }

    Vec3 sum;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (lum[i] <= 0.0 || lum[i] < threshold) continue;
            sum += pixel_to_direction(c, r, w, h).vec() * (lum[i] * weight[i]);
        }
    }
    if (length(sum) <= 1e-300) fail(ErrorCode::NoPeak, "no peak: bright pixels cancel out");
    return Direction::normalized(sum);
}

}  // namespace luxprobe
