// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "luxprobe/image.h"

namespace luxprobe {

// Equirectangular convention used throughout the library:
//   azimuth  phi   = 2*pi*(col + 0.5)/width - pi      (phi = 0 is camera forward, -z)
//   polar    theta = pi*(row + 0.5)/height            (row 0 is the +y pole)
//   direction      = (sin(theta) sin(phi), cos(theta), -sin(theta) cos(phi))

struct PixelCoord {
    double col = 0.0;
    double row = 0.0;
};

Direction pixel_to_direction(int col, int row, int width, int height);

// Continuous inverse of pixel_to_direction. `col` is wrapped into
// [0, width); `row` is clamped to [0, height - 1]. Exact poles report
// col = width / 2.
PixelCoord direction_to_pixel(const Direction& dir, int width, int height);

// Solid angle of any pixel in `row`, in steradians.
double solid_angle(int row, int width, int height);

// Bilinear lookup with azimuthal wraparound and clamping at the poles.
// Interpolation runs in double precision.
Rgb sample_bilinear(const Image& image, double col, double row);
Rgb sample_direction(const Image& image, const Direction& dir);

// Rotates the panorama about the vertical axis so that
// rotated(phi) = env(phi + yaw). Grid-aligned yaws are exact column rolls.
EnvironmentMap rotate_env(const EnvironmentMap& env, double yaw_deg);

// Direction whose image under rotate_env(., yaw_deg) is `dir`'s feature,
// i.e. the azimuth of `dir` decreased by yaw_deg.
Direction rotate_direction(const Direction& dir, double yaw_deg);

class DirectionMap {
public:
    DirectionMap(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    Direction& at(int col, int row) { return dirs_[index(col, row)]; }
    const Direction& at(int col, int row) const { return dirs_[index(col, row)]; }

    friend bool operator==(const DirectionMap&, const DirectionMap&) = default;

private:
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_;
    int height_;
    std::vector<Direction> dirs_;
};

// Per-pixel lighting directions, azimuth offset by `yaw_deg` using the same
// convention as rotate_env.
DirectionMap gen_direction_map(int width, int height, double yaw_deg);

// Stores direction components as an RGB image (x, y, z) for inspection.
Image direction_map_image(const DirectionMap& map);

// Centroid direction of the brightest pixels: those whose luminance is at or
// above the solid-angle-weighted `percentile` of the map, averaged with
// weights luminance * solid angle.
Direction peak_direction(const EnvironmentMap& env, double percentile = 0.999);

}  // namespace luxprobe
