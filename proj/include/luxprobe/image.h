// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "luxprobe/core.h"

namespace luxprobe {

// Row-major RGB float grid, row 0 at the top.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    Rgb& at(int col, int row) { return pixels_[index(col, row)]; }
    const Rgb& at(int col, int row) const { return pixels_[index(col, row)]; }

    std::span<Rgb> pixels() { return pixels_; }
    std::span<const Rgb> pixels() const { return pixels_; }

    bool all_finite_nonnegative() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

// Equirectangular HDR radiance map. Width is always twice the height and
// every channel is finite and non-negative.
class EnvironmentMap {
public:
    EnvironmentMap() = default;
    EnvironmentMap(int width, int height, Rgb fill = {});
    // Validates the 2:1 aspect and radiance range of `image`.
    explicit EnvironmentMap(Image image);

    int width() const { return image_.width(); }
    int height() const { return image_.height(); }

    Rgb& at(int col, int row) { return image_.at(col, row); }
    const Rgb& at(int col, int row) const { return image_.at(col, row); }

    std::span<Rgb> pixels() { return image_.pixels(); }
    std::span<const Rgb> pixels() const { return image_.pixels(); }

    const Image& image() const { return image_; }

    friend bool operator==(const EnvironmentMap&, const EnvironmentMap&) = default;

private:
    Image image_;
};

}  // namespace luxprobe
