// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/image.h"

#include <string>
#include <utility>

namespace luxprobe {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    require(width > 0 && height > 0, "image dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

bool Image::all_finite_nonnegative() const {
    for (const Rgb& p : pixels_) {
        for (std::size_t c = 0; c < 3; ++c) {
            if (!std::isfinite(p[c]) || p[c] < 0.0f) return false;
        }
    }
    return true;
}

EnvironmentMap::EnvironmentMap(int width, int height, Rgb fill)
    : EnvironmentMap(Image(width, height, fill)) {}

EnvironmentMap::EnvironmentMap(Image image) : image_(std::move(image)) {
    require(image_.width() == 2 * image_.height(),
            "environment map width must be twice its height (got " + std::to_string(image_.width()) + "x" +
                std::to_string(image_.height()) + ")");
    if (!image_.all_finite_nonnegative()) {
        fail(ErrorCode::NonFinite, "environment map radiance must be finite and non-negative");
    }
}

}  // namespace luxprobe
