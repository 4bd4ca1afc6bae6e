// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "luxprobe/image.h"

namespace luxprobe {

// Portable float map. Files store rows bottom-to-top as little-endian float32
// RGB; images in memory are top-row-first. Greyscale ("Pf") and big-endian
// files are accepted on read.
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Image& image);

// Radiance RGBE (.hdr), flat or new-style run-length encoded.
Image read_rgbe(const std::filesystem::path& path);

// Reads .pfm or .hdr by extension.
Image read_hdr_image(const std::filesystem::path& path);
EnvironmentMap read_environment_map(const std::filesystem::path& path);

struct Png {
    Image image;                      // values on the 8-bit grid, in [0, 1]
    std::optional<std::string> curve; // "luxprobe:tonecurve" text chunk, if present
};

// 8-bit RGB PNG tagged sRGB. Values are clipped to [0, 1] and rounded half
// away from zero, so a quantize8'd image is stored losslessly. `curve` names
// the tone curve the values were produced with.
void write_png(const std::filesystem::path& path, const Image& image, const std::string& curve);
Png read_png(const std::filesystem::path& path);

}  // namespace luxprobe
