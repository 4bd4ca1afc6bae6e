// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "luxprobe/image.h"
#include "luxprobe/random.h"
#include "luxprobe/tonemap.h"

namespace luxprobe {

// Pinhole camera looking into a panorama. `fov_deg` is the horizontal field
// of view; the vertical one follows from the aspect ratio.
struct CameraSpec {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double fov_deg = 60.0;
    int width = 720;
    int height = 480;

    friend bool operator==(const CameraSpec&, const CameraSpec&) = default;
};

// Throws Precondition unless 0 < fov < 180, |elevation| < 90 and the size is positive.
void validate(const CameraSpec& cam);

// World-space ray through continuous pixel position (px, py), where pixel
// (i, j) spans [i, i+1) x [j, j+1). Elevation pitches the camera about its x
// axis first, then azimuth yaws it about the world y axis.
Direction camera_ray(const CameraSpec& cam, double px, double py);
Direction camera_forward(const CameraSpec& cam);

// Azimuth in [0, 360) and elevation of a world direction, the inverse of
// camera_forward for a camera without roll.
void direction_to_angles(const Direction& dir, double& azimuth_deg, double& elevation_deg);

// Bilinear resampling of an equirectangular image (HDR or LDR) through `cam`.
Image project_perspective(const Image& pano, const CameraSpec& cam);

struct CameraRanges {
    double azimuth_min = 0.0, azimuth_max = 360.0;
    double elevation_min = -10.0, elevation_max = 10.0;
    double fov_min = 45.0, fov_max = 80.0;
    int width = 720;
    int height = 480;
};

// Uniform draws within `ranges`; azimuth is wrapped into [0, 360).
CameraSpec sample_camera(Rng& rng, const CameraRanges& ranges = {});

struct Trajectory {
    std::vector<CameraSpec> frames;
    double cone_deg = 15.0;
};

// Picks an end orientation uniformly over the spherical cap of half-angle
// `cone_deg` around `start`, then moves along the great circle towards it with
// cosine easing. The field of view stays fixed.
Trajectory gen_trajectory(Rng& rng, int frame_count, const CameraSpec& start, double cone_deg = 15.0);

struct PanoSource {
    std::string name;
    EnvironmentMap pano;
    // LDR panoramas are display-referred values in [0, 1] and have no log channel.
    bool hdr = true;
};

struct DatasetOptions {
    int video_frames = 0;  // 0 produces still crops
    CameraRanges ranges;
    double cone_deg = 15.0;
    double exposure_percentile = 0.99;
    double exposure_target = 0.9;
};

struct DatasetSample {
    std::size_t index = 0;
    std::size_t source = 0;
    std::vector<CameraSpec> cameras;
    std::string curve;  // "identity" for LDR sources
    double exposure_scale = 1.0;
    std::vector<Image> crops;  // on the 8-bit grid
    // Panorama rotated so azimuth 0 faces the first camera. `target.log` is
    // empty for LDR sources.
    DualToneMaps target;
    bool has_log = true;
};

// One sample, drawn from the stream Rng::stream(seed, index) so samples can
// be produced in any order.
DatasetSample generate_sample(const std::vector<PanoSource>& sources, std::uint64_t seed, std::size_t index,
                              const DatasetOptions& options = {});

std::vector<DatasetSample> dataset_gen(const std::vector<PanoSource>& sources, std::uint64_t seed,
                                       std::size_t count, const DatasetOptions& options = {});

}  // namespace luxprobe
