// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "luxprobe/image.h"
#include "luxprobe/probe.h"

namespace luxprobe {

// Per-pixel selection; an empty mask selects every pixel.
using Mask = std::span<const std::uint8_t>;

// RMSE after the least-squares scale alpha = sum(pred gt) / sum(pred^2),
// pooled over masked pixels and all three channels.
double si_rmse(const Image& pred, const Image& gt, Mask mask = {});

// Mean angle, in degrees, between per-pixel RGB vectors. Pixels where
// either norm is below 1e-8 are skipped.
double angular_error(const Image& pred, const Image& gt, Mask mask = {});

// RMSE after scaling each image to unit mean intensity over the mask.
double n_rmse(const Image& pred, const Image& gt, Mask mask = {});

// Great-circle angle between the peak directions of two maps, in degrees.
double peak_angular_error(const EnvironmentMap& pred, const EnvironmentMap& gt);

struct TemporalStats {
    double mean = 0.0;
    double std = 0.0;  // population: divides by N
};

TemporalStats temporal_stats(std::span<const double> values);

struct SphereMetrics {
    double si_rmse = 0.0;
    double angular_deg = 0.0;
    double n_rmse = 0.0;
};

struct MetricReport {
    std::map<std::string, SphereMetrics> materials;  // "diffuse", "matte", "mirror"
    std::optional<double> pae_deg;
    // Metric name ("diffuse.si_rmse", "pae_deg", ...) to statistics over frames.
    std::map<std::string, TemporalStats> temporal;

    std::string to_json() const;
};

MetricReport evaluate_three_spheres(const EnvironmentMap& pred, const EnvironmentMap& gt, int probe_size = 256);

// Per-frame evaluation followed by temporal statistics of every metric.
// The reported per-material values are the frame means.
MetricReport evaluate_sequence(const std::vector<EnvironmentMap>& pred, const std::vector<EnvironmentMap>& gt,
                               int probe_size = 256);

}  // namespace luxprobe
