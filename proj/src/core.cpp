// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/core.h"

#include <cstdlib>
#include <string>
#include <thread>

namespace luxprobe {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Precondition: return "precondition";
        case ErrorCode::NoPeak: return "no_peak";
        case ErrorCode::DegenerateExposure: return "degenerate_exposure";
        case ErrorCode::DegeneratePrediction: return "degenerate_prediction";
        case ErrorCode::NoQualifyingPixels: return "no_qualifying_pixels";
        case ErrorCode::ZeroMean: return "zero_mean";
        case ErrorCode::NonFinite: return "non_finite";
        case ErrorCode::Divergence: return "divergence";
        case ErrorCode::Io: return "io";
        case ErrorCode::Format: return "format";
        case ErrorCode::Usage: return "usage";
    }
    return "unknown";
}

Direction Direction::normalized(const Vec3& v) {
    const double len = length(v);
    if (!std::isfinite(len) || len == 0.0) {
        fail(ErrorCode::Precondition, "cannot normalize a zero or non-finite vector");
    }
    return Direction(v * (1.0 / len));
}

double angle_between_deg(const Direction& a, const Direction& b) {
    const double s = length(cross(a.vec(), b.vec()));
    const double c = dot(a.vec(), b.vec());
    return rad_to_deg(std::atan2(s, c));
}

unsigned worker_threads() {
    if (const char* env = std::getenv("LUXPROBE_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

}  // namespace luxprobe
