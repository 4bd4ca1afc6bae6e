// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/projection.h"

#include <algorithm>
#include <array>
#include <string>

#include "luxprobe/envmap.h"
#include "parallel.h"

namespace luxprobe {
namespace {

double wrap_degrees(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    if (a >= 360.0) a -= 360.0;
    return a;
}

Vec3 orient(const CameraSpec& cam, Vec3 v) {
    const double e = deg_to_rad(cam.elevation_deg);
    const double ce = std::cos(e), se = std::sin(e);
    v = {v.x, v.y * ce - v.z * se, v.y * se + v.z * ce};
    const double a = deg_to_rad(cam.azimuth_deg);
    const double ca = std::cos(a), sa = std::sin(a);
    return {v.x * ca - v.z * sa, v.y, v.x * sa + v.z * ca};
}

// Rotates `v` towards `axis_dir` (a unit vector orthogonal to v) by `angle` radians.
Vec3 rotate_towards(const Vec3& v, const Vec3& axis_dir, double angle) {
    return v * std::cos(angle) + axis_dir * std::sin(angle);
}

}  // namespace

void validate(const CameraSpec& cam) {
    require(cam.fov_deg > 0.0 && cam.fov_deg < 180.0, "camera fov must lie in (0, 180) degrees");
    require(std::abs(cam.elevation_deg) < 90.0, "camera elevation must lie in (-90, 90) degrees");
    require(cam.width > 0 && cam.height > 0, "camera resolution must be positive");
    require(std::isfinite(cam.azimuth_deg), "camera azimuth must be finite");
}

Direction camera_ray(const CameraSpec& cam, double px, double py) {
    const double t = std::tan(deg_to_rad(cam.fov_deg) / 2.0);
    const double x = (2.0 * px / cam.width - 1.0) * t;
    const double y = -(2.0 * py / cam.height - 1.0) * t * cam.height / cam.width;
    return Direction::normalized(orient(cam, {x, y, -1.0}));
}

Direction camera_forward(const CameraSpec& cam) { return Direction::normalized(orient(cam, {0.0, 0.0, -1.0})); }

void direction_to_angles(const Direction& dir, double& azimuth_deg, double& elevation_deg) {
    elevation_deg = rad_to_deg(std::asin(std::clamp(dir.y(), -1.0, 1.0)));
    azimuth_deg = wrap_degrees(rad_to_deg(std::atan2(dir.x(), -dir.z())));
}

Image project_perspective(const Image& pano, const CameraSpec& cam) {
    validate(cam);
    require(pano.height() > 0 && pano.width() == 2 * pano.height(), "panorama must be a 2:1 equirectangular image");
    Image out(cam.width, cam.height);
    detail::parallel_for(cam.height, [&](int j) {
        for (int i = 0; i < cam.width; ++i) {
            out.at(i, j) = sample_direction(pano, camera_ray(cam, i + 0.5, j + 0.5));
        }
    });
    return out;
}

CameraSpec sample_camera(Rng& rng, const CameraRanges& r) {
    require(r.azimuth_min <= r.azimuth_max && r.elevation_min <= r.elevation_max && r.fov_min <= r.fov_max,
            "camera ranges must be ordered");
    CameraSpec cam;
    cam.azimuth_deg = wrap_degrees(rng.uniform(r.azimuth_min, r.azimuth_max));
    cam.elevation_deg = rng.uniform(r.elevation_min, r.elevation_max);
    cam.fov_deg = rng.uniform(r.fov_min, r.fov_max);
    cam.width = r.width;
    cam.height = r.height;
    validate(cam);
    return cam;
}

Trajectory gen_trajectory(Rng& rng, int frame_count, const CameraSpec& start, double cone_deg) {
    require(frame_count >= 1, "trajectory needs at least one frame");
    require(cone_deg >= 0.0 && cone_deg < 90.0, "trajectory cone must lie in [0, 90) degrees");
    validate(start);

    Trajectory traj;
    traj.cone_deg = cone_deg;
    traj.frames.push_back(start);
    if (frame_count == 1) return traj;

    // Orthonormal frame around the start forward axis.
    const Vec3 f = camera_forward(start).vec();
    const Vec3 right = orient(start, {1.0, 0.0, 0.0});
    const Vec3 up = cross(right, f);

    // sqrt(u) spreads endpoints evenly over the cap's area for small cones.
    const double alpha = deg_to_rad(cone_deg) * std::sqrt(rng.uniform());
    const double psi = rng.uniform(0.0, kTwoPi);
    const Vec3 tangent = right * std::cos(psi) + up * std::sin(psi);

    for (int k = 1; k < frame_count; ++k) {
        const double t = (1.0 - std::cos(kPi * k / (frame_count - 1))) / 2.0;
        const Direction d = Direction::normalized(rotate_towards(f, tangent, t * alpha));
        CameraSpec cam = start;
        direction_to_angles(d, cam.azimuth_deg, cam.elevation_deg);
        validate(cam);
        traj.frames.push_back(cam);
    }
    return traj;
}

DatasetSample generate_sample(const std::vector<PanoSource>& sources, std::uint64_t seed, std::size_t index,
                              const DatasetOptions& options) {
    if (sources.empty()) fail(ErrorCode::Precondition, "dataset generation needs at least one panorama");
    require(options.video_frames >= 0, "video frame count must be non-negative");

    Rng rng = Rng::stream(seed, index);
    DatasetSample s;
    s.index = index;
    s.source = static_cast<std::size_t>(rng.below(sources.size()));
    const PanoSource& src = sources[s.source];

    const CameraSpec start = sample_camera(rng, options.ranges);
    if (options.video_frames > 0) {
        s.cameras = gen_trajectory(rng, options.video_frames, start, options.cone_deg).frames;
    } else {
        s.cameras = {start};
    }
    static constexpr std::array kCurves{ToneCurveKind::Gamma24sRGB, ToneCurveKind::ACESApprox,
                                        ToneCurveKind::FilmicApprox, ToneCurveKind::AgXApprox};
    const ToneCurve curve{kCurves[rng.below(kCurves.size())]};
    s.curve = src.hdr ? std::string(tone_curve_name(curve.kind)) : "identity";

    // One exposure per clip, measured on the first frame, so brightness does
    // not flicker across a trajectory.
    std::vector<Image> raw;
    raw.reserve(s.cameras.size());
    for (const CameraSpec& cam : s.cameras) raw.push_back(project_perspective(src.pano.image(), cam));
    s.exposure_scale = auto_expose(raw.front(), options.exposure_percentile, options.exposure_target).scale;

    for (Image& frame : raw) {
        for (Rgb& p : frame.pixels()) {
            for (std::size_t k = 0; k < 3; ++k) {
                const double v = p[k] * s.exposure_scale;
                p[k] = static_cast<float>(src.hdr ? curve.apply(v) : std::clamp(v, 0.0, 1.0));
            }
        }
        s.crops.push_back(quantize8(frame));
    }

    const EnvironmentMap aligned = rotate_env(src.pano, s.cameras.front().azimuth_deg);
    if (src.hdr) {
        s.target = tonemap_dual(aligned);
        s.has_log = true;
    } else {
        Image ldr = aligned.image();
        for (Rgb& p : ldr.pixels()) {
            for (std::size_t k = 0; k < 3; ++k) p[k] = std::clamp(p[k], 0.0f, 1.0f);
        }
        s.target = {std::move(ldr), Image()};
        s.has_log = false;
    }
    return s;
}

std::vector<DatasetSample> dataset_gen(const std::vector<PanoSource>& sources, std::uint64_t seed,
                                       std::size_t count, const DatasetOptions& options) {
    if (sources.empty()) fail(ErrorCode::Precondition, "dataset generation needs at least one panorama");
    std::vector<DatasetSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_sample(sources, seed, i, options));
    return out;
}

}  // namespace luxprobe
