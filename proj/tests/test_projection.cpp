// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "luxprobe/envmap.h"
#include "luxprobe/projection.h"

using namespace luxprobe;

namespace {

// Smooth, strictly positive panorama.
EnvironmentMap smooth_pano(int h) {
    EnvironmentMap env(2 * h, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < 2 * h; ++c) {
            const Direction d = pixel_to_direction(c, r, 2 * h, h);
            env.at(c, r) = {static_cast<float>(2.0 + d.x() + 0.5 * d.y()), static_cast<float>(2.0 - d.z()),
                            static_cast<float>(1.5 + 0.5 * d.x() * d.z())};
        }
    }
    return env;
}

}  // namespace

TEST_CASE("center ray is the forward axis") {
    const CameraSpec cam{0, 0, 60, 720, 480};
    const Direction d = camera_ray(cam, 360, 240);
    CHECK(d.x() == 0.0);
    CHECK(d.y() == 0.0);
    CHECK(d.z() == -1.0);
    const CameraSpec turned{90, 0, 60, 64, 32};
    CHECK(angle_between_deg(camera_ray(turned, 32, 16), camera_forward(turned)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fov 90 puts the horizontal edge at 45 degrees") {
    const CameraSpec cam{0, 0, 90, 640, 480};
    CHECK(angle_between_deg(camera_ray(cam, 0, 240), camera_forward(cam)) == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(angle_between_deg(camera_ray(cam, 640, 240), camera_forward(cam)) == doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("forward direction round trips through angles") {
    for (double az : {0.0, 45.0, 179.0, 300.0}) {
        for (double el : {-30.0, 0.0, 10.0}) {
            double a = 0.0, e = 0.0;
            direction_to_angles(camera_forward({az, el, 60, 8, 8}), a, e);
            CHECK(a == doctest::Approx(az).epsilon(1e-9));
            CHECK(e == doctest::Approx(el).epsilon(1e-9));
        }
    }
}

TEST_CASE("a positive azimuth looks towards +x") {
    const Direction d = camera_forward({90, 0, 60, 8, 8});
    CHECK(d.x() == doctest::Approx(1.0));
    CHECK(std::abs(d.z()) < 1e-12);
    CHECK(camera_forward({0, 20, 60, 8, 8}).y() > 0.0);
}

TEST_CASE("projection commutes with panorama rotation") {
    const EnvironmentMap pano = smooth_pano(128);
    for (double delta : {30.0, 47.3}) {
        const CameraSpec a{20, 5, 60, 96, 64};
        CameraSpec b = a;
        b.azimuth_deg += delta;
        const Image lhs = project_perspective(rotate_env(pano, delta).image(), a);
        const Image rhs = project_perspective(pano.image(), b);
        double worst = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                worst = std::max(worst, std::abs(double(lhs.pixels()[i][k]) - rhs.pixels()[i][k]) / rhs.pixels()[i][k]);
            }
        }
        CHECK(worst < 0.01);
    }
}

TEST_CASE("constant panorama projects to a constant") {
    const Image pano(64, 32, {0.25f, 0.5f, 4.0f});
    const Image out = project_perspective(pano, {123, -7, 70, 40, 30});
    for (const Rgb& p : out.pixels()) CHECK(p == Rgb{0.25f, 0.5f, 4.0f});
}

TEST_CASE("degenerate cameras are rejected") {
    const Image pano(8, 4);
    CHECK_THROWS_AS(project_perspective(pano, {0, 0, 0, 8, 8}), Error);
    CHECK_THROWS_AS(project_perspective(pano, {0, 0, 180, 8, 8}), Error);
    CHECK_THROWS_AS(project_perspective(pano, {0, 90, 60, 8, 8}), Error);
    CHECK_THROWS_AS(project_perspective(Image(8, 8), {}), Error);
}

TEST_CASE("camera sampling respects its ranges") {
    Rng rng(4);
    double mean_fov = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const CameraSpec c = sample_camera(rng);
        CHECK(c.azimuth_deg >= 0.0);
        CHECK(c.azimuth_deg < 360.0);
        CHECK(std::abs(c.elevation_deg) <= 10.0);
        CHECK(c.fov_deg >= 45.0);
        CHECK(c.fov_deg <= 80.0);
        mean_fov += c.fov_deg / n;
    }
    CHECK(mean_fov == doctest::Approx(62.5).epsilon(0.01));
    Rng a(9), b(9);
    CHECK(sample_camera(a) == sample_camera(b));
}

TEST_CASE("trajectories stay inside their cone") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        const CameraSpec start = sample_camera(rng);
        const Trajectory t = gen_trajectory(rng, 25, start, 15.0);
        REQUIRE(t.frames.size() == 25);
        const Direction f0 = camera_forward(t.frames.front());
        for (const CameraSpec& c : t.frames) {
            if (angle_between_deg(camera_forward(c), f0) > 15.0 + 1e-9) ++violations;
            if (c.fov_deg != start.fov_deg) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("trajectory easing is slow at the ends") {
    Rng rng(3);
    const Trajectory t = gen_trajectory(rng, 25, {10, 0, 60, 8, 8}, 15.0);
    auto step = [&](int k) {
        return angle_between_deg(camera_forward(t.frames[k]), camera_forward(t.frames[k + 1]));
    };
    CHECK(step(0) < step(12));
    CHECK(step(23) < step(12));
    CHECK(gen_trajectory(rng, 1, {}, 15.0).frames.size() == 1);
}

TEST_CASE("dataset samples") {
    std::vector<PanoSource> sources;
    sources.push_back({"hdr", smooth_pano(32), true});
    EnvironmentMap ldr(64, 32, {0.2f, 0.4f, 0.6f});
    sources.push_back({"ldr", ldr, false});

    DatasetOptions opts;
    opts.ranges.width = 24;
    opts.ranges.height = 16;
    const auto set = dataset_gen(sources, 17, 12, opts);
    bool saw_hdr = false, saw_ldr = false;
    for (const DatasetSample& s : set) {
        REQUIRE(s.crops.size() == 1);
        for (const Rgb& p : s.crops[0].pixels()) {
            for (std::size_t k = 0; k < 3; ++k) CHECK(p[k] == quantize8(p[k]));
        }
        CHECK(s.target.width() == 64);
        if (sources[s.source].hdr) {
            saw_hdr = true;
            CHECK(s.has_log);
            CHECK(s.curve != "identity");
            CHECK(s.target.log.width() == 64);
        } else {
            saw_ldr = true;
            CHECK_FALSE(s.has_log);
            CHECK(s.curve == "identity");
            CHECK(s.target.log.empty());
        }
    }
    CHECK(saw_hdr);
    CHECK(saw_ldr);

    // Samples come from per-index streams.
    const DatasetSample again = generate_sample(sources, 17, 5, opts);
    CHECK(again.crops[0] == set[5].crops[0]);
    CHECK(again.cameras == set[5].cameras);
    CHECK(again.target.ldr == set[5].target.ldr);

    opts.video_frames = 6;
    const DatasetSample clip = generate_sample(sources, 17, 0, opts);
    CHECK(clip.crops.size() == 6);
    CHECK(clip.cameras.size() == 6);

    CHECK_THROWS_AS(dataset_gen({}, 1, 1, opts), Error);
}
