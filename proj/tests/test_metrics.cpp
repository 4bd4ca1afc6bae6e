// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "luxprobe/envmap.h"
#include "luxprobe/metrics.h"
#include "luxprobe/random.h"

using namespace luxprobe;

namespace {

Image row_of(std::initializer_list<Rgb> px) {
    Image img(static_cast<int>(px.size()), 1);
    int i = 0;
    for (const Rgb& p : px) img.at(i++, 0) = p;
    return img;
}

Image random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Image img(w, h);
    for (Rgb& p : img.pixels()) {
        p = {static_cast<float>(rng.uniform(0.1, 2.0)), static_cast<float>(rng.uniform(0.1, 2.0)),
             static_cast<float>(rng.uniform(0.1, 2.0))};
    }
    return img;
}

Image scaled(const Image& img, float s) {
    Image out = img;
    for (Rgb& p : out.pixels()) p = {p.r * s, p.g * s, p.b * s};
    return out;
}

// Dim sky with a bright compact blob centered at (azimuth, polar) in degrees.
EnvironmentMap hot_spot(int h, double az_deg, double polar_deg) {
    EnvironmentMap env(2 * h, h);
    const double t = deg_to_rad(polar_deg), p = deg_to_rad(az_deg);
    const Direction sun = Direction::normalized({std::sin(t) * std::sin(p), std::cos(t), -std::sin(t) * std::cos(p)});
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < 2 * h; ++c) {
            const double a = deg_to_rad(angle_between_deg(pixel_to_direction(c, r, 2 * h, h), sun));
            const auto v = static_cast<float>(0.2 + 1000.0 * std::exp(-a * a / (2.0 * 0.03 * 0.03)));
            env.at(c, r) = {v, v, v};
        }
    }
    return env;
}

}  // namespace

TEST_CASE("si-RMSE") {
    const Image a = random_image(6, 5, 1);
    const Image b = random_image(6, 5, 2);
    CHECK(si_rmse(a, a) == doctest::Approx(0.0));
    CHECK(si_rmse(scaled(a, 2.0f), a) < 1e-6);
    CHECK(std::abs(si_rmse(scaled(a, 7.5f), b) - si_rmse(a, b)) < 1e-6);

    // Single channel hand example: pred (1, 0), gt (0, 1).
    const Image p = row_of({{1, 0, 0}, {0, 0, 0}});
    const Image g = row_of({{0, 0, 0}, {1, 0, 0}});
    // Pooled over three channels: only one residual of -1 among six values.
    CHECK(si_rmse(p, g) == doctest::Approx(std::sqrt(1.0 / 6.0)));
    const Image p1 = row_of({{1, 1, 1}, {0, 0, 0}});
    const Image g1 = row_of({{0, 0, 0}, {1, 1, 1}});
    CHECK(si_rmse(p1, g1) == doctest::Approx(0.70711).epsilon(1e-5));

    try {
        si_rmse(Image(2, 1), g);
        FAIL("expected DegeneratePrediction");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegeneratePrediction);
    }
}

TEST_CASE("angular error") {
    const Image a = random_image(4, 4, 3);
    const Image b = random_image(4, 4, 4);
    CHECK(angular_error(a, a) == 0.0);
    CHECK(angular_error(row_of({{1, 1, 0}}), row_of({{1, 0, 0}})) == doctest::Approx(45.0).epsilon(1e-8));
    CHECK(angular_error(row_of({{1, 0, 0}}), row_of({{0, 1, 0}})) == doctest::Approx(90.0));
    CHECK(angular_error(a, b) == doctest::Approx(angular_error(b, a)).epsilon(1e-12));
    CHECK(angular_error(scaled(a, 3.0f), scaled(b, 0.5f)) == doctest::Approx(angular_error(a, b)).epsilon(1e-6));
    // Black pixels are skipped, not counted as zero.
    CHECK(angular_error(row_of({{1, 1, 0}, {0, 0, 0}}), row_of({{1, 0, 0}, {1, 0, 0}})) == doctest::Approx(45.0));
    try {
        angular_error(Image(2, 1), Image(2, 1));
        FAIL("expected NoQualifyingPixels");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoQualifyingPixels);
    }
}

TEST_CASE("n-RMSE") {
    const Image a = random_image(5, 3, 5);
    const Image b = random_image(5, 3, 6);
    CHECK(n_rmse(a, a) == 0.0);
    CHECK(n_rmse(scaled(a, 4.0f), a) < 1e-6);
    CHECK(n_rmse(scaled(a, 4.0f), scaled(b, 0.25f)) == doctest::Approx(n_rmse(a, b)).epsilon(1e-6));
    CHECK(n_rmse(row_of({{2, 2, 2}, {0, 0, 0}}), row_of({{1, 1, 1}, {1, 1, 1}})) == doctest::Approx(1.0));
    try {
        n_rmse(Image(2, 1), Image(2, 1, {1, 1, 1}));
        FAIL("expected ZeroMean");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroMean);
    }
}

TEST_CASE("masks select the evaluated pixels") {
    const Image p = row_of({{1, 1, 1}, {5, 0, 0}});
    const Image g = row_of({{2, 2, 2}, {0, 0, 9}});
    const std::vector<std::uint8_t> mask{1, 0};
    CHECK(si_rmse(p, g, mask) < 1e-7);
    CHECK(angular_error(p, g, mask) == 0.0);
    CHECK(n_rmse(p, g, mask) < 1e-7);
    const std::vector<std::uint8_t> none{0, 0};
    CHECK_THROWS_AS(si_rmse(p, g, none), Error);
    const std::vector<std::uint8_t> wrong{1};
    CHECK_THROWS_AS(si_rmse(p, g, wrong), Error);
}

TEST_CASE("temporal statistics") {
    const std::vector<double> constant(25, 3.5);
    CHECK(temporal_stats(constant).std == 0.0);
    CHECK(temporal_stats(std::vector<double>(25, 0.37)).std == 0.0);
    const std::vector<double> two{1.0, 3.0};
    CHECK(temporal_stats(two).mean == 2.0);
    CHECK(temporal_stats(two).std == 1.0);
    const std::vector<double> one{4.0};
    CHECK(temporal_stats(one).std == 0.0);
    CHECK_THROWS_AS(temporal_stats(std::vector<double>{}), Error);
}

TEST_CASE("peak angular error") {
    const EnvironmentMap gt = hot_spot(64, 20.0, 90.0);
    CHECK(peak_angular_error(gt, gt) == 0.0);
    const double step = 180.0 / 64;
    for (double d : {30.0, 90.0}) {
        CHECK(std::abs(peak_angular_error(rotate_env(gt, d), gt) - d) <= step);
    }
    const EnvironmentMap anti = hot_spot(64, 200.0, 90.0);
    CHECK(std::abs(peak_angular_error(anti, gt) - 180.0) <= step);
    CHECK(peak_angular_error(anti, gt) == doctest::Approx(peak_angular_error(gt, anti)));
}

TEST_CASE("three-sphere evaluation") {
    const EnvironmentMap gt = hot_spot(32, 40.0, 70.0);

    const MetricReport same = evaluate_three_spheres(gt, gt, 32);
    REQUIRE(same.materials.size() == 3);
    for (const auto& [name, m] : same.materials) {
        CHECK(m.si_rmse == 0.0);
        CHECK(m.angular_deg == 0.0);
        CHECK(m.n_rmse == 0.0);
    }
    CHECK(*same.pae_deg == 0.0);

    EnvironmentMap tripled = gt;
    for (Rgb& p : tripled.pixels()) p = {3 * p.r, 3 * p.g, 3 * p.b};
    const MetricReport scale = evaluate_three_spheres(tripled, gt, 32);
    for (const auto& [name, m] : scale.materials) {
        CHECK(m.si_rmse < 1e-4);
        CHECK(m.angular_deg < 1e-3);
        CHECK(m.n_rmse < 1e-5);
    }
    CHECK(*scale.pae_deg < 1e-6);

    const MetricReport turned = evaluate_three_spheres(rotate_env(gt, 30.0), gt, 32);
    CHECK(std::abs(*turned.pae_deg - 30.0) <= 180.0 / 32);
    CHECK(turned.materials.at("mirror").si_rmse > turned.materials.at("diffuse").si_rmse);
}

TEST_CASE("sequence evaluation and report schema") {
    const EnvironmentMap gt = hot_spot(16, 10.0, 80.0);
    const std::vector<EnvironmentMap> g{gt, gt, gt};
    const std::vector<EnvironmentMap> p{gt, rotate_env(gt, 22.5), gt};
    const MetricReport r = evaluate_sequence(p, g, 16);
    CHECK(r.temporal.at("pae_deg").mean == doctest::Approx(*r.pae_deg));
    CHECK(r.temporal.at("pae_deg").std > 0.0);
    CHECK(r.materials.at("mirror").si_rmse == doctest::Approx(r.temporal.at("mirror.si_rmse").mean));

    const auto j = nlohmann::json::parse(r.to_json());
    for (const char* m : {"diffuse", "matte", "mirror"}) {
        CHECK(j["materials"][m]["si_rmse"].is_number_float());
        CHECK(j["materials"][m]["angular_deg"].is_number_float());
        CHECK(j["materials"][m]["n_rmse"].is_number_float());
    }
    CHECK(j["pae_deg"].is_number_float());
    CHECK(j["temporal"]["diffuse.n_rmse"]["std"].is_number_float());
    CHECK_THROWS_AS(evaluate_sequence(p, {gt}, 16), Error);
}
