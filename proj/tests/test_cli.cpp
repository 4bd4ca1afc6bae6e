// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "luxprobe/cli.h"
#include "luxprobe/envmap.h"
#include "luxprobe/image_io.h"

using namespace luxprobe;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result lux(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "luxprobe_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

// Gradient radiance over [0.05, 5000] with a bright spot.
void write_test_env(const std::string& path) {
    EnvironmentMap env(64, 32);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 64; ++c) {
            const auto v = static_cast<float>(0.05 * std::pow(1e5, (c + 64.0 * r) / (64.0 * 32.0)));
            env.at(c, r) = {v, 0.5f * v, 0.25f * v + 0.05f};
        }
    }
    write_pfm(path, env.image());
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    return json::parse(in);
}

json without_timestamp(json j) {
    j.erase("timestamp");
    return j;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(lux({}).code == kExitUsage);
    const Result bogus = lux({"bogus"});
    CHECK(bogus.code == kExitUsage);
    CHECK(bogus.err.rfind("ERROR usage: ", 0) == 0);
    CHECK(lux({"rotate", "--env", "x.pfm"}).code == kExitUsage);  // missing --yaw and --out
    CHECK(lux({"rotate", "--nope", "1"}).code == kExitUsage);
    CHECK(lux({"--version"}).out == std::string(kVersion) + "\n");
}

TEST_CASE("data errors exit with 1 and name their code") {
    const Result r = lux({"rotate", "--env", p("missing.pfm"), "--yaw", "10", "--out", p("r.pfm")});
    CHECK(r.code == kExitDataError);
    CHECK(r.err.rfind("ERROR io: ", 0) == 0);
}

TEST_CASE("tonemap and inverse round trip") {
    write_test_env(p("env.pfm"));
    REQUIRE(lux({"tonemap", "--in", p("env.pfm"), "--out-ldr", p("ldr.png"), "--out-log", p("log.png")}).code == 0);
    REQUIRE(lux({"inverse", "--ldr", p("ldr.png"), "--log", p("log.png"), "--out", p("back.pfm")}).code == 0);
    const Image a = read_pfm(p("env.pfm"));
    const Image b = read_pfm(p("back.pfm"));
    std::vector<double> rel;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            rel.push_back(std::abs(b.pixels()[i][k] - a.pixels()[i][k]) / a.pixels()[i][k]);
        }
    }
    std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
    CHECK(rel[rel.size() / 2] < 0.02);

    const json m = read_json(p("ldr.png") + ".manifest.json");
    CHECK(m["command"] == "tonemap");
    CHECK(m["outputs"].size() == 2);
    CHECK(m["outputs"][0]["sha256"] == sha256_file(p("ldr.png")));
    CHECK(m["inputs"][0]["sha256"] == sha256_file(p("env.pfm")));
}

TEST_CASE("inverse rejects PNGs without dual tags") {
    write_test_env(p("env2.pfm"));
    REQUIRE(lux({"tonemap", "--in", p("env2.pfm"), "--tonemap", "aces", "--out", p("aces.png")}).code == 0);
    REQUIRE(lux({"tonemap", "--in", p("env2.pfm"), "--out-ldr", p("l2.png"), "--out-log", p("g2.png")}).code == 0);
    const Result r = lux({"inverse", "--ldr", p("aces.png"), "--log", p("g2.png"), "--out", p("bad.pfm")});
    CHECK(r.code == kExitDataError);
    CHECK(r.err.rfind("ERROR format: ", 0) == 0);
    // Swapped channels are caught too.
    CHECK(lux({"inverse", "--ldr", p("g2.png"), "--log", p("l2.png"), "--out", p("bad.pfm")}).code == kExitDataError);
}

TEST_CASE("outputs may not overwrite inputs") {
    write_test_env(p("self.pfm"));
    const Result r = lux({"rotate", "--env", p("self.pfm"), "--yaw", "5", "--out", p("self.pfm")});
    CHECK(r.code == kExitUsage);
}

TEST_CASE("eval of identical maps reports zeros") {
    write_test_env(p("gt.pfm"));
    REQUIRE(lux({"eval", "--pred", p("gt.pfm"), "--gt", p("gt.pfm"), "--probe-size", "32", "--out", p("rep.json")})
                .code == 0);
    const json j = read_json(p("rep.json"));
    for (const char* m : {"diffuse", "matte", "mirror"}) {
        CHECK(j["materials"][m]["si_rmse"].get<double>() == 0.0);
        CHECK(j["materials"][m]["angular_deg"].get<double>() == 0.0);
        CHECK(j["materials"][m]["n_rmse"].get<double>() == 0.0);
    }
    CHECK(j["pae_deg"].get<double>() == 0.0);
}

TEST_CASE("rotate and peak agree") {
    write_test_env(p("peak_in.pfm"));
    REQUIRE(lux({"peak", "--env", p("peak_in.pfm"), "--out", p("peak0.json")}).code == 0);
    REQUIRE(lux({"rotate", "--env", p("peak_in.pfm"), "--yaw", "90", "--out", p("peak_rot.pfm")}).code == 0);
    REQUIRE(lux({"peak", "--env", p("peak_rot.pfm"), "--out", p("peak1.json")}).code == 0);
    const double a0 = read_json(p("peak0.json"))["azimuth_deg"];
    const double a1 = read_json(p("peak1.json"))["azimuth_deg"];
    CHECK(std::fmod(a0 - a1 + 720.0, 360.0) == doctest::Approx(90.0).epsilon(1e-6));
}

TEST_CASE("manifests are reproducible and replayable") {
    write_test_env(p("det.pfm"));
    const std::vector<std::string> args{"rotate", "--env", p("det.pfm"), "--yaw", "12.5", "--seed", "4",
                                        "--out", p("det_a.pfm")};
    REQUIRE(lux(args).code == 0);
    const json first = read_json(p("det_a.pfm") + ".manifest.json");
    REQUIRE(lux(args).code == 0);
    const json second = read_json(p("det_a.pfm") + ".manifest.json");
    CHECK(without_timestamp(first) == without_timestamp(second));
    CHECK(first["seed"] == 4);
    CHECK(first["parameters"]["yaw"] == 12.5);

    // Replay through --config, overriding only the output.
    REQUIRE(lux({"--config", p("det_a.pfm") + ".manifest.json", "--out", p("det_b.pfm")}).code == 0);
    CHECK(sha256_file(p("det_a.pfm")) == sha256_file(p("det_b.pfm")));
}

TEST_CASE("config files supply defaults and flags win") {
    write_test_env(p("cfg.pfm"));
    {
        std::ofstream cfg(p("cfg.json"));
        cfg << json{{"env", p("cfg.pfm")}, {"yaw", 45}, {"out", p("cfg_out.pfm")}}.dump();
    }
    REQUIRE(lux({"rotate", "--config", p("cfg.json"), "--yaw", "30"}).code == 0);
    CHECK(read_json(p("cfg_out.pfm") + ".manifest.json")["parameters"]["yaw"] == 30.0);
}

TEST_CASE("dataset-gen writes crops, targets and records") {
    fs::create_directories(workdir() / "panos");
    write_test_env(p("panos/a.pfm"));
    REQUIRE(lux({"dataset-gen", "--panos-dir", p("panos"), "--count", "2", "--seed", "3", "--out-dir", p("ds")})
                .code == 0);
    CHECK(fs::exists(p("ds/sample_000000_crop.png")));
    CHECK(fs::exists(p("ds/sample_000001_ldr.png")));
    CHECK(fs::exists(p("ds/sample_000001_log.png")));
    const json m = read_json(p("ds/manifest.json"));
    CHECK(m["outputs"].size() == 7);
    std::ifstream rec(p("ds/samples.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(rec, line)) {
        const json r = json::parse(line);
        CHECK(r["cameras"].size() == 1);
        CHECK(r["source_hdr"] == true);
        ++lines;
    }
    CHECK(lines == 2);
}

TEST_CASE("crop honours --w and --h") {
    write_test_env(p("crop_in.pfm"));
    REQUIRE(lux({"crop", "--pano", p("crop_in.pfm"), "--az", "30", "--fov", "70", "--w", "40", "--h", "24",
                 "--tonemap", "filmic", "--out", p("crop.png")})
                .code == 0);
    const Png png = read_png(p("crop.png"));
    CHECK(png.image.width() == 40);
    CHECK(png.image.height() == 24);
    CHECK(png.curve == std::optional<std::string>("filmic"));
    CHECK(lux({"crop", "--help"}).code == kExitOk);
}
