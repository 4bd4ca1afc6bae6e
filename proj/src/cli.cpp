// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "luxprobe/envmap.h"
#include "luxprobe/fusion.h"
#include "luxprobe/image_io.h"
#include "luxprobe/metrics.h"
#include "luxprobe/probe.h"
#include "luxprobe/projection.h"
#include "luxprobe/tonemap.h"

namespace luxprobe {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// PNG text tags of the dual tonemap channels.
constexpr const char* kDualLdrTag = "dual-ldr";
constexpr const char* kDualLogTag = "dual-log";

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, path.string() + ": cannot open for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorCode::Io, "SHA-256 unavailable");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string lower_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

bool is_hdr_file(const fs::path& p) {
    const std::string ext = lower_extension(p);
    return ext == ".pfm" || ext == ".hdr";
}

void usage_error(const std::string& message) { fail(ErrorCode::Usage, message); }

// Collects everything a manifest records and writes it once outputs exist.
class Run {
public:
    Run(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

    json& params() { return params_; }

    void input(const fs::path& p) {
        if (!fs::exists(p)) fail(ErrorCode::Io, p.string() + ": no such file");
        inputs_.push_back(p);
    }

    // Registers an output path. Must be called for every output before any
    // file is written so the checks below happen up front.
    void output(const fs::path& p) {
        const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
        if (!fs::is_directory(parent)) fail(ErrorCode::Io, parent.string() + ": output directory does not exist");
        for (const fs::path& in : inputs_) {
            if (fs::exists(p) && fs::equivalent(in, p)) usage_error(p.string() + ": output would overwrite an input");
        }
        outputs_.push_back(p);
    }

    void result(const std::string& key, json value) { results_[key] = std::move(value); }

    void write_manifest(const fs::path& path) const {
        json j;
        j["command"] = command_;
        j["tool_version"] = kVersion;
        j["seed"] = seed_;
        j["parameters"] = params_;
        j["inputs"] = json::array();
        for (const fs::path& p : inputs_) j["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        j["outputs"] = json::array();
        for (const fs::path& p : outputs_) j["outputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        if (!results_.empty()) j["results"] = results_;
        j["timestamp"] = utc_timestamp();
        std::ofstream out(path);
        if (!out) fail(ErrorCode::Io, path.string() + ": cannot write manifest");
        out << j.dump(2) << "\n";
    }

private:
    std::string command_;
    std::uint64_t seed_;
    json params_ = json::object();
    json results_ = json::object();
    std::vector<fs::path> inputs_;
    std::vector<fs::path> outputs_;
};

fs::path manifest_for(const fs::path& primary) {
    fs::path m = primary;
    m += ".manifest.json";
    return m;
}

// Option registry: binds CLI11 options to variables and remembers how to
// report their final values in the manifest.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& name, T& var, const std::string& help, bool required = false) {
        CLI::Option* opt = app_->add_option("--" + name, var, help);
        if (required) opt->required();
        else opt->capture_default_str();
        recorders_.emplace_back([name, &var](json& j) { j[name] = to_json(var); });
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
        CLI::Option* opt = app_->add_flag("--" + name, var, help);
        recorders_.emplace_back([name, &var](json& j) { j[name] = var; });
        return opt;
    }

    void record(json& j) const {
        for (const auto& r : recorders_) r(j);
    }

private:
    template <typename T>
    static json to_json(const T& v) {
        if constexpr (std::is_same_v<T, fs::path>) return v.string();
        else return v;
    }

    CLI::App* app_;
    std::vector<std::function<void(json&)>> recorders_;
};

Image read_ldr_or_hdr(const fs::path& p) {
    return is_hdr_file(p) ? read_hdr_image(p) : read_png(p).image;
}

Image clip01(Image img) {
    for (Rgb& p : img.pixels()) {
        for (std::size_t k = 0; k < 3; ++k) p[k] = std::clamp(p[k], 0.0f, 1.0f);
    }
    return img;
}

Image read_dual_channel(const fs::path& p, const char* tag) {
    Png png = read_png(p);
    if (!png.curve || *png.curve != tag) {
        fail(ErrorCode::Format, p.string() + ": expected a '" + tag + "' tonemap PNG, found '" +
                                    png.curve.value_or("untagged") + "'");
    }
    return std::move(png.image);
}

// Writes an HDR image as PFM, or as a tone-curve-tagged PNG.
void write_image(const fs::path& p, const Image& img, const std::string& curve) {
    if (lower_extension(p) == ".pfm") {
        write_pfm(p, img);
    } else if (lower_extension(p) == ".png") {
        write_png(p, quantize8(clip01(img)), curve);
    } else {
        usage_error(p.string() + ": output must be .pfm or .png");
    }
}

std::vector<fs::path> list_images(const fs::path& dir, bool include_png) {
    if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (is_hdr_file(p) || (include_png && lower_extension(p) == ".png")) files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    return files;
}

json camera_json(const CameraSpec& c) {
    return {{"azimuth_deg", c.azimuth_deg}, {"elevation_deg", c.elevation_deg}, {"fov_deg", c.fov_deg},
            {"fov_axis", "horizontal"},     {"width", c.width},                 {"height", c.height}};
}

std::string padded(std::size_t i, int width) {
    std::ostringstream s;
    s << std::setw(width) << std::setfill('0') << i;
    return s.str();
}

// Scans explicit long flags so config values never override them.
std::set<std::string> explicit_flags(const std::vector<std::string>& args) {
    std::set<std::string> names;
    for (const std::string& a : args) {
        if (a.rfind("--", 0) != 0) continue;
        names.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    }
    return names;
}

const std::set<std::string>& command_names() {
    static const std::set<std::string> names{"crop",  "dataset-gen",   "tonemap", "inverse",    "fuse-train", "fuse-apply",
                                             "render-probes", "eval", "eval-video", "peak", "rotate"};
    return names;
}

// Expands `--config file.json` into explicit flags. A manifest written by
// this tool also works: its command and parameters are replayed.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::optional<fs::path> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) usage_error("--config needs a file argument");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!config) return rest;

    std::ifstream in(*config);
    if (!in) fail(ErrorCode::Io, config->string() + ": cannot open config");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, config->string() + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::Format, config->string() + ": config must be a JSON object");

    json values = j;
    if (j.contains("parameters") && j["parameters"].is_object()) {
        values = j["parameters"];
        if (j.contains("seed") && !values.contains("seed")) values["seed"] = j["seed"];
    }
    const bool has_command = !rest.empty() && command_names().count(rest.front()) != 0;
    if (!has_command) {
        if (!j.contains("command") || !j["command"].is_string()) usage_error("no command given");
        rest.insert(rest.begin(), j["command"].get<std::string>());
    }

    const std::set<std::string> given = explicit_flags(rest);
    std::vector<std::string> expanded{rest.front()};
    for (const auto& [key, value] : values.items()) {
        if (key == "command" || given.count(key) != 0) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) expanded.push_back("--" + key);
        } else if (value.is_string()) {
            expanded.push_back("--" + key);
            expanded.push_back(value.get<std::string>());
        } else if (value.is_number()) {
            expanded.push_back("--" + key);
            expanded.push_back(value.dump());
        } else if (!value.is_null()) {
            fail(ErrorCode::Format, "config key '" + key + "' must be a string, number or boolean");
        }
    }
    expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
    return expanded;
}

struct Command {
    CLI::App* app = nullptr;
    std::unique_ptr<Options> options;
    std::function<void(Run&, std::ostream&)> body;
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual-tonemap HDR environment map toolkit", "luxprobe"};
    // crop takes --h for its height, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough(false);

    std::map<std::string, Command> commands;
    std::uint64_t seed = 0;

    auto add_command = [&](const std::string& name, const std::string& help) -> Command& {
        Command& c = commands[name];
        c.app = app.add_subcommand(name, help);
        c.options = std::make_unique<Options>(c.app);
        c.options->add("seed", seed, "RNG seed recorded in the manifest");
        return c;
    };

    // crop
    fs::path crop_pano, crop_out;
    double crop_az = 0.0, crop_el = 0.0, crop_fov = 60.0;
    int crop_w = 720, crop_h = 480;
    std::string crop_curve = "gamma24";
    {
        Command& c = add_command("crop", "Perspective crop of a panorama");
        c.options->add("pano", crop_pano, "Input panorama (.pfm, .hdr or .png)", true);
        c.options->add("az", crop_az, "Azimuth in degrees");
        c.options->add("el", crop_el, "Elevation in degrees");
        c.options->add("fov", crop_fov, "Horizontal field of view in degrees");
        c.options->add("w", crop_w, "Output width");
        c.options->add("h", crop_h, "Output height");
        c.options->add("tonemap", crop_curve, "Display curve for PNG output of an HDR panorama");
        c.options->add("out", crop_out, "Output image (.pfm or .png)", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(crop_pano);
            const CameraSpec cam{crop_az, crop_el, crop_fov, crop_w, crop_h};
            validate(cam);
            const bool hdr = is_hdr_file(crop_pano);
            const ToneCurve curve = parse_tone_curve(crop_curve);
            r.output(crop_out);
            const Image pano = read_ldr_or_hdr(crop_pano);
            Image view = project_perspective(pano, cam);
            std::string tag = "identity";
            if (hdr && lower_extension(crop_out) == ".png") {
                const Exposure ex = auto_expose(view, 0.99, 0.9);
                view = apply_display_tonemap(ex.image, curve);
                tag = std::string(tone_curve_name(curve.kind));
                r.result("exposure_scale", ex.scale);
            }
            write_image(crop_out, view, tag);
            r.write_manifest(manifest_for(crop_out));
            o << "wrote " << crop_out.string() << "\n";
        };
    }

    // dataset-gen
    fs::path ds_panos, ds_out;
    std::size_t ds_count = 1;
    int ds_frames = 0;
    {
        Command& c = add_command("dataset-gen", "Sample supervised crops from a directory of panoramas");
        c.options->add("panos-dir", ds_panos, "Directory of .pfm/.hdr (HDR) and .png (LDR) panoramas", true);
        c.options->add("count", ds_count, "Number of samples");
        c.options->add("video-frames", ds_frames, "Frames per sample; 0 for still crops");
        c.options->add("out-dir", ds_out, "Output directory (created if missing)", true);
        c.body = [&](Run& r, std::ostream& o) {
            const std::vector<fs::path> files = list_images(ds_panos, true);
            if (files.empty()) fail(ErrorCode::Precondition, ds_panos.string() + ": no panoramas found");
            std::vector<PanoSource> sources;
            for (const fs::path& f : files) {
                r.input(f);
                const bool hdr = is_hdr_file(f);
                sources.push_back({f.filename().string(), EnvironmentMap(read_ldr_or_hdr(f)), hdr});
            }
            fs::create_directories(ds_out);
            DatasetOptions opts;
            opts.video_frames = ds_frames;

            std::ofstream records(ds_out / "samples.jsonl");
            if (!records) fail(ErrorCode::Io, (ds_out / "samples.jsonl").string() + ": cannot open");
            for (std::size_t i = 0; i < ds_count; ++i) {
                const DatasetSample s = generate_sample(sources, seed, i, opts);
                const std::string stem = "sample_" + padded(i, 6);
                json rec;
                rec["index"] = i;
                rec["source"] = sources[s.source].name;
                rec["source_hdr"] = sources[s.source].hdr;
                rec["cameras"] = json::array();
                for (const CameraSpec& cam : s.cameras) rec["cameras"].push_back(camera_json(cam));
                rec["tone_curve"] = s.curve;
                rec["exposure_scale"] = s.exposure_scale;
                rec["crops"] = json::array();
                for (std::size_t f = 0; f < s.crops.size(); ++f) {
                    const std::string name =
                        s.crops.size() == 1 ? stem + "_crop.png" : stem + "_crop_f" + padded(f, 3) + ".png";
                    r.output(ds_out / name);
                    write_png(ds_out / name, s.crops[f], s.curve);
                    rec["crops"].push_back(name);
                }
                const std::string ldr_name = stem + "_ldr.png";
                r.output(ds_out / ldr_name);
                write_png(ds_out / ldr_name, quantize8(s.target.ldr), kDualLdrTag);
                rec["ldr"] = ldr_name;
                if (s.has_log) {
                    const std::string log_name = stem + "_log.png";
                    r.output(ds_out / log_name);
                    write_png(ds_out / log_name, quantize8(s.target.log), kDualLogTag);
                    rec["log"] = log_name;
                } else {
                    rec["log"] = nullptr;
                }
                records << rec.dump() << "\n";
            }
            records.close();
            r.output(ds_out / "samples.jsonl");
            r.write_manifest(ds_out / "manifest.json");
            o << "wrote " << ds_count << " samples to " << ds_out.string() << "\n";
        };
    }

    // tonemap
    fs::path tm_in, tm_ldr, tm_log, tm_out;
    std::string tm_curve;
    bool tm_auto = false;
    {
        Command& c = add_command("tonemap", "Dual tonemap of an HDR map, or a display tonemap with --tonemap");
        c.options->add("in", tm_in, "Input HDR image (.pfm or .hdr)", true);
        c.options->add("out-ldr", tm_ldr, "Reinhard-channel PNG");
        c.options->add("out-log", tm_log, "Log-channel PNG");
        c.options->add("tonemap", tm_curve, "Display curve: gamma24|aces|filmic|agx");
        c.options->add("out", tm_out, "Display PNG (with --tonemap)");
        c.options->flag("auto-expose", tm_auto, "Scale the 99th luminance percentile to 0.9 first");
        c.body = [&](Run& r, std::ostream& o) {
            r.input(tm_in);
            if (!tm_curve.empty()) {
                if (tm_out.empty()) usage_error("--tonemap needs --out");
                const ToneCurve curve = parse_tone_curve(tm_curve);
                r.output(tm_out);
                Image img = read_hdr_image(tm_in);
                if (tm_auto) {
                    const Exposure ex = auto_expose(img, 0.99, 0.9);
                    img = ex.image;
                    r.result("exposure_scale", ex.scale);
                }
                write_png(tm_out, quantize8(apply_display_tonemap(img, curve)), std::string(tone_curve_name(curve.kind)));
                r.write_manifest(manifest_for(tm_out));
                o << "wrote " << tm_out.string() << "\n";
                return;
            }
            if (tm_ldr.empty() || tm_log.empty()) usage_error("dual tonemap needs --out-ldr and --out-log");
            r.output(tm_ldr);
            r.output(tm_log);
            const DualToneMaps maps = tonemap_dual(read_environment_map(tm_in));
            write_png(tm_ldr, quantize8(maps.ldr), kDualLdrTag);
            write_png(tm_log, quantize8(maps.log), kDualLogTag);
            r.write_manifest(manifest_for(tm_ldr));
            o << "wrote " << tm_ldr.string() << " and " << tm_log.string() << "\n";
        };
    }

    // inverse
    fs::path inv_ldr, inv_log, inv_out;
    {
        Command& c = add_command("inverse", "Rule-based HDR reconstruction from a dual tonemap pair");
        c.options->add("ldr", inv_ldr, "Reinhard-channel PNG", true);
        c.options->add("log", inv_log, "Log-channel PNG", true);
        c.options->add("out", inv_out, "Output .pfm", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(inv_ldr);
            r.input(inv_log);
            if (lower_extension(inv_out) != ".pfm") usage_error("--out must be a .pfm file");
            r.output(inv_out);
            DualToneMaps maps{read_dual_channel(inv_ldr, kDualLdrTag), read_dual_channel(inv_log, kDualLogTag)};
            write_pfm(inv_out, inverse_dual(maps).image());
            r.write_manifest(manifest_for(inv_out));
            o << "wrote " << inv_out.string() << "\n";
        };
    }

    // fuse-train
    fs::path ft_out;
    TrainConfig ft;
    {
        Command& c = add_command("fuse-train", "Train the fusion MLP on synthetic dual tonemap pairs");
        c.options->add("steps", ft.steps, "Optimizer steps");
        c.options->add("batch", ft.batch_size, "Pairs per step");
        c.options->add("lr", ft.learning_rate, "Peak learning rate");
        c.options->add("delta", ft.huber_delta, "Huber delta");
        c.options->add("hue-jitter", ft.sampler.hue_jitter, "Chromaticity jitter half-width (log units)");
        c.options->add("quantize-prob", ft.sampler.quantize_probability, "Probability of 8-bit quantization");
        c.options->add("out", ft_out, "Output network file", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.output(ft_out);
            r.output(fusion_sidecar_path(ft_out));
            ft.seed = seed;
            const TrainResult res = train_fusion(ft);
            write_fusion_net(ft_out, res.net);
            r.result("final_loss", res.final_loss);
            r.write_manifest(manifest_for(ft_out));
            o << "final loss " << res.final_loss << "\nwrote " << ft_out.string() << "\n";
        };
    }

    // fuse-apply
    fs::path fa_net, fa_ldr, fa_log, fa_out;
    {
        Command& c = add_command("fuse-apply", "HDR reconstruction with a trained fusion MLP");
        c.options->add("net", fa_net, "Network file from fuse-train", true);
        c.options->add("ldr", fa_ldr, "Reinhard-channel PNG", true);
        c.options->add("log", fa_log, "Log-channel PNG", true);
        c.options->add("out", fa_out, "Output .pfm", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(fa_net);
            r.input(fusion_sidecar_path(fa_net));
            r.input(fa_ldr);
            r.input(fa_log);
            if (lower_extension(fa_out) != ".pfm") usage_error("--out must be a .pfm file");
            r.output(fa_out);
            const FusionNet net = read_fusion_net(fa_net);
            DualToneMaps maps{read_dual_channel(fa_ldr, kDualLdrTag), read_dual_channel(fa_log, kDualLogTag)};
            write_pfm(fa_out, fuse_image(net, maps).image());
            r.write_manifest(manifest_for(fa_out));
            o << "wrote " << fa_out.string() << "\n";
        };
    }

    // render-probes
    fs::path rp_env;
    std::string rp_prefix;
    int rp_size = 256;
    {
        Command& c = add_command("render-probes", "Render mirror, matte and diffuse spheres");
        c.options->add("env", rp_env, "Environment map (.pfm or .hdr)", true);
        c.options->add("size", rp_size, "Probe size in pixels");
        c.options->add("out-prefix", rp_prefix, "Output path prefix", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(rp_env);
            const Material mats[] = {Material::mirror(), Material::matte_silver(), Material::gray_diffuse()};
            for (const Material& m : mats) {
                const std::string base = rp_prefix + std::string(material_name(m.kind));
                r.output(base + ".pfm");
                r.output(base + ".png");
            }
            const EnvironmentMap env = read_environment_map(rp_env);
            for (const Material& m : mats) {
                const std::string base = rp_prefix + std::string(material_name(m.kind));
                const ProbeImage probe = render_probe(env, m, rp_size);
                write_pfm(base + ".pfm", probe.pixels);
                write_png(base + ".png", quantize8(apply_display_tonemap(probe.pixels, ToneCurve::gamma24())),
                          "gamma24");
            }
            r.write_manifest(rp_prefix + "manifest.json");
            o << "wrote probes with prefix " << rp_prefix << "\n";
        };
    }

    // eval
    fs::path ev_pred, ev_gt, ev_out;
    int ev_size = 256;
    {
        Command& c = add_command("eval", "Three-sphere metrics and peak angular error");
        c.options->add("pred", ev_pred, "Predicted environment map", true);
        c.options->add("gt", ev_gt, "Ground-truth environment map", true);
        c.options->add("probe-size", ev_size, "Probe size in pixels");
        c.options->add("out", ev_out, "Report JSON", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(ev_pred);
            r.input(ev_gt);
            r.output(ev_out);
            const MetricReport rep =
                evaluate_three_spheres(read_environment_map(ev_pred), read_environment_map(ev_gt), ev_size);
            std::ofstream(ev_out) << rep.to_json();
            r.write_manifest(manifest_for(ev_out));
            o << rep.to_json();
        };
    }

    // eval-video
    fs::path evv_pred, evv_gt, evv_out;
    int evv_size = 256;
    {
        Command& c = add_command("eval-video", "Per-frame metrics with temporal statistics");
        c.options->add("pred-dir", evv_pred, "Directory of predicted frames", true);
        c.options->add("gt-dir", evv_gt, "Directory of ground-truth frames", true);
        c.options->add("probe-size", evv_size, "Probe size in pixels");
        c.options->add("out", evv_out, "Report JSON", true);
        c.body = [&](Run& r, std::ostream& o) {
            const std::vector<fs::path> pf = list_images(evv_pred, false);
            const std::vector<fs::path> gf = list_images(evv_gt, false);
            if (pf.empty()) fail(ErrorCode::Precondition, evv_pred.string() + ": no frames found");
            if (pf.size() != gf.size()) fail(ErrorCode::Precondition, "frame directories differ in frame count");
            for (std::size_t i = 0; i < pf.size(); ++i) {
                if (pf[i].filename() != gf[i].filename()) {
                    fail(ErrorCode::Precondition, "frame names differ: " + pf[i].filename().string() + " vs " +
                                                      gf[i].filename().string());
                }
                r.input(pf[i]);
                r.input(gf[i]);
            }
            r.output(evv_out);
            std::vector<EnvironmentMap> pred, gt;
            for (const fs::path& p : pf) pred.push_back(read_environment_map(p));
            for (const fs::path& p : gf) gt.push_back(read_environment_map(p));
            const MetricReport rep = evaluate_sequence(pred, gt, evv_size);
            std::ofstream(evv_out) << rep.to_json();
            r.write_manifest(manifest_for(evv_out));
            o << rep.to_json();
        };
    }

    // peak
    fs::path pk_env, pk_out;
    double pk_pct = 0.999;
    {
        Command& c = add_command("peak", "Dominant light direction of an environment map");
        c.options->add("env", pk_env, "Environment map", true);
        c.options->add("percentile", pk_pct, "Solid-angle-weighted luminance percentile");
        c.options->add("out", pk_out, "Output JSON", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(pk_env);
            r.output(pk_out);
            const EnvironmentMap env = read_environment_map(pk_env);
            const Direction d = peak_direction(env, pk_pct);
            double az = 0.0, el = 0.0;
            direction_to_angles(d, az, el);
            const PixelCoord px = direction_to_pixel(d, env.width(), env.height());
            json j{{"direction", {d.x(), d.y(), d.z()}},
                   {"azimuth_deg", az},
                   {"elevation_deg", el},
                   {"pixel", {px.col, px.row}}};
            std::ofstream(pk_out) << j.dump(2) << "\n";
            r.write_manifest(manifest_for(pk_out));
            o << j.dump(2) << "\n";
        };
    }

    // rotate
    fs::path rot_env, rot_out;
    double rot_yaw = 0.0;
    {
        Command& c = add_command("rotate", "Rotate an environment map about the vertical axis");
        c.options->add("env", rot_env, "Environment map", true);
        c.options->add("yaw", rot_yaw, "Yaw in degrees", true);
        c.options->add("out", rot_out, "Output .pfm", true);
        c.body = [&](Run& r, std::ostream& o) {
            r.input(rot_env);
            if (lower_extension(rot_out) != ".pfm") usage_error("--out must be a .pfm file");
            r.output(rot_out);
            write_pfm(rot_out, rotate_env(read_environment_map(rot_env), rot_yaw).image());
            r.write_manifest(manifest_for(rot_out));
            o << "wrote " << rot_out.string() << "\n";
        };
    }

    try {
        std::vector<std::string> args = expand_config(raw_args);
        if (args.empty()) {
            err << app.help();
            return kExitUsage;
        }
        if (args.front().rfind("-", 0) != 0 && command_names().count(args.front()) == 0) {
            err << "ERROR usage: unknown command '" << args.front() << "'\n" << app.help();
            return kExitUsage;
        }
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForVersion&) {
            out << kVersion << "\n";
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            err << "ERROR usage: " << msg << "\n";
            return kExitUsage;
        }
        for (auto& [name, cmd] : commands) {
            if (!cmd.app->parsed()) continue;
            Run r(name, seed);
            cmd.options->record(r.params());
            cmd.body(r, out);
            return kExitOk;
        }
        err << "ERROR usage: no command given\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "ERROR " << error_code_name(e.code()) << ": " << msg << "\n";
        return e.code() == ErrorCode::Usage ? kExitUsage : kExitDataError;
    } catch (const fs::filesystem_error& e) {
        err << "ERROR io: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        err << "ERROR internal: " << e.what() << "\n";
        return kExitDataError;
    }
}

}  // namespace luxprobe
