// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/metrics.h"

#include "json.hpp"

#include <algorithm>

#include "luxprobe/envmap.h"

namespace luxprobe {
namespace {

void check_pair(const Image& pred, const Image& gt, Mask mask) {
    require(pred.width() == gt.width() && pred.height() == gt.height(), "prediction and ground truth differ in size");
    require(!pred.empty(), "images are empty");
    require(mask.empty() || mask.size() == pred.size(), "mask size does not match the images");
}

bool selected(Mask mask, std::size_t i) { return mask.empty() || mask[i] != 0; }

// Visits every selected pixel; returns how many there were.
template <typename F>
std::size_t for_each_selected(const Image& pred, const Image& gt, Mask mask, F&& f) {
    const auto p = pred.pixels();
    const auto g = gt.pixels();
    std::size_t count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!selected(mask, i)) continue;
        f(p[i], g[i]);
        ++count;
    }
    require(count > 0, "mask selects no pixels");
    return count;
}

}  // namespace

double si_rmse(const Image& pred, const Image& gt, Mask mask) {
    check_pair(pred, gt, mask);
    double pg = 0.0, pp = 0.0;
    const std::size_t n = for_each_selected(pred, gt, mask, [&](const Rgb& p, const Rgb& g) {
        for (std::size_t k = 0; k < 3; ++k) {
            pg += static_cast<double>(p[k]) * g[k];
            pp += static_cast<double>(p[k]) * p[k];
        }
    });
    if (!(pp > 0.0)) fail(ErrorCode::DegeneratePrediction, "degenerate prediction: all-zero under the mask");
    const double alpha = pg / pp;
    double se = 0.0;
    for_each_selected(pred, gt, mask, [&](const Rgb& p, const Rgb& g) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double e = alpha * p[k] - g[k];
            se += e * e;
        }
    });
    return std::sqrt(se / static_cast<double>(3 * n));
}

double angular_error(const Image& pred, const Image& gt, Mask mask) {
    check_pair(pred, gt, mask);
    constexpr double kEps = 1e-8;
    double sum = 0.0;
    std::size_t used = 0;
    for_each_selected(pred, gt, mask, [&](const Rgb& p, const Rgb& g) {
        const Vec3 a{p.r, p.g, p.b};
        const Vec3 b{g.r, g.g, g.b};
        if (length(a) < kEps || length(b) < kEps) return;
        // atan2 form of arccos(a.b / |a||b|); exact for parallel vectors.
        sum += rad_to_deg(std::atan2(length(cross(a, b)), dot(a, b)));
        ++used;
    });
    if (used == 0) fail(ErrorCode::NoQualifyingPixels, "angular error: no pixel has two non-zero colors");
    return sum / static_cast<double>(used);
}

double n_rmse(const Image& pred, const Image& gt, Mask mask) {
    check_pair(pred, gt, mask);
    double sp = 0.0, sg = 0.0;
    const std::size_t n = for_each_selected(pred, gt, mask, [&](const Rgb& p, const Rgb& g) {
        for (std::size_t k = 0; k < 3; ++k) {
            sp += p[k];
            sg += g[k];
        }
    });
    const double count = static_cast<double>(3 * n);
    const double mp = sp / count;
    const double mg = sg / count;
    if (!(mp > 0.0) || !(mg > 0.0)) fail(ErrorCode::ZeroMean, "normalized RMSE needs positive means");
    double se = 0.0;
    for_each_selected(pred, gt, mask, [&](const Rgb& p, const Rgb& g) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double e = p[k] / mp - g[k] / mg;
            se += e * e;
        }
    });
    return std::sqrt(se / count);
}

double peak_angular_error(const EnvironmentMap& pred, const EnvironmentMap& gt) {
    return angle_between_deg(peak_direction(pred), peak_direction(gt));
}

TemporalStats temporal_stats(std::span<const double> values) {
    require(!values.empty(), "temporal statistics need at least one value");
    // Shifted by the first value so a constant sequence has exactly zero spread.
    const double x0 = values.front();
    double sum = 0.0;
    for (double v : values) sum += v - x0;
    const double shift = sum / static_cast<double>(values.size());
    TemporalStats s;
    s.mean = x0 + shift;
    double ss = 0.0;
    for (double v : values) ss += (v - x0 - shift) * (v - x0 - shift);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["materials"] = nlohmann::ordered_json::object();
    for (const auto& [name, m] : materials) {
        j["materials"][name] = {{"si_rmse", m.si_rmse}, {"angular_deg", m.angular_deg}, {"n_rmse", m.n_rmse}};
    }
    j["pae_deg"] = pae_deg ? nlohmann::ordered_json(*pae_deg) : nlohmann::ordered_json(nullptr);
    j["temporal"] = nlohmann::ordered_json::object();
    for (const auto& [name, t] : temporal) j["temporal"][name] = {{"mean", t.mean}, {"std", t.std}};
    return j.dump(2) + "\n";
}

MetricReport evaluate_three_spheres(const EnvironmentMap& pred, const EnvironmentMap& gt, int probe_size) {
    require(pred.width() == gt.width() && pred.height() == gt.height(), "prediction and ground truth differ in size");
    MetricReport report;
    for (const Material& mat : {Material::gray_diffuse(), Material::matte_silver(), Material::mirror()}) {
        const ProbeImage p = render_probe(pred, mat, probe_size);
        const ProbeImage g = render_probe(gt, mat, probe_size);
        SphereMetrics m;
        m.si_rmse = si_rmse(p.pixels, g.pixels, g.mask);
        m.angular_deg = angular_error(p.pixels, g.pixels, g.mask);
        m.n_rmse = n_rmse(p.pixels, g.pixels, g.mask);
        report.materials[std::string(material_name(mat.kind))] = m;
    }
    report.pae_deg = peak_angular_error(pred, gt);
    return report;
}

MetricReport evaluate_sequence(const std::vector<EnvironmentMap>& pred, const std::vector<EnvironmentMap>& gt,
                               int probe_size) {
    require(!pred.empty() && pred.size() == gt.size(), "sequences must be non-empty and of equal length");
    std::map<std::string, std::vector<double>> series;
    for (std::size_t f = 0; f < pred.size(); ++f) {
        const MetricReport r = evaluate_three_spheres(pred[f], gt[f], probe_size);
        for (const auto& [name, m] : r.materials) {
            series[name + ".si_rmse"].push_back(m.si_rmse);
            series[name + ".angular_deg"].push_back(m.angular_deg);
            series[name + ".n_rmse"].push_back(m.n_rmse);
        }
        series["pae_deg"].push_back(*r.pae_deg);
    }
    MetricReport report;
    for (const auto& [name, values] : series) report.temporal[name] = temporal_stats(values);
    for (const char* mat : {"diffuse", "matte", "mirror"}) {
        const std::string m(mat);
        report.materials[m] = {report.temporal[m + ".si_rmse"].mean, report.temporal[m + ".angular_deg"].mean,
                               report.temporal[m + ".n_rmse"].mean};
    }
    report.pae_deg = report.temporal["pae_deg"].mean;
    return report;
}

}  // namespace luxprobe
