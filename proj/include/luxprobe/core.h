// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace luxprobe {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Stable error categories. The CLI prints these verbatim in its
// `ERROR <code>: <message>` line, so renaming one is a breaking change.
enum class ErrorCode {
    Precondition,
    NoPeak,
    DegenerateExposure,
    DegeneratePrediction,
    NoQualifyingPixels,
    ZeroMean,
    NonFinite,
    Divergence,
    Io,
    Format,
    Usage,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorCode::Precondition, message);
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Unit vector in camera coordinates: +x right, +y up, -z forward.
class Direction {
public:
    Direction() = default;

    // Normalizes `v`; throws on a zero or non-finite vector.
    static Direction normalized(const Vec3& v);

    const Vec3& vec() const { return v_; }
    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }

    friend bool operator==(const Direction&, const Direction&) = default;

private:
    explicit Direction(const Vec3& v) : v_(v) {}
    Vec3 v_{0.0, 0.0, -1.0};
};

inline double dot(const Direction& a, const Direction& b) { return dot(a.vec(), b.vec()); }

// Great-circle angle between two unit vectors, in degrees. Uses atan2 for
// accuracy at both small and near-antipodal angles.
double angle_between_deg(const Direction& a, const Direction& b);

struct Rgb {
    float r = 0.0f, g = 0.0f, b = 0.0f;

    float& operator[](std::size_t i) { return i == 0 ? r : (i == 1 ? g : b); }
    float operator[](std::size_t i) const { return i == 0 ? r : (i == 1 ? g : b); }

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Rec.709 luminance of linear RGB.
inline constexpr double luminance(double r, double g, double b) {
    return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}
inline constexpr double luminance(const Rgb& c) { return luminance(c.r, c.g, c.b); }

// Number of worker threads to use. Honors LUXPROBE_THREADS (0 or unset = auto).
unsigned worker_threads();

}  // namespace luxprobe
