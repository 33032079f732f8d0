#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vacda/core/errors.hpp"
#include "vacda/core/rng.hpp"
#include "vacda/core/tensor.hpp"

// Stochastic time-series augmentations.  All functions are pure given the
// supplied Rng; make_augmented_view derives one child stream per instance
// (counter-based), so instances can be processed concurrently in any order
// without changing the result.

namespace vacda::augment {

enum class Policy { kPickOneUniform, kComposeAll };

struct AugmentConfig {
    double jitter_sigma = 0.05;   // std of additive noise, standardized units
    double scale_sigma = 0.1;     // std of per-channel gain around 1
    int warp_knots = 4;           // interior knots of the warp spline
    double warp_sigma = 0.2;      // std of warp segment increments around 1
    double rotation_max_angle = 3.14159265358979323846;  // radians
    Policy policy = Policy::kPickOneUniform;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (jitter_sigma < 0 || scale_sigma < 0 || warp_sigma < 0)
            throw ConfigError("augment: sigmas must be >= 0");
        if (warp_knots < 2) throw ConfigError("augment.warp_knots must be >= 2");
        if (rotation_max_angle < 0 || rotation_max_angle > 3.14159265358979323846 + 1e-12)
            throw ConfigError("augment.rotation_max_angle must be in [0, pi]");
    }
};

// Adds i.i.d. zero-mean Gaussian noise with std sigma to every element.
template <typename T>
void jitter(Tensor<T>& w, double sigma, Rng& rng) {
    for (auto& v : w.v) v += static_cast<T>(sigma * rng.gaussian());
}

// One multiplicative factor per channel, drawn from N(1, sigma^2) and clamped
// to >= 0.1.
template <typename T>
void scale(Tensor<T>& w, double sigma, Rng& rng) {
    const int C = w.dim(0), L = w.dim(1);
    for (int c = 0; c < C; ++c) {
        double f = 1.0 + sigma * rng.gaussian();
        if (f < 0.1) f = 0.1;
        for (int t = 0; t < L; ++t) w.at(c, t) *= static_cast<T>(f);
    }
}

namespace detail {

// Monotone cubic interpolation (Fritsch-Carlson) through (xs, ys), strictly
// increasing when ys is.
inline double pchip_eval(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::vector<double>& ms, double x) {
    std::size_t n = xs.size();
    std::size_t j = 0;
    while (j + 2 < n && x > xs[j + 1]) ++j;
    double h = xs[j + 1] - xs[j];
    double s = (x - xs[j]) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1;
    double h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2;
    double h11 = s3 - s2;
    return h00 * ys[j] + h10 * h * ms[j] + h01 * ys[j + 1] + h11 * h * ms[j + 1];
}

inline std::vector<double> pchip_slopes(const std::vector<double>& xs,
                                        const std::vector<double>& ys) {
    std::size_t n = xs.size();
    std::vector<double> d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0) {
            m[i] = 0;
        } else {
            // harmonic mean keeps the interpolant monotone
            m[i] = 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);
        }
    }
    return m;
}

}  // namespace detail

// The time remapping used by time_warp: warp_map[t] is the (fractional)
// source index sampled at output position t.  Endpoints are pinned to 0 and
// len-1; the map is strictly increasing.
inline std::vector<double> warp_map(int len, int knots, double sigma, Rng& rng) {
    const int segments = knots + 1;
    std::vector<double> xs(static_cast<std::size_t>(knots) + 2),
        ys(static_cast<std::size_t>(knots) + 2);
    ys[0] = 0.0;
    for (int j = 1; j <= segments; ++j) {
        double g = 1.0 + sigma * rng.gaussian();
        if (g < 0.05) g = 0.05;  // keeps the cumulative sum strictly increasing
        ys[static_cast<std::size_t>(j)] = ys[static_cast<std::size_t>(j) - 1] + g;
    }
    const double scale_to = static_cast<double>(len - 1) / ys.back();
    for (auto& y : ys) y *= scale_to;
    ys.front() = 0.0;
    ys.back() = static_cast<double>(len - 1);
    for (int j = 0; j <= segments; ++j)
        xs[static_cast<std::size_t>(j)] =
            static_cast<double>(j) * static_cast<double>(len - 1) / segments;
    auto ms = detail::pchip_slopes(xs, ys);
    std::vector<double> out(static_cast<std::size_t>(len));
    for (int t = 0; t < len; ++t)
        out[static_cast<std::size_t>(t)] = detail::pchip_eval(xs, ys, ms, static_cast<double>(t));
    out.front() = 0.0;
    out.back() = static_cast<double>(len - 1);
    return out;
}

// Smooth monotone time warp; channels are resampled by linear interpolation.
// First and last samples are exact copies of the input.
template <typename T>
void time_warp(Tensor<T>& w, int knots, double sigma, Rng& rng) {
    const int C = w.dim(0), L = w.dim(1);
    if (L < 2) return;
    auto map = warp_map(L, knots, sigma, rng);
    Tensor<T> out = w;
    for (int c = 0; c < C; ++c) {
        for (int t = 0; t < L; ++t) {
            double src = map[static_cast<std::size_t>(t)];
            int i0 = static_cast<int>(src);
            if (i0 >= L - 1) i0 = L - 2;
            double frac = src - i0;
            out.at(c, t) = static_cast<T>((1.0 - frac) * w.at(c, i0) + frac * w.at(c, i0 + 1));
        }
        out.at(c, 0) = w.at(c, 0);
        out.at(c, L - 1) = w.at(c, L - 1);
    }
    w = std::move(out);
}

// Applies one random rotation (uniform axis, angle uniform in [0, max_angle])
// to every time-step's 3-vector.
template <typename T>
void rotate(Tensor<T>& w, double max_angle, Rng& rng) {
    if (w.dim(0) != 3)
        throw DataError("rotate: unsupported channel count " + std::to_string(w.dim(0)) +
                        ", needs 3");
    double ax = rng.gaussian(), ay = rng.gaussian(), az = rng.gaussian();
    double n = std::sqrt(ax * ax + ay * ay + az * az);
    if (n < 1e-12) {
        ax = 0;
        ay = 0;
        az = 1;
        n = 1;
    }
    ax /= n;
    ay /= n;
    az /= n;
    const double angle = rng.uniform() * max_angle;
    const double c = std::cos(angle), s = std::sin(angle), omc = 1.0 - c;
    // Rodrigues
    const double R[3][3] = {
        {c + ax * ax * omc, ax * ay * omc - az * s, ax * az * omc + ay * s},
        {ay * ax * omc + az * s, c + ay * ay * omc, ay * az * omc - ax * s},
        {az * ax * omc - ay * s, az * ay * omc + ax * s, c + az * az * omc}};
    const int L = w.dim(1);
    for (int t = 0; t < L; ++t) {
        double v0 = w.at(0, t), v1 = w.at(1, t), v2 = w.at(2, t);
        w.at(0, t) = static_cast<T>(R[0][0] * v0 + R[0][1] * v1 + R[0][2] * v2);
        w.at(1, t) = static_cast<T>(R[1][0] * v0 + R[1][1] * v1 + R[1][2] * v2);
        w.at(2, t) = static_cast<T>(R[2][0] * v0 + R[2][1] * v1 + R[2][2] * v2);
    }
}

// Applies the configured policy to one window using the given child stream.
template <typename T>
void augment_window(Tensor<T>& w, const AugmentConfig& cfg, Rng& rng) {
    if (cfg.policy == Policy::kPickOneUniform) {
        switch (rng.uniform_int(4)) {
            case 0: jitter(w, cfg.jitter_sigma, rng); break;
            case 1: scale(w, cfg.scale_sigma, rng); break;
            case 2: time_warp(w, cfg.warp_knots, cfg.warp_sigma, rng); break;
            default: rotate(w, cfg.rotation_max_angle, rng); break;
        }
    } else {
        jitter(w, cfg.jitter_sigma, rng);
        scale(w, cfg.scale_sigma, rng);
        time_warp(w, cfg.warp_knots, cfg.warp_sigma, rng);
        rotate(w, cfg.rotation_max_angle, rng);
    }
}

// Produces the augmented view of a [B x C x T] batch.  One base draw from
// `rng` seeds per-instance child streams, so the output is independent of
// how instances are scheduled over threads.
template <typename T>
Tensor<T> make_augmented_view(const Tensor<T>& batch, const AugmentConfig& cfg, Rng& rng) {
    if (batch.rank() != 3 || batch.dim(0) < 1)
        throw ShapeError("make_augmented_view: batch must be non-empty [B,C,T]");
    const int B = batch.dim(0), C = batch.dim(1), L = batch.dim(2);
    const std::uint64_t base = rng.next_u64();
    Tensor<T> out = batch;
#pragma omp parallel for schedule(static) if (B > 8)
    for (int i = 0; i < B; ++i) {
        Rng child(mix64(base, static_cast<std::uint64_t>(i)));
        Tensor<T> w({C, L});
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < L; ++t) w.at(c, t) = batch.at(i, c, t);
        augment_window(w, cfg, child);
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < L; ++t) out.at(i, c, t) = w.at(c, t);
    }
    return out;
}

inline std::string to_string(Policy p) {
    return p == Policy::kPickOneUniform ? "pick-one-uniform" : "compose-all";
}

inline Policy policy_from_string(const std::string& s) {
    if (s == "pick-one-uniform") return Policy::kPickOneUniform;
    if (s == "compose-all") return Policy::kComposeAll;
    throw ConfigError("augment.policy: unknown value '" + s + "'");
}

}  // namespace vacda::augment
