#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace abp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

/// Symmetric 2x2 matrix (Hessian storage).
struct Mat2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
inline Mat2 operator*(double s, Mat2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }

/// Symmetric 3x3 matrix, row-major upper triangle mirrored.
struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
};

/// Fixed-shape pairwise summation. The reduction tree depends only on the
/// element count, so results are bit-reproducible regardless of how the
/// partials were produced.
inline double pairwise_sum(std::span<const double> v) {
    if (v.empty()) return 0.0;
    if (v.size() == 1) return v[0];
    if (v.size() == 2) return v[0] + v[1];
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Length of the union of closed intervals.
inline double interval_union_length(std::vector<std::pair<double, double>> iv) {
    if (iv.empty()) return 0.0;
    for (auto& [a, b] : iv)
        if (a > b) std::swap(a, b);
    std::sort(iv.begin(), iv.end());
    double total = 0.0;
    double lo = iv[0].first, hi = iv[0].second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first <= hi) {
            hi = std::max(hi, iv[i].second);
        } else {
            total += hi - lo;
            lo = iv[i].first;
            hi = iv[i].second;
        }
    }
    return total + (hi - lo);
}

/// Distance from point p to segment [a, b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + t * ab);
}

}  // namespace abp
