#pragma once

// Shared inner loops. Every path that evaluates a metric goes through these so
// that every caller agrees bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace ralign::detail {

template <typename T>
double dot(std::span<const T> u, std::span<const T> v) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    }
    return acc;
}

template <typename T>
double squared_norm(std::span<const T> u) noexcept {
    return dot(u, u);
}

template <typename T>
double squared_distance(std::span<const T> u, std::span<const T> v) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double diff = static_cast<double>(u[i]) - static_cast<double>(v[i]);
        acc += diff * diff;
    }
    return acc;
}

inline double cosine_from(double dot_uv, double norm2_u, double norm2_v) noexcept {
    // sqrt of the product: identical vectors give exactly 1.
    return std::clamp(dot_uv / std::sqrt(norm2_u * norm2_v), -1.0, 1.0);
}

template <typename T>
double cosine(std::span<const T> u, std::span<const T> v, double norm2_u, double norm2_v) noexcept {
    return cosine_from(dot(u, v), norm2_u, norm2_v);
}

template <typename T>
double euclidean(std::span<const T> u, std::span<const T> v) noexcept {
    return std::sqrt(squared_distance(u, v));
}

}  // namespace ralign::detail
