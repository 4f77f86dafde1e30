#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romforge/error.hpp"

namespace romforge::nn {

/// Per-sample shape (height, width, channels). Dense activations use (1, 1, units).
struct Shape3 {
    std::size_t h = 1, w = 1, c = 1;

    std::size_t size() const { return h * w * c; }
    friend bool operator==(const Shape3&, const Shape3&) = default;
};

inline std::string to_string(const Shape3& s) {
    if (s.h == 1 && s.w == 1) return std::to_string(s.c);
    return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

/// Packet-aligned storage for activations, weights and gradients. Eigen's vectorized
/// loops peel by address, so a fixed base alignment keeps results bitwise reproducible.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense batch tensor stored (batch, row, col, channel) with channel fastest.
struct Tensor4 {
    std::size_t batch = 0;
    Shape3 shape;
    Buffer data;

    Tensor4() = default;
    Tensor4(std::size_t b, Shape3 s, double fill = 0.0) : batch(b), shape(s), data(b * s.size(), fill) {}
    Tensor4(std::size_t b, std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : Tensor4(b, Shape3{h, w, c}, fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t sample_size() const { return shape.size(); }

    std::size_t offset(std::size_t b, std::size_t y, std::size_t x, std::size_t ch) const {
        return ((b * shape.h + y) * shape.w + x) * shape.c + ch;
    }
    double& operator()(std::size_t b, std::size_t y, std::size_t x, std::size_t ch) {
        return data[offset(b, y, x, ch)];
    }
    double operator()(std::size_t b, std::size_t y, std::size_t x, std::size_t ch) const {
        return data[offset(b, y, x, ch)];
    }

    double* sample(std::size_t b) { return data.data() + b * sample_size(); }
    const double* sample(std::size_t b) const { return data.data() + b * sample_size(); }

    /// Zero-filled reshape.
    void resize(std::size_t b, Shape3 s) {
        batch = b;
        shape = s;
        data.assign(b * s.size(), 0.0);
    }

    /// Reshape keeping existing storage; contents are unspecified afterwards.
    void reshape_uninitialized(std::size_t b, Shape3 s) {
        batch = b;
        shape = s;
        data.resize(b * s.size());
    }

    bool same_shape(const Tensor4& o) const { return batch == o.batch && shape == o.shape; }
};

inline void require_same_shape(const Tensor4& a, const Tensor4& b, const char* what) {
    if (!a.same_shape(b))
        throw ArgumentError(std::string(what) + ": tensor shapes differ (" +
                            std::to_string(a.batch) + "x" + to_string(a.shape) + " vs " +
                            std::to_string(b.batch) + "x" + to_string(b.shape) + ")");
}

}  // namespace romforge::nn
