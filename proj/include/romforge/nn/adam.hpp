#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/nn/network.hpp"

namespace romforge::nn {

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Buffer m, v;
    std::size_t t = 0;
    AdamConfig config;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig c) : m(n, 0.0), v(n, 0.0), config(c) {}
};

/// One bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
    if (params.size() != grads.size() || params.size() != s.m.size())
        throw ArgumentError("adam_step: parameter, gradient and state sizes differ");
    ++s.t;
    const double b1 = s.config.beta1, b2 = s.config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
    const double lr = s.config.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.m[i] = b1 * s.m[i] + (1.0 - b1) * g;
        s.v[i] = b2 * s.v[i] + (1.0 - b2) * g * g;
        const double mhat = s.m[i] / c1, vhat = s.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + s.config.epsilon);
    }
}

/// Adam over every parameter block of one or more Sequential stacks, stepped in lockstep.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<Sequential*> nets, AdamConfig config) : nets_(std::move(nets)) {
        for (Sequential* net : nets_)
            for (std::size_t i = 0; i < net->size(); ++i)
                states_.emplace_back(net->layer(i).params().size(), config);
    }

    void step() {
        std::size_t k = 0;
        for (Sequential* net : nets_)
            for (std::size_t i = 0; i < net->size(); ++i, ++k) {
                Layer& l = net->layer(i);
                if (!l.params().empty()) adam_step(l.params(), l.grads(), states_[k]);
            }
    }

private:
    std::vector<Sequential*> nets_;
    std::vector<AdamState> states_;
};

}  // namespace romforge::nn
