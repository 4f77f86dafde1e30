#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/nn/layers.hpp"
#include "romforge/nn/tensor.hpp"
#include "romforge/random.hpp"

namespace romforge::nn {

/// Output shape of every spec row, starting from `input`.
inline std::vector<Shape3> infer_shapes(Shape3 input, const std::vector<LayerSpec>& specs) {
    std::vector<Shape3> shapes;
    shapes.reserve(specs.size());
    Shape3 s = input;
    for (const LayerSpec& spec : specs) {
        switch (spec.kind) {
        case LayerKind::Conv: s = conv2d_output_shape(s, ConvKernel{spec.window, s.c, spec.units}); break;
        case LayerKind::ConvTranspose:
            s = conv2d_transpose_output_shape(s, ConvKernel{spec.window, s.c, spec.units});
            break;
        case LayerKind::MaxPool: s = maxpool2d_output_shape(s, spec.window); break;
        case LayerKind::Dense: s = Shape3{1, 1, spec.units}; break;
        case LayerKind::Reshape:
            if (spec.target.size() != s.size())
                throw ArgumentError("reshape to " + to_string(spec.target) + " from " + to_string(s) +
                                    " changes the element count");
            s = spec.target;
            break;
        case LayerKind::Activation: break;
        }
        shapes.push_back(s);
    }
    return shapes;
}

/// N(0, 2 / fan_in) samples, deterministic per seed.
inline std::vector<double> he_normal_init(std::size_t count, std::size_t fan_in, std::uint64_t seed) {
    if (fan_in == 0) throw ArgumentError("he_normal_init: fan_in must be positive");
    Rng rng(seed);
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    std::vector<double> w(count);
    for (double& x : w) x = sd * standard_normal(rng);
    return w;
}

/// Ordered stack of runtime layers built from specs. A spec carrying a non-identity
/// activation expands into the operation followed by an ActivationLayer.
class Sequential {
public:
    Sequential() = default;
    Sequential(Shape3 input, const std::vector<LayerSpec>& specs) : input_(input) {
        Shape3 s = input;
        for (const LayerSpec& spec : specs) {
            std::unique_ptr<Layer> layer;
            switch (spec.kind) {
            case LayerKind::Conv: layer = std::make_unique<ConvLayer>(s, spec.units, spec.window); break;
            case LayerKind::ConvTranspose:
                layer = std::make_unique<ConvTransposeLayer>(s, spec.units, spec.window);
                break;
            case LayerKind::MaxPool: layer = std::make_unique<MaxPoolLayer>(s, spec.window); break;
            case LayerKind::Dense: layer = std::make_unique<DenseLayer>(s, spec.units); break;
            case LayerKind::Reshape: layer = std::make_unique<ReshapeLayer>(s, spec.target); break;
            case LayerKind::Activation:
                layer = std::make_unique<ActivationLayer>(s, spec.activation, spec.alpha);
                break;
            }
            s = layer->output_shape();
            layers_.push_back(std::move(layer));
            if (spec.kind != LayerKind::Activation && spec.activation != ActivationKind::Identity) {
                layers_.push_back(std::make_unique<ActivationLayer>(s, spec.activation, spec.alpha));
            }
        }
    }

    Sequential(const Sequential& o) : input_(o.input_) {
        layers_.reserve(o.layers_.size());
        for (const auto& l : o.layers_) layers_.push_back(l->clone());
    }
    Sequential& operator=(const Sequential& o) {
        if (this != &o) {
            Sequential tmp(o);
            *this = std::move(tmp);
        }
        return *this;
    }
    Sequential(Sequential&&) noexcept = default;
    Sequential& operator=(Sequential&&) noexcept = default;

    const Shape3& input_shape() const { return input_; }
    Shape3 output_shape() const { return layers_.empty() ? input_ : layers_.back()->output_shape(); }
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l->params().size();
        return n;
    }

    /// He-normal weights and zero biases; layer i draws from derive_seed(seed, i).
    void initialize(std::uint64_t seed) {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            Layer& l = *layers_[i];
            if (l.params().empty()) continue;
            std::vector<double> w = he_normal_init(l.weight_count(), l.fan_in(), derive_seed(seed, i));
            std::copy(w.begin(), w.end(), l.params().begin());
            std::fill(l.params().begin() + static_cast<std::ptrdiff_t>(l.weight_count()),
                      l.params().end(), 0.0);
        }
    }

    /// Returns a reference to the last layer's output buffer (valid until the next call).
    const Tensor4& forward(const Tensor4& in) {
        const Tensor4* x = &in;
        for (auto& l : layers_) x = &l->forward(*x);
        if (layers_.empty()) {
            passthrough_ = in;
            return passthrough_;
        }
        return *x;
    }

    /// Backpropagates through every layer, accumulating parameter gradients. Throws
    /// TrainingError naming the first layer whose parameter gradients become non-finite;
    /// non-finite input gradients are reported against layer 0.
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad = true) {
        if (layers_.empty()) {
            passthrough_ = grad_out;
            return passthrough_;
        }
        const Tensor4* g = &grad_out;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            const bool want = need_input_grad || i > 0;
            g = &layers_[i]->backward(*g, want);
            for (double v : layers_[i]->grads())
                if (!std::isfinite(v))
                    throw TrainingError("non-finite parameter gradient in layer " + std::to_string(i) +
                                        " (" + to_string(layers_[i]->kind()) + ")");
        }
        if (need_input_grad)
            for (double v : g->data)
                if (!std::isfinite(v))
                    throw TrainingError("non-finite input gradient after layer 0 (" +
                                        to_string(layers_[0]->kind()) + ")");
        return *g;
    }

    void zero_grads() {
        for (auto& l : layers_) l->zero_grads();
    }

private:
    Shape3 input_;
    std::vector<std::unique_ptr<Layer>> layers_;
    Tensor4 passthrough_;
};

}  // namespace romforge::nn
