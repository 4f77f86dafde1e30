#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/nn/network.hpp"
#include "romforge/random.hpp"

namespace romforge::nn {

/// Encoder/decoder pair. The encoder maps (h, w, c) to a code of length code_dim and the
/// decoder maps the code back to (h, w, c).
struct CaeNetwork {
    Shape3 input;
    std::size_t code_dim = 0;
    std::vector<LayerSpec> encoder_specs;
    std::vector<LayerSpec> decoder_specs;
    Sequential encoder;
    Sequential decoder;

    CaeNetwork() = default;
    CaeNetwork(Shape3 in, std::size_t k, std::vector<LayerSpec> enc, std::vector<LayerSpec> dec)
        : input(in), code_dim(k), encoder_specs(std::move(enc)), decoder_specs(std::move(dec)),
          encoder(in, encoder_specs), decoder(Shape3{1, 1, k}, decoder_specs) {
        if (k == 0) throw ArgumentError("autoencoder code dimension must be at least 1");
        if (!(encoder.output_shape() == Shape3{1, 1, k}))
            throw ArgumentError("encoder output " + to_string(encoder.output_shape()) +
                                " does not match code dimension " + std::to_string(k));
        if (!(decoder.output_shape() == in))
            throw ArgumentError("decoder output " + to_string(decoder.output_shape()) +
                                " does not match input " + to_string(in));
    }

    std::size_t parameter_count() const { return encoder.parameter_count() + decoder.parameter_count(); }

    void initialize(std::uint64_t seed) {
        encoder.initialize(derive_seed(seed, 0));
        decoder.initialize(derive_seed(seed, 1));
    }

    const Tensor4& encode(const Tensor4& x) { return encoder.forward(x); }
    const Tensor4& decode(const Tensor4& a) { return decoder.forward(a); }
    const Tensor4& reconstruct(const Tensor4& x) { return decoder.forward(encoder.forward(x)); }
};

/// Number of trainable parameters implied by specs alone.
inline std::size_t parameter_count(Shape3 input, const std::vector<LayerSpec>& specs) {
    std::size_t n = 0;
    Shape3 s = input;
    const std::vector<Shape3> shapes = infer_shapes(input, specs);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& spec = specs[i];
        switch (spec.kind) {
        case LayerKind::Conv:
        case LayerKind::ConvTranspose:
            n += spec.window.kh * spec.window.kw * s.c * spec.units + spec.units;
            break;
        case LayerKind::Dense: n += s.size() * spec.units + spec.units; break;
        default: break;
        }
        s = shapes[i];
    }
    return n;
}

inline std::size_t scaled_width(std::size_t base, double scale) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(base) * scale)));
}

/// Convolutional autoencoder with the layer table used for the lid-driven-cavity ROM:
/// two 3x3 conv + 2x2 max-pool stages, dense 128 -> code k, mirrored dense layers and
/// three 3x3 transposed convolutions. Filter counts and dense widths are multiplied by
/// width_scale. Hidden layers use leaky ReLU(alpha); the output layer uses a sigmoid.
inline CaeNetwork build_paper_cae(std::size_t h, std::size_t w, std::size_t c, std::size_t k,
                                  double width_scale, double alpha = 0.25) {
    if (h == 0 || w == 0 || h % 4 != 0 || w % 4 != 0)
        throw ArgumentError("CAE input " + std::to_string(h) + "x" + std::to_string(w) +
                            " must be divisible by 4 in both directions");
    if (c == 0) throw ArgumentError("CAE input needs at least one channel");
    if (k == 0) throw ArgumentError("CAE code dimension must be at least 1");
    if (!(width_scale > 0.0 && width_scale <= 1.0))
        throw ArgumentError("CAE width scale must lie in (0, 1]");

    const std::size_t f1 = scaled_width(64, width_scale);
    const std::size_t f2 = scaled_width(32, width_scale);
    const std::size_t hidden = scaled_width(128, width_scale);
    const Shape3 bottleneck{h / 4, w / 4, f2};
    const Window conv3{3, 3, 1, 1}, up3{3, 3, 2, 2}, pool2{2, 2, 2, 2};
    const auto leaky = ActivationKind::LeakyRelu;

    std::vector<LayerSpec> enc{
        {LayerKind::Conv, f1, conv3, leaky, alpha, {}},
        {LayerKind::MaxPool, 0, pool2, ActivationKind::Identity, alpha, {}},
        {LayerKind::Conv, f2, conv3, leaky, alpha, {}},
        {LayerKind::MaxPool, 0, pool2, ActivationKind::Identity, alpha, {}},
        {LayerKind::Reshape, 0, {}, ActivationKind::Identity, alpha, Shape3{1, 1, bottleneck.size()}},
        {LayerKind::Dense, hidden, {}, leaky, alpha, {}},
        {LayerKind::Dense, k, {}, leaky, alpha, {}},
    };
    std::vector<LayerSpec> dec{
        {LayerKind::Dense, hidden, {}, leaky, alpha, {}},
        {LayerKind::Dense, bottleneck.size(), {}, leaky, alpha, {}},
        {LayerKind::Reshape, 0, {}, ActivationKind::Identity, alpha, bottleneck},
        {LayerKind::ConvTranspose, f2, up3, leaky, alpha, {}},
        {LayerKind::ConvTranspose, f1, up3, leaky, alpha, {}},
        {LayerKind::ConvTranspose, c, conv3, ActivationKind::Sigmoid, alpha, {}},
    };
    return CaeNetwork(Shape3{h, w, c}, k, std::move(enc), std::move(dec));
}

}  // namespace romforge::nn
