#pragma once

#include <cstdint>
#include <vector>

#include "romforge/nn/cae.hpp"
#include "romforge/nn/layers.hpp"
#include "romforge/nn/ops.hpp"

namespace romforge::fdcheck {

struct Probe {
    double loss = 0.0;
    // Output signs of every layer plus pool selections; constant on each smooth piece.
    std::vector<std::int64_t> pattern;
};

inline Probe probe_reconstruction(nn::CaeNetwork& net, const nn::Tensor4& x) {
    Probe p;
    nn::Tensor4 t = x;
    for (nn::Sequential* s : {&net.encoder, &net.decoder})
        for (std::size_t i = 0; i < s->size(); ++i) {
            nn::Layer& l = s->layer(i);
            t = l.forward(t);
            if (l.kind() == nn::LayerKind::MaxPool) {
                for (std::size_t a : static_cast<const nn::MaxPoolLayer&>(l).argmax())
                    p.pattern.push_back(static_cast<std::int64_t>(a));
            } else {
                for (double v : t.data) p.pattern.push_back(v > 0.0 ? 1 : (v < 0.0 ? -1 : 0));
            }
        }
    p.loss = nn::mse_loss(t, x);
    return p;
}

struct FdResult {
    std::vector<double> grad;
    std::size_t refined = 0;   // coordinates that needed a smaller step
    std::size_t unresolved = 0;  // coordinates still straddling a kink at the smallest step
};

// Central differences of the reconstruction loss w.r.t. one layer's parameters. A step that
// moves the network onto a different smooth piece is retried ten times smaller.
inline FdResult kink_aware_fd(nn::CaeNetwork& net, nn::Layer& layer, const nn::Tensor4& x,
                              double h = 1e-5, int max_refine = 2) {
    const Probe base = probe_reconstruction(net, x);
    FdResult r;
    r.grad.resize(layer.params().size());
    for (std::size_t j = 0; j < r.grad.size(); ++j) {
        const double v = layer.params()[j];
        double step = h;
        for (int attempt = 0;; ++attempt) {
            layer.params()[j] = v + step;
            const Probe lp = probe_reconstruction(net, x);
            layer.params()[j] = v - step;
            const Probe lm = probe_reconstruction(net, x);
            layer.params()[j] = v;
            r.grad[j] = (lp.loss - lm.loss) / (2 * step);
            const bool smooth = lp.pattern == base.pattern && lm.pattern == base.pattern;
            if (smooth) break;
            if (attempt == max_refine) {
                ++r.unresolved;
                break;
            }
            if (attempt == 0) ++r.refined;
            step /= 10;
        }
    }
    return r;
}

}  // namespace romforge::fdcheck
