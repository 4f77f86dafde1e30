#pragma once

// Mini-batch Adam training of an autoencoder on its own input (MSE reconstruction loss)
// with validation-loss early stopping and best-epoch restoration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/nn/adam.hpp"
#include "romforge/nn/cae.hpp"
#include "romforge/random.hpp"

namespace romforge::rom {

struct TrainConfig {
    double learning_rate = 3e-4;
    std::size_t batch_size = 8;
    std::size_t max_epochs = 7500;
    std::size_t patience = 500;
};

struct TrainResult {
    std::size_t epochs = 0;      ///< epochs run
    std::size_t best_epoch = 0;  ///< 1-based epoch whose parameters were restored
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool stopped_early = false;
    std::vector<double> train_loss;  ///< per epoch, mean over mini-batches weighted by size
    std::vector<double> val_loss;    ///< per epoch
};

namespace detail {

inline void gather(const nn::Tensor4& src, const std::vector<std::size_t>& idx, std::size_t from,
                   std::size_t count, nn::Tensor4& dst) {
    dst.reshape_uninitialized(count, src.shape);
    const std::size_t s = src.sample_size();
    for (std::size_t i = 0; i < count; ++i) std::copy_n(src.sample(idx[from + i]), s, dst.sample(i));
}

inline std::vector<nn::Buffer> snapshot_params(nn::CaeNetwork& net) {
    std::vector<nn::Buffer> p;
    for (nn::Sequential* s : {&net.encoder, &net.decoder})
        for (std::size_t i = 0; i < s->size(); ++i) p.push_back(s->layer(i).params());
    return p;
}

inline void restore_params(nn::CaeNetwork& net, const std::vector<nn::Buffer>& p) {
    std::size_t k = 0;
    for (nn::Sequential* s : {&net.encoder, &net.decoder})
        for (std::size_t i = 0; i < s->size(); ++i) s->layer(i).params() = p[k++];
}

inline double sum_squared_diff(const nn::Tensor4& a, const nn::Tensor4& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace detail

/// Mean squared reconstruction error over a data set, evaluated in chunks.
inline double reconstruction_loss(nn::CaeNetwork& net, const nn::Tensor4& data, std::size_t chunk = 8) {
    if (data.batch == 0) throw ArgumentError("reconstruction loss of an empty data set");
    std::vector<std::size_t> idx(data.batch);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    nn::Tensor4 x;
    double acc = 0.0;
    for (std::size_t from = 0; from < data.batch; from += chunk) {
        const std::size_t m = std::min(chunk, data.batch - from);
        detail::gather(data, idx, from, m, x);
        acc += detail::sum_squared_diff(net.reconstruct(x), x);
    }
    return acc / static_cast<double>(data.size());
}

/// Trains `net` in place. Training samples are reshuffled every epoch from `seed`; the
/// final short batch is kept. Stops after `patience` consecutive epochs without a strict
/// validation improvement and restores the best epoch's parameters.
inline TrainResult train_autoencoder(nn::CaeNetwork& net, const nn::Tensor4& train, const nn::Tensor4& val,
                                     const TrainConfig& cfg, std::uint64_t seed) {
    if (train.batch == 0) throw ArgumentError("autoencoder training set is empty");
    if (val.batch == 0) throw ArgumentError("early stopping needs a nonempty validation set");
    if (!(train.shape == net.input) || !(val.shape == net.input))
        throw ArgumentError("training data shape " + nn::to_string(train.shape) +
                            " does not match network input " + nn::to_string(net.input));
    if (cfg.batch_size == 0) throw ArgumentError("mini-batch size must be positive");
    if (cfg.max_epochs == 0) throw ArgumentError("max epochs must be positive");
    if (cfg.patience == 0) throw ArgumentError("early-stopping patience must be positive");
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw ArgumentError("learning rate must be finite and nonnegative");

    nn::AdamConfig adam;
    adam.learning_rate = cfg.learning_rate;
    nn::AdamOptimizer opt({&net.encoder, &net.decoder}, adam);
    Rng rng(seed);
    std::vector<std::size_t> order(train.batch);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult r;
    std::vector<nn::Buffer> best = detail::snapshot_params(net);
    std::size_t since_best = 0;
    nn::Tensor4 x, grad;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_sq = 0.0;
        for (std::size_t from = 0; from < train.batch; from += cfg.batch_size) {
            const std::size_t m = std::min(cfg.batch_size, train.batch - from);
            detail::gather(train, order, from, m, x);
            net.encoder.zero_grads();
            net.decoder.zero_grads();
            const nn::Tensor4& y = net.reconstruct(x);
            epoch_sq += detail::sum_squared_diff(y, x);
            nn::mse_gradient_into(y, x, grad);
            try {
                const nn::Tensor4& g_code = net.decoder.backward(grad, true);
                net.encoder.backward(g_code, false);
            } catch (const TrainingError& e) {
                throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
            }
            opt.step();
        }
        const double train_loss = epoch_sq / static_cast<double>(train.size());
        const double val_loss = reconstruction_loss(net, val, cfg.batch_size);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw TrainingError("epoch " + std::to_string(epoch) + ": non-finite loss (train " +
                                std::to_string(train_loss) + ", validation " + std::to_string(val_loss) + ")");
        r.train_loss.push_back(train_loss);
        r.val_loss.push_back(val_loss);
        r.epochs = epoch;
        if (val_loss < r.best_val_loss) {
            r.best_val_loss = val_loss;
            r.best_epoch = epoch;
            best = detail::snapshot_params(net);
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            r.stopped_early = true;
            break;
        }
    }
    detail::restore_params(net, best);
    return r;
}

}  // namespace romforge::rom
