#pragma once

// Forward and backward kernels for the layer kinds. Convolutions are cross-correlations
// (no kernel flip) lowered to im2col + GEMM. "Same" zero padding: output extent is
// ceil(in / stride) and the total padding max((out - 1) * stride + k - in, 0) is split
// floor/ceil between the leading and trailing edge.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"
#include "romforge/nn/tensor.hpp"

namespace romforge::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

struct Window {
    std::size_t kh = 1, kw = 1;  ///< kernel or pooling window
    std::size_t sh = 1, sw = 1;  ///< stride
};

/// Geometry of a "same"-padded sliding window.
struct SameGeometry {
    std::size_t in_h, in_w, out_h, out_w, pad_top, pad_left;
};

inline SameGeometry same_geometry(std::size_t in_h, std::size_t in_w, const Window& win) {
    if (win.kh == 0 || win.kw == 0 || win.sh == 0 || win.sw == 0)
        throw ArgumentError("kernel and stride extents must be positive");
    SameGeometry g{};
    g.in_h = in_h;
    g.in_w = in_w;
    g.out_h = (in_h + win.sh - 1) / win.sh;
    g.out_w = (in_w + win.sw - 1) / win.sw;
    const auto pad_total = [](std::size_t out, std::size_t s, std::size_t k, std::size_t in) {
        const std::size_t span = (out - 1) * s + k;
        return span > in ? span - in : std::size_t{0};
    };
    g.pad_top = pad_total(g.out_h, win.sh, win.kh, in_h) / 2;
    g.pad_left = pad_total(g.out_w, win.sw, win.kw, in_w) / 2;
    return g;
}

/// Rows indexed (batch, out_y, out_x); columns (ky, kx, channel).
inline void im2col(const double* in, std::size_t batch, std::size_t channels,
                   const SameGeometry& g, const Window& win, RowMatrix& cols) {
    const std::size_t k = win.kh * win.kw * channels;
    cols.resize(static_cast<Eigen::Index>(batch * g.out_h * g.out_w), static_cast<Eigen::Index>(k));
    double* dst = cols.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const double* src_b = in + b * g.in_h * g.in_w * channels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                for (std::size_t ky = 0; ky < win.kh; ++ky) {
                    const long iy = static_cast<long>(oy * win.sh + ky) - static_cast<long>(g.pad_top);
                    if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
                        std::fill_n(dst, win.kw * channels, 0.0);
                        dst += win.kw * channels;
                        continue;
                    }
                    for (std::size_t kx = 0; kx < win.kw; ++kx) {
                        const long ix =
                            static_cast<long>(ox * win.sw + kx) - static_cast<long>(g.pad_left);
                        if (ix < 0 || ix >= static_cast<long>(g.in_w)) {
                            std::fill_n(dst, channels, 0.0);
                        } else {
                            std::memcpy(dst, src_b + (static_cast<std::size_t>(iy) * g.in_w +
                                                      static_cast<std::size_t>(ix)) * channels,
                                        channels * sizeof(double));
                        }
                        dst += channels;
                    }
                }
            }
        }
    }
}

/// Adjoint of im2col: scatter-adds columns back into an NHWC buffer (not cleared).
inline void col2im_add(const RowMatrix& cols, std::size_t batch, std::size_t channels,
                       const SameGeometry& g, const Window& win, double* out) {
    const double* src = cols.data();
    for (std::size_t b = 0; b < batch; ++b) {
        double* dst_b = out + b * g.in_h * g.in_w * channels;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                for (std::size_t ky = 0; ky < win.kh; ++ky) {
                    const long iy = static_cast<long>(oy * win.sh + ky) - static_cast<long>(g.pad_top);
                    if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
                        src += win.kw * channels;
                        continue;
                    }
                    for (std::size_t kx = 0; kx < win.kw; ++kx) {
                        const long ix =
                            static_cast<long>(ox * win.sw + kx) - static_cast<long>(g.pad_left);
                        if (ix >= 0 && ix < static_cast<long>(g.in_w)) {
                            double* d = dst_b + (static_cast<std::size_t>(iy) * g.in_w +
                                                 static_cast<std::size_t>(ix)) * channels;
                            for (std::size_t c = 0; c < channels; ++c) d[c] += src[c];
                        }
                        src += channels;
                    }
                }
            }
        }
    }
}

/// Kernel of a convolution-like layer: weights laid out (kh, kw, c_in, c_out).
struct ConvKernel {
    Window window;
    std::size_t c_in = 1, c_out = 1;

    std::size_t weight_count() const { return window.kh * window.kw * c_in * c_out; }
};

namespace detail {

inline void check_params(const ConvKernel& k, std::span<const double> w, std::span<const double> b,
                         const char* op) {
    if (w.size() != k.weight_count() || b.size() != k.c_out)
        throw ArgumentError(std::string(op) + ": expected " + std::to_string(k.weight_count()) +
                            " weights and " + std::to_string(k.c_out) + " biases, got " +
                            std::to_string(w.size()) + " and " + std::to_string(b.size()));
}

inline void add_bias(double* data, std::size_t rows, std::span<const double> bias) {
    const auto c = static_cast<Eigen::Index>(bias.size());
    RowMap(data, static_cast<Eigen::Index>(rows), c).rowwise() +=
        Eigen::Map<const Eigen::RowVectorXd>(bias.data(), c);
}

inline void accumulate_bias_grad(const double* grad, std::size_t rows, std::span<double> gb) {
    const auto c = static_cast<Eigen::Index>(gb.size());
    Eigen::Map<Eigen::RowVectorXd>(gb.data(), c) +=
        ConstRowMap(grad, static_cast<Eigen::Index>(rows), c).colwise().sum();
}

/// Transposed-convolution weights as a c_in x (kh kw c_out) matrix.
inline RowMatrix transpose_kernel_matrix(const ConvKernel& k, std::span<const double> w) {
    const std::size_t taps = k.window.kh * k.window.kw;
    RowMatrix m(static_cast<Eigen::Index>(k.c_in), static_cast<Eigen::Index>(taps * k.c_out));
    for (std::size_t t = 0; t < taps; ++t)
        for (std::size_t ci = 0; ci < k.c_in; ++ci)
            for (std::size_t co = 0; co < k.c_out; ++co)
                m(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(t * k.c_out + co)) =
                    w[(t * k.c_in + ci) * k.c_out + co];
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------
// Convolution

inline Shape3 conv2d_output_shape(const Shape3& in, const ConvKernel& k) {
    const SameGeometry g = same_geometry(in.h, in.w, k.window);
    return {g.out_h, g.out_w, k.c_out};
}

/// Cross-correlation with "same" zero padding into `out`. Samples are lowered one at a
/// time so the im2col block stays cache-resident; `work` is scratch space.
inline void conv2d_forward_into(const Tensor4& in, std::span<const double> weights,
                                std::span<const double> bias, const ConvKernel& k, RowMatrix& work,
                                Tensor4& out) {
    detail::check_params(k, weights, bias, "conv2d_forward");
    if (in.shape.c != k.c_in)
        throw ArgumentError("conv2d_forward: input has " + std::to_string(in.shape.c) +
                            " channels, kernel expects " + std::to_string(k.c_in));
    const SameGeometry g = same_geometry(in.shape.h, in.shape.w, k.window);
    out.reshape_uninitialized(in.batch, Shape3{g.out_h, g.out_w, k.c_out});
    const auto rows = static_cast<Eigen::Index>(g.out_h * g.out_w);
    const auto kdim = static_cast<Eigen::Index>(k.window.kh * k.window.kw * k.c_in);
    const auto cout = static_cast<Eigen::Index>(k.c_out);
    ConstRowMap w(weights.data(), kdim, cout);
    for (std::size_t b = 0; b < in.batch; ++b) {
        im2col(in.sample(b), 1, k.c_in, g, k.window, work);
        RowMap(out.sample(b), rows, cout).noalias() = work * w;
    }
    detail::add_bias(out.data.data(), in.batch * g.out_h * g.out_w, bias);
}

inline Tensor4 conv2d_forward(const Tensor4& in, std::span<const double> weights,
                              std::span<const double> bias, const ConvKernel& k) {
    RowMatrix work;
    Tensor4 out;
    conv2d_forward_into(in, weights, bias, k, work, out);
    return out;
}

/// Accumulates weight and bias gradients given the forward input; writes the input
/// gradient when `grad_in` is non-null. `work` is scratch space.
inline void conv2d_backward(const Tensor4& in, std::span<const double> weights, const ConvKernel& k,
                            const Tensor4& grad_out, std::span<double> grad_w,
                            std::span<double> grad_b, Tensor4* grad_in, RowMatrix* work = nullptr) {
    const SameGeometry g = same_geometry(in.shape.h, in.shape.w, k.window);
    const auto rows = static_cast<Eigen::Index>(g.out_h * g.out_w);
    const auto kdim = static_cast<Eigen::Index>(k.window.kh * k.window.kw * k.c_in);
    const auto cout = static_cast<Eigen::Index>(k.c_out);
    if (grad_out.batch != in.batch || !(grad_out.shape == Shape3{g.out_h, g.out_w, k.c_out}))
        throw ArgumentError("conv2d_backward: gradient shape does not match the forward output");
    RowMatrix local;
    RowMatrix& cols = work ? *work : local;
    ConstRowMap w(weights.data(), kdim, cout);
    RowMap gw(grad_w.data(), kdim, cout);
    if (grad_in) grad_in->reshape_uninitialized(in.batch, in.shape);
    for (std::size_t b = 0; b < in.batch; ++b) {
        ConstRowMap go(grad_out.sample(b), rows, cout);
        im2col(in.sample(b), 1, k.c_in, g, k.window, cols);
        gw.noalias() += cols.transpose() * go;
        if (grad_in) {
            cols.noalias() = go * w.transpose();
            double* gi = grad_in->sample(b);
            std::fill_n(gi, in.sample_size(), 0.0);
            col2im_add(cols, 1, k.c_in, g, k.window, gi);
        }
    }
    detail::accumulate_bias_grad(grad_out.data.data(), in.batch * g.out_h * g.out_w, grad_b);
}

// ---------------------------------------------------------------------------------------
// Transposed convolution: the exact adjoint of conv2d mapping an (h*sh, w*sw) grid to
// (h, w), with the channel roles of the weight array swapped.

inline Shape3 conv2d_transpose_output_shape(const Shape3& in, const ConvKernel& k) {
    return {in.h * k.window.sh, in.w * k.window.sw, k.c_out};
}

inline void conv2d_transpose_forward_into(const Tensor4& in, std::span<const double> weights,
                                          std::span<const double> bias, const ConvKernel& k,
                                          RowMatrix& work, Tensor4& out) {
    detail::check_params(k, weights, bias, "conv2d_transpose_forward");
    if (in.shape.c != k.c_in)
        throw ArgumentError("conv2d_transpose_forward: input has " + std::to_string(in.shape.c) +
                            " channels, kernel expects " + std::to_string(k.c_in));
    const Shape3 os = conv2d_transpose_output_shape(in.shape, k);
    const SameGeometry g = same_geometry(os.h, os.w, k.window);
    const RowMatrix m = detail::transpose_kernel_matrix(k, weights);
    const auto rows = static_cast<Eigen::Index>(in.shape.h * in.shape.w);
    out.reshape_uninitialized(in.batch, os);
    std::fill(out.data.begin(), out.data.end(), 0.0);
    work.resize(rows, m.cols());
    for (std::size_t b = 0; b < in.batch; ++b) {
        work.noalias() = ConstRowMap(in.sample(b), rows, static_cast<Eigen::Index>(k.c_in)) * m;
        col2im_add(work, 1, k.c_out, g, k.window, out.sample(b));
    }
    detail::add_bias(out.data.data(), in.batch * os.h * os.w, bias);
}

inline Tensor4 conv2d_transpose_forward(const Tensor4& in, std::span<const double> weights,
                                        std::span<const double> bias, const ConvKernel& k) {
    RowMatrix work;
    Tensor4 out;
    conv2d_transpose_forward_into(in, weights, bias, k, work, out);
    return out;
}

inline void conv2d_transpose_backward(const Tensor4& in, std::span<const double> weights,
                                      const ConvKernel& k, const Tensor4& grad_out,
                                      std::span<double> grad_w, std::span<double> grad_b,
                                      Tensor4* grad_in, RowMatrix* work = nullptr) {
    const Shape3 os = conv2d_transpose_output_shape(in.shape, k);
    if (grad_out.batch != in.batch || !(grad_out.shape == os))
        throw ArgumentError("conv2d_transpose_backward: gradient shape does not match the forward output");
    const SameGeometry g = same_geometry(os.h, os.w, k.window);
    RowMatrix local;
    RowMatrix& gcols = work ? *work : local;
    const auto rows = static_cast<Eigen::Index>(in.shape.h * in.shape.w);
    const auto cin = static_cast<Eigen::Index>(k.c_in);
    const std::size_t taps = k.window.kh * k.window.kw;
    RowMatrix gm = RowMatrix::Zero(cin, static_cast<Eigen::Index>(taps * k.c_out));  // c_in x (kh kw c_out)
    RowMatrix m;
    if (grad_in) {
        m = detail::transpose_kernel_matrix(k, weights);
        grad_in->reshape_uninitialized(in.batch, in.shape);
    }
    for (std::size_t b = 0; b < in.batch; ++b) {
        im2col(grad_out.sample(b), 1, k.c_out, g, k.window, gcols);
        ConstRowMap x(in.sample(b), rows, cin);
        gm.noalias() += x.transpose() * gcols;
        if (grad_in) RowMap(grad_in->sample(b), rows, cin).noalias() = gcols * m.transpose();
    }
    for (std::size_t t = 0; t < taps; ++t)
        for (std::size_t ci = 0; ci < k.c_in; ++ci)
            for (std::size_t co = 0; co < k.c_out; ++co)
                grad_w[(t * k.c_in + ci) * k.c_out + co] +=
                    gm(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(t * k.c_out + co));
    detail::accumulate_bias_grad(grad_out.data.data(), grad_out.batch * os.h * os.w, grad_b);
}

// ---------------------------------------------------------------------------------------
// Max pooling. Padded positions never win; ties go to the first element in row-major
// window order.

struct PoolResult {
    Tensor4 output;
    std::vector<std::size_t> argmax;  ///< flat input offset per output element
};

inline Shape3 maxpool2d_output_shape(const Shape3& in, const Window& win) {
    const SameGeometry g = same_geometry(in.h, in.w, win);
    return {g.out_h, g.out_w, in.c};
}

inline void maxpool2d_forward_into(const Tensor4& in, const Window& win, Tensor4& out,
                                   std::vector<std::size_t>& argmax) {
    const SameGeometry g = same_geometry(in.shape.h, in.shape.w, win);
    const std::size_t c = in.shape.c;
    out.reshape_uninitialized(in.batch, Shape3{g.out_h, g.out_w, c});
    argmax.resize(out.size());
    const double* src = in.data.data();
    double* dst = out.data.data();
    std::size_t* arg = argmax.data();
    for (std::size_t b = 0; b < in.batch; ++b) {
        const std::size_t base = b * g.in_h * g.in_w * c;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            const long y0 = static_cast<long>(oy * win.sh) - static_cast<long>(g.pad_top);
            const std::size_t ky0 = y0 < 0 ? static_cast<std::size_t>(-y0) : 0;
            const std::size_t ky1 = std::min<std::size_t>(win.kh, static_cast<std::size_t>(static_cast<long>(g.in_h) - y0));
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                const long x0 = static_cast<long>(ox * win.sw) - static_cast<long>(g.pad_left);
                const std::size_t kx0 = x0 < 0 ? static_cast<std::size_t>(-x0) : 0;
                const std::size_t kx1 = std::min<std::size_t>(win.kw, static_cast<std::size_t>(static_cast<long>(g.in_w) - x0));
                // First valid tap seeds the running maximum for every channel.
                const std::size_t first =
                    base + (static_cast<std::size_t>(y0 + static_cast<long>(ky0)) * g.in_w +
                            static_cast<std::size_t>(x0 + static_cast<long>(kx0))) * c;
                for (std::size_t ch = 0; ch < c; ++ch) {
                    dst[ch] = src[first + ch];
                    arg[ch] = first + ch;
                }
                for (std::size_t ky = ky0; ky < ky1; ++ky)
                    for (std::size_t kx = (ky == ky0 ? kx0 + 1 : kx0); kx < kx1; ++kx) {
                        const std::size_t at =
                            base + (static_cast<std::size_t>(y0 + static_cast<long>(ky)) * g.in_w +
                                    static_cast<std::size_t>(x0 + static_cast<long>(kx))) * c;
                        for (std::size_t ch = 0; ch < c; ++ch)
                            if (src[at + ch] > dst[ch]) {
                                dst[ch] = src[at + ch];
                                arg[ch] = at + ch;
                            }
                    }
                dst += c;
                arg += c;
            }
        }
    }
}

inline PoolResult maxpool2d_forward(const Tensor4& in, const Window& win) {
    PoolResult r;
    maxpool2d_forward_into(in, win, r.output, r.argmax);
    return r;
}

inline void maxpool2d_backward_into(const Shape3& in_shape, std::size_t batch,
                                    const std::vector<std::size_t>& argmax, const Tensor4& grad_out,
                                    Tensor4& grad_in) {
    grad_in.reshape_uninitialized(batch, in_shape);
    std::fill(grad_in.data.begin(), grad_in.data.end(), 0.0);
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data[argmax[i]] += grad_out.data[i];
}

inline Tensor4 maxpool2d_backward(const Shape3& in_shape, std::size_t batch,
                                  const std::vector<std::size_t>& argmax, const Tensor4& grad_out) {
    Tensor4 grad_in;
    maxpool2d_backward_into(in_shape, batch, argmax, grad_out, grad_in);
    return grad_in;
}

// ---------------------------------------------------------------------------------------
// Dense: h_out = W h_in + b with W stored units_out x units_in (row-major). The input
// sample is read flat in its (row, col, channel) order.

inline void dense_forward_into(const Tensor4& in, std::span<const double> weights,
                               std::span<const double> bias, Tensor4& out) {
    const std::size_t n_in = in.sample_size(), n_out = bias.size();
    if (weights.size() != n_in * n_out)
        throw ArgumentError("dense_forward: weight count " + std::to_string(weights.size()) +
                            " does not match " + std::to_string(n_out) + "x" + std::to_string(n_in));
    out.reshape_uninitialized(in.batch, Shape3{1, 1, n_out});
    const auto b = static_cast<Eigen::Index>(in.batch);
    RowMap(out.data.data(), b, static_cast<Eigen::Index>(n_out)).noalias() =
        ConstRowMap(in.data.data(), b, static_cast<Eigen::Index>(n_in)) *
        ConstRowMap(weights.data(), static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_in))
            .transpose();
    detail::add_bias(out.data.data(), in.batch, bias);
}

inline Tensor4 dense_forward(const Tensor4& in, std::span<const double> weights,
                             std::span<const double> bias) {
    Tensor4 out;
    dense_forward_into(in, weights, bias, out);
    return out;
}

inline void dense_backward(const Tensor4& in, std::span<const double> weights,
                           const Tensor4& grad_out, std::span<double> grad_w,
                           std::span<double> grad_b, Tensor4* grad_in) {
    const auto n_in = static_cast<Eigen::Index>(in.sample_size());
    const auto n_out = static_cast<Eigen::Index>(grad_b.size());
    const auto b = static_cast<Eigen::Index>(in.batch);
    ConstRowMap go(grad_out.data.data(), b, n_out);
    ConstRowMap x(in.data.data(), b, n_in);
    RowMap(grad_w.data(), n_out, n_in).noalias() += go.transpose() * x;
    detail::accumulate_bias_grad(grad_out.data.data(), in.batch, grad_b);
    if (grad_in) {
        grad_in->reshape_uninitialized(in.batch, in.shape);
        RowMap(grad_in->data.data(), b, n_in).noalias() = go * ConstRowMap(weights.data(), n_out, n_in);
    }
}

// ---------------------------------------------------------------------------------------
// Activations

inline double leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }
inline double leaky_relu_derivative(double x, double alpha) { return x >= 0.0 ? 1.0 : alpha; }

/// Logistic function evaluated without overflow for large |x|.
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------------------------------
// Loss

inline double mse_loss(const Tensor4& pred, const Tensor4& target) {
    require_same_shape(pred, target, "mse_loss");
    if (pred.size() == 0) throw ArgumentError("mse_loss: empty tensors");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

inline void mse_gradient_into(const Tensor4& pred, const Tensor4& target, Tensor4& g) {
    require_same_shape(pred, target, "mse_gradient");
    g.reshape_uninitialized(pred.batch, pred.shape);
    const double scale = 2.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) g.data[i] = scale * (pred.data[i] - target.data[i]);
}

inline Tensor4 mse_gradient(const Tensor4& pred, const Tensor4& target) {
    Tensor4 g;
    mse_gradient_into(pred, target, g);
    return g;
}

}  // namespace romforge::nn
