#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "romforge/error.hpp"
#include "romforge/nn/ops.hpp"
#include "romforge/nn/tensor.hpp"

namespace romforge::nn {

enum class LayerKind { Conv, ConvTranspose, MaxPool, Dense, Reshape, Activation };
enum class ActivationKind { Identity, LeakyRelu, Sigmoid };

inline std::string to_string(LayerKind k) {
    switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::ConvTranspose: return "conv_transpose";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Dense: return "dense";
    case LayerKind::Reshape: return "reshape";
    case LayerKind::Activation: return "activation";
    }
    return "?";
}

inline std::string to_string(ActivationKind a) {
    switch (a) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::LeakyRelu: return "leaky_relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    }
    return "?";
}

/// One row of an architecture table. `units` is the filter count for Conv and
/// ConvTranspose and the output width for Dense. Reshape uses `target`.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t units = 0;
    Window window;
    ActivationKind activation = ActivationKind::Identity;
    double alpha = 0.25;
    Shape3 target;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Runtime layer: owns its parameters, gradient buffers and output buffers, and caches
/// whatever its backward pass needs from the most recent forward pass. The tensors
/// returned by forward and backward stay valid until the next call on the same layer.
class Layer {
public:
    explicit Layer(Shape3 in) : in_(in) {}
    virtual ~Layer() = default;

    virtual LayerKind kind() const = 0;
    virtual std::unique_ptr<Layer> clone() const = 0;
    virtual const Tensor4& forward(const Tensor4& in) = 0;
    /// Accumulates parameter gradients; returns the input gradient when requested and an
    /// empty tensor otherwise.
    virtual const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) = 0;
    /// Fan-in for He initialization of the weight block (0 for parameter-free layers).
    virtual std::size_t fan_in() const { return 0; }
    virtual std::size_t weight_count() const { return 0; }

    const Shape3& input_shape() const { return in_; }
    const Shape3& output_shape() const { return out_; }
    Buffer& params() { return params_; }
    const Buffer& params() const { return params_; }
    Buffer& grads() { return grads_; }
    const Buffer& grads() const { return grads_; }
    void zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

protected:
    void check_input(const Tensor4& in) const {
        if (!(in.shape == in_))
            throw ArgumentError(to_string(kind()) + " layer expects input " + to_string(in_) +
                                ", got " + to_string(in.shape));
    }
    void check_grad(const Tensor4& g) const {
        if (!(g.shape == out_) || g.batch != batch_)
            throw ArgumentError(to_string(kind()) + " layer expects gradient " +
                                std::to_string(batch_) + "x" + to_string(out_) + ", got " +
                                std::to_string(g.batch) + "x" + to_string(g.shape));
    }
    const Tensor4& no_grad() {
        grad_in_ = Tensor4{};
        return grad_in_;
    }
    std::span<const double> weights() const { return {params_.data(), weight_count()}; }
    std::span<const double> biases() const {
        return {params_.data() + weight_count(), params_.size() - weight_count()};
    }
    std::span<double> weight_grads() { return {grads_.data(), weight_count()}; }
    std::span<double> bias_grads() {
        return {grads_.data() + weight_count(), grads_.size() - weight_count()};
    }
    void allocate(std::size_t count) {
        params_.assign(count, 0.0);
        grads_.assign(count, 0.0);
    }

    Shape3 in_, out_;
    Buffer params_, grads_;
    Tensor4 out_buf_, grad_in_;
    std::size_t batch_ = 0;
};

class ConvLayer final : public Layer {
public:
    ConvLayer(Shape3 in, std::size_t filters, Window win)
        : Layer(in), kernel_{win, in.c, filters} {
        if (filters == 0) throw ArgumentError("conv layer needs at least one filter");
        out_ = conv2d_output_shape(in, kernel_);
        allocate(kernel_.weight_count() + filters);
    }
    LayerKind kind() const override { return LayerKind::Conv; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ConvLayer>(*this); }
    std::size_t fan_in() const override { return kernel_.window.kh * kernel_.window.kw * kernel_.c_in; }
    std::size_t weight_count() const override { return kernel_.weight_count(); }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        input_ = in;
        conv2d_forward_into(in, weights(), biases(), kernel_, work_, out_buf_);
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        conv2d_backward(input_, weights(), kernel_, grad_out, weight_grads(), bias_grads(),
                        need_input_grad ? &grad_in_ : nullptr, &work_);
        return need_input_grad ? grad_in_ : no_grad();
    }

private:
    ConvKernel kernel_;
    Tensor4 input_;
    RowMatrix work_;
};

class ConvTransposeLayer final : public Layer {
public:
    ConvTransposeLayer(Shape3 in, std::size_t filters, Window win)
        : Layer(in), kernel_{win, in.c, filters} {
        if (filters == 0) throw ArgumentError("conv_transpose layer needs at least one filter");
        out_ = conv2d_transpose_output_shape(in, kernel_);
        allocate(kernel_.weight_count() + filters);
    }
    LayerKind kind() const override { return LayerKind::ConvTranspose; }
    std::unique_ptr<Layer> clone() const override {
        return std::make_unique<ConvTransposeLayer>(*this);
    }
    std::size_t fan_in() const override { return kernel_.window.kh * kernel_.window.kw * kernel_.c_in; }
    std::size_t weight_count() const override { return kernel_.weight_count(); }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        input_ = in;
        conv2d_transpose_forward_into(in, weights(), biases(), kernel_, work_, out_buf_);
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        conv2d_transpose_backward(input_, weights(), kernel_, grad_out, weight_grads(), bias_grads(),
                                  need_input_grad ? &grad_in_ : nullptr, &work_);
        return need_input_grad ? grad_in_ : no_grad();
    }

private:
    ConvKernel kernel_;
    Tensor4 input_;
    RowMatrix work_;
};

class MaxPoolLayer final : public Layer {
public:
    MaxPoolLayer(Shape3 in, Window win) : Layer(in), window_(win) {
        out_ = maxpool2d_output_shape(in, win);
    }
    LayerKind kind() const override { return LayerKind::MaxPool; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPoolLayer>(*this); }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        maxpool2d_forward_into(in, window_, out_buf_, argmax_);
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        if (!need_input_grad) return no_grad();
        maxpool2d_backward_into(in_, batch_, argmax_, grad_out, grad_in_);
        return grad_in_;
    }
    /// Flat input index selected for each output element of the last forward pass.
    const std::vector<std::size_t>& argmax() const { return argmax_; }

private:
    Window window_;
    std::vector<std::size_t> argmax_;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(Shape3 in, std::size_t units) : Layer(in) {
        if (units == 0) throw ArgumentError("dense layer needs at least one unit");
        out_ = Shape3{1, 1, units};
        allocate(units * in.size() + units);
    }
    LayerKind kind() const override { return LayerKind::Dense; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }
    std::size_t fan_in() const override { return in_.size(); }
    std::size_t weight_count() const override { return out_.c * in_.size(); }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        input_ = in;
        dense_forward_into(in, weights(), biases(), out_buf_);
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        dense_backward(input_, weights(), grad_out, weight_grads(), bias_grads(),
                       need_input_grad ? &grad_in_ : nullptr);
        return need_input_grad ? grad_in_ : no_grad();
    }

private:
    Tensor4 input_;
};

class ReshapeLayer final : public Layer {
public:
    ReshapeLayer(Shape3 in, Shape3 target) : Layer(in) {
        if (target.size() != in.size())
            throw ArgumentError("reshape from " + to_string(in) + " to " + to_string(target) +
                                " changes the element count");
        out_ = target;
    }
    LayerKind kind() const override { return LayerKind::Reshape; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReshapeLayer>(*this); }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        out_buf_.batch = in.batch;
        out_buf_.shape = out_;
        out_buf_.data = in.data;
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        if (!need_input_grad) return no_grad();
        grad_in_.batch = grad_out.batch;
        grad_in_.shape = in_;
        grad_in_.data = grad_out.data;
        return grad_in_;
    }
};

class ActivationLayer final : public Layer {
    using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
    using ConstArrayMap = Eigen::Map<const Eigen::ArrayXd>;

public:
    ActivationLayer(Shape3 in, ActivationKind act, double alpha = 0.25)
        : Layer(in), act_(act), alpha_(alpha) {
        if (act == ActivationKind::LeakyRelu && !(alpha >= 0.0))
            throw ArgumentError("leaky ReLU slope must be nonnegative");
        out_ = in;
    }
    LayerKind kind() const override { return LayerKind::Activation; }
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ActivationLayer>(*this); }
    ActivationKind activation() const { return act_; }

    const Tensor4& forward(const Tensor4& in) override {
        check_input(in);
        batch_ = in.batch;
        out_buf_.reshape_uninitialized(in.batch, in.shape);
        const std::size_t n = in.size();
        const double* x = in.data.data();
        double* y = out_buf_.data.data();
        const double a = alpha_;
        switch (act_) {
        case ActivationKind::Identity: std::copy_n(x, n, y); break;
        case ActivationKind::LeakyRelu:
            // max(x, 0) + a min(x, 0) equals leaky_relu(x) exactly and vectorizes.
            ArrayMap(y, static_cast<Eigen::Index>(n)) =
                ConstArrayMap(x, static_cast<Eigen::Index>(n)).max(0.0) +
                a * ConstArrayMap(x, static_cast<Eigen::Index>(n)).min(0.0);
            // With a positive slope the output sign identifies the branch; otherwise keep x.
            if (a == 0.0) input_ = in;
            break;
        case ActivationKind::Sigmoid:
            for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(x[i]);
            break;
        }
        return out_buf_;
    }
    const Tensor4& backward(const Tensor4& grad_out, bool need_input_grad) override {
        check_grad(grad_out);
        if (!need_input_grad) return no_grad();
        grad_in_.reshape_uninitialized(grad_out.batch, grad_out.shape);
        const std::size_t n = grad_out.size();
        const double* g = grad_out.data.data();
        const double* y = out_buf_.data.data();
        double* d = grad_in_.data.data();
        const double a = alpha_;
        switch (act_) {
        case ActivationKind::Identity: std::copy_n(g, n, d); break;
        case ActivationKind::LeakyRelu:
            if (a == 0.0) {
                const double* x = input_.data.data();
                for (std::size_t i = 0; i < n; ++i) d[i] = g[i] * leaky_relu_derivative(x[i], 0.0);
            } else {
                const auto len = static_cast<Eigen::Index>(n);
                const auto mask = (ConstArrayMap(y, len) >= 0.0).cast<double>();
                ConstArrayMap gg(g, len);
                ArrayMap(d, len) = mask * gg + (1.0 - mask) * (a * gg);
            }
            break;
        case ActivationKind::Sigmoid:
            for (std::size_t i = 0; i < n; ++i) d[i] = g[i] * y[i] * (1.0 - y[i]);
            break;
        }
        return grad_in_;
    }

private:
    ActivationKind act_;
    double alpha_;
    Tensor4 input_;
};

}  // namespace romforge::nn
