#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "romforge/nn/layers.hpp"
#include "romforge/nn/ops.hpp"
#include "romforge/random.hpp"

using namespace romforge;
using namespace romforge::nn;

namespace {

Tensor4 random_tensor(std::size_t b, Shape3 s, Rng& rng) {
    Tensor4 t(b, s);
    for (double& x : t.data) x = standard_normal(rng);
    return t;
}

Buffer random_vec(std::size_t n, Rng& rng) {
    Buffer v(n);
    for (double& x : v) x = standard_normal(rng);
    return v;
}

double dot(const Tensor4& a, const Tensor4& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

// Direct "same"-padded cross-correlation, one output at a time.
Tensor4 conv_oracle(const Tensor4& in, std::span<const double> w, std::span<const double> b, Window win,
                    std::size_t cout) {
    const std::size_t oh = (in.shape.h + win.sh - 1) / win.sh, ow = (in.shape.w + win.sw - 1) / win.sw;
    const long pt = static_cast<long>(std::max<long>(0, static_cast<long>((oh - 1) * win.sh + win.kh) - static_cast<long>(in.shape.h)) / 2);
    const long pl = static_cast<long>(std::max<long>(0, static_cast<long>((ow - 1) * win.sw + win.kw) - static_cast<long>(in.shape.w)) / 2);
    const std::size_t cin = in.shape.c;
    Tensor4 out(in.batch, Shape3{oh, ow, cout});
    for (std::size_t n = 0; n < in.batch; ++n)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox)
                for (std::size_t co = 0; co < cout; ++co) {
                    double acc = b[co];
                    for (std::size_t ky = 0; ky < win.kh; ++ky)
                        for (std::size_t kx = 0; kx < win.kw; ++kx) {
                            const long iy = static_cast<long>(oy * win.sh + ky) - pt;
                            const long ix = static_cast<long>(ox * win.sw + kx) - pl;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(in.shape.h) || ix >= static_cast<long>(in.shape.w))
                                continue;
                            for (std::size_t ci = 0; ci < cin; ++ci)
                                acc += in(n, iy, ix, ci) * w[((ky * win.kw + kx) * cin + ci) * cout + co];
                        }
                    out(n, oy, ox, co) = acc;
                }
    return out;
}

// Scatter form of the transposed convolution onto an (h sh, w sw) grid.
Tensor4 conv_transpose_oracle(const Tensor4& in, std::span<const double> w, std::span<const double> b,
                              Window win, std::size_t cout) {
    const std::size_t oh = in.shape.h * win.sh, ow = in.shape.w * win.sw, cin = in.shape.c;
    const long pt = std::max<long>(0, static_cast<long>((in.shape.h - 1) * win.sh + win.kh) - static_cast<long>(oh)) / 2;
    const long pl = std::max<long>(0, static_cast<long>((in.shape.w - 1) * win.sw + win.kw) - static_cast<long>(ow)) / 2;
    Tensor4 out(in.batch, Shape3{oh, ow, cout});
    for (std::size_t n = 0; n < in.batch; ++n) {
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                for (std::size_t co = 0; co < cout; ++co) out(n, y, x, co) = b[co];
        for (std::size_t iy = 0; iy < in.shape.h; ++iy)
            for (std::size_t ix = 0; ix < in.shape.w; ++ix)
                for (std::size_t ky = 0; ky < win.kh; ++ky)
                    for (std::size_t kx = 0; kx < win.kw; ++kx) {
                        const long y = static_cast<long>(iy * win.sh + ky) - pt;
                        const long x = static_cast<long>(ix * win.sw + kx) - pl;
                        if (y < 0 || x < 0 || y >= static_cast<long>(oh) || x >= static_cast<long>(ow)) continue;
                        for (std::size_t ci = 0; ci < cin; ++ci)
                            for (std::size_t co = 0; co < cout; ++co)
                                out(n, y, x, co) += in(n, iy, ix, ci) * w[((ky * win.kw + kx) * cin + ci) * cout + co];
                    }
    }
    return out;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    EXPECT_EQ(a.size(), b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

double rel_error(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        da += a[i] * a[i];
        db += b[i] * b[i];
    }
    const double den = std::max(std::sqrt(da), std::sqrt(db));
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num) / den;
}

// Central finite differences of L = <layer(x), r> against the analytic gradients.
void check_layer_gradients(Layer& layer, Tensor4 x, Rng& rng, double tol = 1e-5) {
    const Tensor4 r = random_tensor(x.batch, layer.output_shape(), rng);
    layer.zero_grads();
    layer.forward(x);
    const Tensor4 gin = layer.backward(r, true);
    const Buffer gparams = layer.grads();
    const double h = 1e-5;
    auto loss = [&]() { return dot(layer.forward(x), r); };

    std::vector<double> fd_in(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.data[i];
        x.data[i] = v + h;
        const double lp = loss();
        x.data[i] = v - h;
        const double lm = loss();
        x.data[i] = v;
        fd_in[i] = (lp - lm) / (2 * h);
    }
    EXPECT_LE(rel_error(gin.data, fd_in), tol) << to_string(layer.kind()) << " input gradient";

    std::vector<double> fd_p(layer.params().size());
    for (std::size_t i = 0; i < fd_p.size(); ++i) {
        const double v = layer.params()[i];
        layer.params()[i] = v + h;
        const double lp = loss();
        layer.params()[i] = v - h;
        const double lm = loss();
        layer.params()[i] = v;
        fd_p[i] = (lp - lm) / (2 * h);
    }
    if (!fd_p.empty()) {
        EXPECT_LE(rel_error(gparams, fd_p), tol) << to_string(layer.kind()) << " parameter gradient";
    }
}

}  // namespace

TEST(SameGeometry, OutputSizesAndPadding) {
    const SameGeometry g = same_geometry(7, 8, Window{3, 3, 2, 2});
    EXPECT_EQ(g.out_h, 4u);
    EXPECT_EQ(g.out_w, 4u);
    EXPECT_EQ(g.pad_top, 1u);
    EXPECT_EQ(g.pad_left, 0u);
    EXPECT_THROW(same_geometry(4, 4, Window{0, 3, 1, 1}), ArgumentError);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
    Rng rng(1);
    for (Window win : {Window{3, 3, 1, 1}, Window{3, 3, 2, 2}, Window{2, 3, 1, 2}, Window{1, 1, 1, 1}}) {
        const Tensor4 x = random_tensor(3, Shape3{7, 6, 2}, rng);
        const ConvKernel k{win, 2, 4};
        const auto w = random_vec(k.weight_count(), rng), b = random_vec(4, rng);
        EXPECT_LE(max_abs_diff(conv2d_forward(x, w, b, k), conv_oracle(x, w, b, win, 4)), 1e-12);
    }
}

TEST(Conv2d, KnownValue) {
    // 3x3 all-ones kernel on a 3x3 ramp: centre sees every cell, corner sees four.
    Tensor4 x(1, Shape3{3, 3, 1});
    for (std::size_t i = 0; i < 9; ++i) x.data[i] = static_cast<double>(i + 1);
    const std::vector<double> w(9, 1.0), b{0.5};
    const Tensor4 y = conv2d_forward(x, w, b, ConvKernel{Window{3, 3, 1, 1}, 1, 1});
    EXPECT_DOUBLE_EQ(y(0, 1, 1, 0), 45.5);
    EXPECT_DOUBLE_EQ(y(0, 0, 0, 0), 1 + 2 + 4 + 5 + 0.5);
}

TEST(ConvTranspose2d, MatchesScatterOracle) {
    Rng rng(2);
    for (Window win : {Window{3, 3, 2, 2}, Window{3, 3, 1, 1}, Window{2, 2, 2, 2}}) {
        const Tensor4 x = random_tensor(2, Shape3{4, 5, 3}, rng);
        const ConvKernel k{win, 3, 2};
        const auto w = random_vec(k.weight_count(), rng), b = random_vec(2, rng);
        EXPECT_LE(max_abs_diff(conv2d_transpose_forward(x, w, b, k), conv_transpose_oracle(x, w, b, win, 2)), 1e-12);
    }
}

// <conv(x), y> = <x, conv^T(y)> with zero biases and the same weights.
TEST(ConvAdjoint, IdentityHolds) {
    Rng rng(3);
    for (Window win : {Window{3, 3, 2, 2}, Window{3, 3, 1, 1}, Window{4, 4, 2, 2}}) {
        const Shape3 big{8, 6, 3};
        const ConvKernel conv{win, 3, 5}, convt{win, 5, 3};
        // conv weights (kh, kw, 3, 5); the transpose reads (kh, kw, 5, 3), so permute.
        const auto w = random_vec(conv.weight_count(), rng);
        std::vector<double> wt(w.size());
        for (std::size_t t = 0; t < win.kh * win.kw; ++t)
            for (std::size_t ci = 0; ci < 3; ++ci)
                for (std::size_t co = 0; co < 5; ++co) wt[(t * 5 + co) * 3 + ci] = w[(t * 3 + ci) * 5 + co];
        const Tensor4 x = random_tensor(2, big, rng);
        const Tensor4 cx = conv2d_forward(x, w, std::vector<double>(5, 0.0), conv);
        const Tensor4 y = random_tensor(2, cx.shape, rng);
        const Tensor4 ty = conv2d_transpose_forward(y, wt, std::vector<double>(3, 0.0), convt);
        const double lhs = dot(cx, y), rhs = dot(x, ty);
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(MaxPool, ValuesArgmaxAndFirstTie) {
    Tensor4 x(1, Shape3{2, 4, 1});
    const double v[] = {1, 5, 2, 2, 3, 4, 2, 2};
    std::copy(std::begin(v), std::end(v), x.data.begin());
    const PoolResult r = maxpool2d_forward(x, Window{2, 2, 2, 2});
    ASSERT_EQ(r.output.size(), 2u);
    EXPECT_EQ(r.output.data[0], 5.0);
    EXPECT_EQ(r.argmax[0], 1u);
    EXPECT_EQ(r.output.data[1], 2.0);
    EXPECT_EQ(r.argmax[1], 2u);  // first of four equal values
    Tensor4 g(1, Shape3{1, 2, 1}, 1.0);
    const Tensor4 gi = maxpool2d_backward(x.shape, 1, r.argmax, g);
    EXPECT_EQ(gi.data[1], 1.0);
    EXPECT_EQ(gi.data[2], 1.0);
    EXPECT_EQ(gi.data[0] + gi.data[3] + gi.data[4] + gi.data[5] + gi.data[6] + gi.data[7], 0.0);
}

TEST(MaxPool, OddSizeNeverPicksPadding) {
    Tensor4 x(1, Shape3{3, 3, 1}, -7.0);
    const PoolResult r = maxpool2d_forward(x, Window{2, 2, 2, 2});
    for (double v : r.output.data) EXPECT_EQ(v, -7.0);
}

TEST(Activations, ScalarForms) {
    EXPECT_EQ(leaky_relu(2.0, 0.25), 2.0);
    EXPECT_EQ(leaky_relu(-2.0, 0.25), -0.5);
    EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-16);
    EXPECT_NEAR(sigmoid(800.0), 1.0, 1e-16);
    EXPECT_GE(sigmoid(-800.0), 0.0);
    EXPECT_TRUE(std::isfinite(sigmoid(-800.0)));
}

TEST(ActivationLayer, MatchesScalarForms) {
    Rng rng(4);
    const Tensor4 x = random_tensor(2, Shape3{3, 3, 2}, rng);
    ActivationLayer lr(x.shape, ActivationKind::LeakyRelu, 0.25), sg(x.shape, ActivationKind::Sigmoid);
    const Tensor4 a = lr.forward(x), s = sg.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(a.data[i], leaky_relu(x.data[i], 0.25));
        EXPECT_NEAR(s.data[i], sigmoid(x.data[i]), 1e-15);
    }
}

TEST(Dense, MatchesLoopOracle) {
    Rng rng(5);
    const Tensor4 x = random_tensor(3, Shape3{2, 2, 3}, rng);
    const auto w = random_vec(4 * 12, rng), b = random_vec(4, rng);
    const Tensor4 y = dense_forward(x, w, b);
    for (std::size_t n = 0; n < 3; ++n)
        for (std::size_t o = 0; o < 4; ++o) {
            double acc = b[o];
            for (std::size_t i = 0; i < 12; ++i) acc += w[o * 12 + i] * x.sample(n)[i];
            EXPECT_NEAR(y.sample(n)[o], acc, 1e-12);
        }
}

TEST(Mse, LossAndGradient) {
    Tensor4 p(1, Shape3{1, 1, 2}), t(1, Shape3{1, 1, 2});
    p.data = {1.0, 3.0};
    t.data = {0.0, 1.0};
    EXPECT_DOUBLE_EQ(mse_loss(p, t), 2.5);
    const Tensor4 g = mse_gradient(p, t);
    EXPECT_DOUBLE_EQ(g.data[0], 1.0);
    EXPECT_DOUBLE_EQ(g.data[1], 2.0);
}

TEST(GradientCheck, Dense) {
    Rng rng(10);
    DenseLayer l(Shape3{2, 2, 3}, 5);
    l.params() = random_vec(l.params().size(), rng);
    check_layer_gradients(l, random_tensor(3, Shape3{2, 2, 3}, rng), rng);
}

TEST(GradientCheck, Conv) {
    Rng rng(11);
    for (Window win : {Window{3, 3, 1, 1}, Window{3, 3, 2, 2}}) {
        ConvLayer l(Shape3{5, 6, 2}, 3, win);
        l.params() = random_vec(l.params().size(), rng);
        check_layer_gradients(l, random_tensor(2, Shape3{5, 6, 2}, rng), rng);
    }
}

TEST(GradientCheck, ConvTranspose) {
    Rng rng(12);
    for (Window win : {Window{3, 3, 2, 2}, Window{3, 3, 1, 1}}) {
        ConvTransposeLayer l(Shape3{3, 4, 2}, 3, win);
        l.params() = random_vec(l.params().size(), rng);
        check_layer_gradients(l, random_tensor(2, Shape3{3, 4, 2}, rng), rng);
    }
}

TEST(GradientCheck, MaxPool) {
    Rng rng(13);
    MaxPoolLayer l(Shape3{6, 5, 2}, Window{2, 2, 2, 2});
    // Distinct values spaced far beyond the finite-difference step avoid the kinks.
    Tensor4 x(2, Shape3{6, 5, 2});
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm, rng);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = 0.01 * static_cast<double>(perm[i]);
    check_layer_gradients(l, x, rng);
}

TEST(GradientCheck, LeakyRelu) {
    Rng rng(14);
    ActivationLayer l(Shape3{3, 3, 2}, ActivationKind::LeakyRelu, 0.25);
    Tensor4 x = random_tensor(2, Shape3{3, 3, 2}, rng);
    for (double& v : x.data)
        if (std::abs(v) < 1e-2) v = 0.5;
    check_layer_gradients(l, x, rng);
}

TEST(GradientCheck, Sigmoid) {
    Rng rng(15);
    ActivationLayer l(Shape3{3, 3, 2}, ActivationKind::Sigmoid);
    check_layer_gradients(l, random_tensor(2, Shape3{3, 3, 2}, rng), rng);
}

TEST(GradientCheck, Reshape) {
    Rng rng(16);
    ReshapeLayer l(Shape3{2, 3, 2}, Shape3{1, 1, 12});
    check_layer_gradients(l, random_tensor(2, Shape3{2, 3, 2}, rng), rng);
    EXPECT_THROW(ReshapeLayer(Shape3{2, 3, 2}, Shape3{1, 1, 11}), ArgumentError);
}

TEST(Layers, ShapeErrors) {
    ConvLayer l(Shape3{4, 4, 2}, 3, Window{3, 3, 1, 1});
    EXPECT_THROW(l.forward(Tensor4(1, Shape3{4, 4, 3})), ArgumentError);
    l.forward(Tensor4(2, Shape3{4, 4, 2}));
    EXPECT_THROW(l.backward(Tensor4(1, Shape3{4, 4, 3}), true), ArgumentError);
}
