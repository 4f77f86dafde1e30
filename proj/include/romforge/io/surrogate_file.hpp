#pragma once

// Surrogate file: "ROMSURR1", a kind tag, seed, config digest and dimensions, then either
// the POD bases with their coefficient GPs (one block per channel) or the autoencoder
// specs, weights, scaling, training history and code GPs. Doubles are stored bit for bit,
// so a loaded surrogate predicts exactly like the saved one.

#include <string>

#include "romforge/error.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/files.hpp"
#include "romforge/rom/surrogate.hpp"

namespace romforge::io {

inline constexpr char kSurrogateMagic[9] = "ROMSURR1";

namespace detail {

template <typename E>
E enum_tag(ByteReader& r, int count, const char* what) {
    const std::uint8_t v = r.u8();
    if (v >= count) r.fail(std::string("invalid ") + what + " tag " + std::to_string(v));
    return static_cast<E>(v);
}

inline void put_gpr(ByteWriter& w, const gpr::GprModel& m) {
    w.vector(m.z_mean);
    w.vector(m.z_scale);
    w.matrix(m.z);
    w.f64(m.y_mean);
    w.vector(m.alpha);
    w.matrix(m.chol);
    w.u8(static_cast<std::uint8_t>(m.kernel.family));
    w.f64(m.kernel.length_scale);
    w.f64(m.kernel.nu);
    w.f64(m.noise);
    w.f64(m.diagonal_shift);
    w.f64(m.log_likelihood);
    w.u32(ByteWriter::checked_u32(m.warnings.size(), "warning count"));
    for (const auto& s : m.warnings) w.str(s);
}

inline gpr::GprModel get_gpr(ByteReader& r, std::size_t p) {
    gpr::GprModel m;
    m.z_mean = r.vector();
    m.z_scale = r.vector();
    m.z = r.matrix();
    m.y_mean = r.f64();
    m.alpha = r.vector();
    m.chol = r.matrix();
    m.kernel.family = enum_tag<gpr::KernelFamily>(r, 2, "kernel family");
    m.kernel.length_scale = r.f64();
    m.kernel.nu = r.f64();
    m.noise = r.f64();
    m.diagonal_shift = r.f64();
    m.log_likelihood = r.f64();
    const std::uint32_t nw = r.u32();
    for (std::uint32_t i = 0; i < nw; ++i) m.warnings.push_back(r.str());
    const auto n = m.z.rows();
    if (static_cast<std::size_t>(m.z.cols()) != p || m.z_mean.size() != m.z.cols() ||
        m.z_scale.size() != m.z.cols() || m.alpha.size() != n || m.chol.rows() != n || m.chol.cols() != n)
        r.fail("inconsistent GPR model dimensions");
    try {
        gpr::validate(m.kernel);
    } catch (const ArgumentError& e) {
        r.fail(e.what());
    }
    return m;
}

inline void put_gprs(ByteWriter& w, const std::vector<gpr::GprModel>& ms) {
    w.u64(ms.size());
    for (const auto& m : ms) put_gpr(w, m);
}

inline std::vector<gpr::GprModel> get_gprs(ByteReader& r, std::size_t p, std::size_t expected) {
    const std::uint64_t n = r.u64();
    if (n != expected) r.fail("expected " + std::to_string(expected) + " GPR models, found " + std::to_string(n));
    std::vector<gpr::GprModel> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(get_gpr(r, p));
    return out;
}

inline void put_shape(ByteWriter& w, const nn::Shape3& s) {
    w.u64(s.h);
    w.u64(s.w);
    w.u64(s.c);
}

inline nn::Shape3 get_shape(ByteReader& r) {
    nn::Shape3 s;
    s.h = r.u64();
    s.w = r.u64();
    s.c = r.u64();
    return s;
}

inline void put_specs(ByteWriter& w, const std::vector<nn::LayerSpec>& specs) {
    w.u64(specs.size());
    for (const auto& s : specs) {
        w.u8(static_cast<std::uint8_t>(s.kind));
        w.u64(s.units);
        w.u64(s.window.kh);
        w.u64(s.window.kw);
        w.u64(s.window.sh);
        w.u64(s.window.sw);
        w.u8(static_cast<std::uint8_t>(s.activation));
        w.f64(s.alpha);
        put_shape(w, s.target);
    }
}

inline std::vector<nn::LayerSpec> get_specs(ByteReader& r) {
    const std::uint64_t n = r.count(1);
    std::vector<nn::LayerSpec> specs(n);
    for (auto& s : specs) {
        s.kind = enum_tag<nn::LayerKind>(r, 6, "layer kind");
        s.units = r.u64();
        s.window.kh = r.u64();
        s.window.kw = r.u64();
        s.window.sh = r.u64();
        s.window.sw = r.u64();
        s.activation = enum_tag<nn::ActivationKind>(r, 3, "activation");
        s.alpha = r.f64();
        s.target = get_shape(r);
    }
    return specs;
}

inline void put_weights(ByteWriter& w, const nn::Sequential& net) {
    w.u64(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) w.f64s(net.layer(i).params());
}

inline void get_weights(ByteReader& r, nn::Sequential& net) {
    if (r.u64() != net.size()) r.fail("layer count does not match the stored architecture");
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::vector<double> p = r.f64s();
        if (p.size() != net.layer(i).params().size())
            r.fail("layer " + std::to_string(i) + " stores " + std::to_string(p.size()) + " parameters, expected " +
                   std::to_string(net.layer(i).params().size()));
        net.layer(i).params().assign(p.begin(), p.end());
    }
}

}  // namespace detail

inline std::string encode_surrogate(const rom::RomSurrogate& s) {
    ByteWriter w;
    w.magic(kSurrogateMagic);
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u64(s.seed);
    w.u64(s.config_digest);
    w.f64(s.wall_time_s);
    w.u64(s.k);
    w.u64(s.param_dim);
    w.u64(s.state_dim);
    w.u64(s.channels);
    w.u64(s.ny);
    w.u64(s.nx);
    if (s.kind == rom::SurrogateKind::PodGpr) {
        if (s.pod.size() != s.channels) throw ArgumentError("POD surrogate has the wrong number of channel models");
        for (const auto& m : s.pod) {
            w.matrix(m.basis.vectors);
            w.f64s(m.basis.singular_values);
            detail::put_gprs(w, m.coeffs);
        }
    } else {
        w.f64(s.cae_config.width_scale);
        w.f64(s.cae_config.alpha);
        w.u8(static_cast<std::uint8_t>(s.cae_config.scaling));
        detail::put_shape(w, s.cae.input);
        w.u64(s.cae.code_dim);
        detail::put_specs(w, s.cae.encoder_specs);
        detail::put_specs(w, s.cae.decoder_specs);
        detail::put_weights(w, s.cae.encoder);
        detail::put_weights(w, s.cae.decoder);
        w.u8(static_cast<std::uint8_t>(s.scaling.mode));
        w.u64(s.scaling.channel_count());
        for (std::size_t c = 0; c < s.scaling.channel_count(); ++c) {
            w.vector(s.scaling.min[c]);
            w.vector(s.scaling.max[c]);
        }
        w.u64(s.training.epochs);
        w.u64(s.training.best_epoch);
        w.f64(s.training.best_val_loss);
        w.u8(s.training.stopped_early ? 1 : 0);
        w.f64s(s.training.train_loss);
        w.f64s(s.training.val_loss);
        detail::put_gprs(w, s.codes);
    }
    return w.take();
}

inline rom::RomSurrogate decode_surrogate(const std::string& bytes, const std::string& what = "surrogate file") {
    ByteReader r(bytes, what);
    r.magic(kSurrogateMagic);
    rom::RomSurrogate s;
    s.kind = detail::enum_tag<rom::SurrogateKind>(r, 2, "surrogate kind");
    s.seed = r.u64();
    s.config_digest = r.u64();
    s.wall_time_s = r.f64();
    s.k = r.u64();
    s.param_dim = r.u64();
    s.state_dim = r.u64();
    s.channels = r.u64();
    s.ny = r.u64();
    s.nx = r.u64();
    if (s.k == 0 || s.param_dim == 0 || s.state_dim == 0 || s.channels == 0) r.fail("header has a zero dimension");
    if (s.channels > r.remaining()) r.fail("channel count exceeds the payload");
    if ((s.ny == 0) != (s.nx == 0) || (s.ny > 0 && s.ny * s.nx != s.state_dim))
        r.fail("grid dimensions do not match the state dimension");
    if (s.kind == rom::SurrogateKind::PodGpr) {
        for (std::size_t c = 0; c < s.channels; ++c) {
            rom::PodChannelModel m;
            m.basis.vectors = r.matrix();
            if (static_cast<std::size_t>(m.basis.vectors.rows()) != s.state_dim ||
                static_cast<std::size_t>(m.basis.vectors.cols()) != s.k)
                r.fail("POD basis of channel " + std::to_string(c) + " has the wrong shape");
            m.basis.singular_values = r.f64s();
            m.coeffs = detail::get_gprs(r, s.param_dim, s.k);
            s.pod.push_back(std::move(m));
        }
    } else {
        if (s.ny == 0) r.fail("CAE-GPR surrogate without a grid");
        s.cae_config.width_scale = r.f64();
        s.cae_config.alpha = r.f64();
        s.cae_config.scaling = detail::enum_tag<rom::ScalingMode>(r, 2, "scaling mode");
        const nn::Shape3 input = detail::get_shape(r);
        const std::size_t code_dim = r.u64();
        if (!(input == nn::Shape3{s.ny, s.nx, s.channels}) || code_dim != s.k)
            r.fail("autoencoder shape does not match the header");
        auto enc = detail::get_specs(r);
        auto dec = detail::get_specs(r);
        try {
            s.cae = nn::CaeNetwork(input, code_dim, std::move(enc), std::move(dec));
        } catch (const ArgumentError& e) {
            r.fail(std::string("invalid autoencoder architecture: ") + e.what());
        }
        detail::get_weights(r, s.cae.encoder);
        detail::get_weights(r, s.cae.decoder);
        s.scaling.mode = detail::enum_tag<rom::ScalingMode>(r, 2, "scaling mode");
        if (r.u64() != s.channels) r.fail("scaling channel count does not match the header");
        const std::size_t width = s.scaling.mode == rom::ScalingMode::PerChannel ? 1 : s.state_dim;
        for (std::size_t c = 0; c < s.channels; ++c) {
            rom::Vector lo = r.vector(), hi = r.vector();
            if (static_cast<std::size_t>(lo.size()) != width || static_cast<std::size_t>(hi.size()) != width)
                r.fail("scaling vectors of channel " + std::to_string(c) + " have the wrong length");
            std::vector<bool> deg(width);
            for (std::size_t i = 0; i < width; ++i) deg[i] = !(hi(static_cast<Eigen::Index>(i)) > lo(static_cast<Eigen::Index>(i)));
            s.scaling.min.push_back(std::move(lo));
            s.scaling.max.push_back(std::move(hi));
            s.scaling.degenerate.push_back(std::move(deg));
        }
        s.training.epochs = r.u64();
        s.training.best_epoch = r.u64();
        s.training.best_val_loss = r.f64();
        s.training.stopped_early = r.u8() != 0;
        s.training.train_loss = r.f64s();
        s.training.val_loss = r.f64s();
        s.codes = detail::get_gprs(r, s.param_dim, s.k);
    }
    r.expect_end();
    return s;
}

inline void write_surrogate_file(const std::string& path, const rom::RomSurrogate& s) {
    write_file_atomic(path, encode_surrogate(s));
}

inline rom::RomSurrogate read_surrogate_file(const std::string& path) {
    return decode_surrogate(read_file(path), "'" + path + "'");
}

}  // namespace romforge::io
