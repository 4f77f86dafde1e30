#pragma once

// Little-endian byte buffers for the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "romforge/error.hpp"

namespace romforge::io {

namespace detail {

template <typename U>
U to_little(U v) {
    if constexpr (std::endian::native == std::endian::big) {
        U r = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xFF));
        return r;
    }
    return v;
}

}  // namespace detail

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { raw(detail::to_little(v)); }
    void u64(std::uint64_t v) { raw(detail::to_little(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char (&m)[9]) { buf_.append(m, 8); }

    /// Length-prefixed (u32) byte string.
    void str(const std::string& s) {
        u32(checked_u32(s.size(), "string length"));
        buf_ += s;
    }
    void f64s(std::span<const double> v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    void vector(const Eigen::VectorXd& v) {
        u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
    }
    /// rows, cols, then column-major values.
    void matrix(const Eigen::MatrixXd& m) {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
    }

    static std::uint32_t checked_u32(std::size_t v, const char* what) {
        if (v > UINT32_MAX) throw ArgumentError(std::string(what) + " does not fit in 32 bits");
        return static_cast<std::uint32_t>(v);
    }

    const std::string& bytes() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    template <typename U>
    void raw(U v) {
        char b[sizeof(U)];
        std::memcpy(b, &v, sizeof(U));
        buf_.append(b, sizeof(U));
    }
    std::string buf_;
};

/// Bounds-checked reader; `what` names the source in error messages.
class ByteReader {
public:
    ByteReader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() { return detail::to_little(raw<std::uint32_t>()); }
    std::uint64_t u64() { return detail::to_little(raw<std::uint64_t>()); }
    double f64() { return std::bit_cast<double>(u64()); }

    void magic(const char (&m)[9]) {
        need(8);
        if (data_.compare(pos_, 8, m, 8) != 0) fail("bad magic, expected " + std::string(m, 8));
        pos_ += 8;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> f64s() {
        const std::uint64_t n = count(8);
        std::vector<double> v(n);
        for (double& x : v) x = f64();
        return v;
    }
    Eigen::VectorXd vector() {
        const std::uint64_t n = count(8);
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
        return v;
    }
    Eigen::MatrixXd matrix() {
        const std::uint64_t r = u64(), c = u64();
        if (c != 0 && r > remaining() / 8 / c) fail("matrix " + std::to_string(r) + "x" + std::to_string(c) + " exceeds the payload");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
        return m;
    }

    /// Element count for a following array of `width`-byte items, checked against the payload.
    std::uint64_t count(std::size_t width) {
        const std::uint64_t n = u64();
        if (n > remaining() / width) fail("array length " + std::to_string(n) + " exceeds the payload");
        return n;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }

    void expect_end() const {
        if (pos_ != data_.size())
            fail(std::to_string(data_.size() - pos_) + " trailing bytes after the payload");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(what_ + ": " + msg + " (offset " + std::to_string(pos_) + ")");
    }

private:
    void need(std::size_t n) const {
        if (n > remaining())
            fail("truncated, needed " + std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left");
    }
    template <typename U>
    U raw() {
        need(sizeof(U));
        U v;
        std::memcpy(&v, data_.data() + pos_, sizeof(U));
        pos_ += sizeof(U);
        return v;
    }

    const std::string& data_;
    std::string what_;
    std::size_t pos_ = 0;
};

}  // namespace romforge::io
