#pragma once

// Snapshot file: "ROMSNAP1", six little-endian u32 (N, n, n_channels, p, n_y, n_x), the
// n x p design table row by row, then one column-major N x n block per channel. All
// values are little-endian 64-bit floats.

#include <string>

#include "romforge/dataset.hpp"
#include "romforge/error.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/files.hpp"

namespace romforge::io {

inline constexpr char kSnapshotMagic[9] = "ROMSNAP1";

inline std::string encode_snapshots(const Dataset& d) {
    d.validate();
    ByteWriter w;
    w.magic(kSnapshotMagic);
    w.u32(ByteWriter::checked_u32(d.state_dim(), "state dimension"));
    w.u32(ByteWriter::checked_u32(d.sample_count(), "sample count"));
    w.u32(ByteWriter::checked_u32(d.channel_count(), "channel count"));
    w.u32(ByteWriter::checked_u32(d.param_dim(), "parameter dimension"));
    w.u32(ByteWriter::checked_u32(d.ny, "n_y"));
    w.u32(ByteWriter::checked_u32(d.nx, "n_x"));
    for (const auto& mu : d.params)
        for (double v : mu) w.f64(v);
    for (const auto& m : d.channels)
        for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
    return w.take();
}

/// Parses a snapshot file image. Parameter names are not part of the format.
inline Dataset decode_snapshots(const std::string& bytes, const std::string& what = "snapshot file") {
    ByteReader r(bytes, what);
    r.magic(kSnapshotMagic);
    const std::uint64_t big_n = r.u32(), n = r.u32(), nc = r.u32(), p = r.u32(), ny = r.u32(), nx = r.u32();
    if (big_n == 0 || n == 0 || nc == 0 || p == 0) r.fail("header has a zero dimension");
    if ((ny == 0) != (nx == 0)) r.fail("n_y and n_x must both be zero or both be positive");
    if (ny > 0 && ny * nx != big_n)
        r.fail("grid " + std::to_string(ny) + "x" + std::to_string(nx) + " does not match N=" + std::to_string(big_n));
    const std::uint64_t expected = 8 * (n * p + nc * big_n * n);
    if (r.remaining() != expected)
        r.fail("payload is " + std::to_string(r.remaining()) + " bytes, header implies " + std::to_string(expected));
    Dataset d;
    d.ny = ny;
    d.nx = nx;
    d.params.assign(n, std::vector<double>(p));
    for (auto& mu : d.params)
        for (double& v : mu) v = r.f64();
    for (std::uint64_t c = 0; c < nc; ++c) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(big_n), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
        d.channels.push_back(std::move(m));
    }
    r.expect_end();
    return d;
}

inline void write_snapshot_file(const std::string& path, const Dataset& d) {
    write_file_atomic(path, encode_snapshots(d));
}

inline Dataset read_snapshot_file(const std::string& path) {
    return decode_snapshots(read_file(path), "'" + path + "'");
}

}  // namespace romforge::io
