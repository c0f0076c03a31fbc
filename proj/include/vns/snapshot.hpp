#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "vns/field.hpp"
#include "vns/kinetic.hpp"

namespace vns {

// Versioned binary snapshot formats (little-endian throughout):
//   field:    "VNSF" | u32 version | u32 dim | u32 n | u32 components |
//             component planes of f64 samples, first axis fastest
//   ensemble: "VNSP" | u32 version | u32 dim | u64 N |
//             N records of (position d x f64, velocity d x f64, weight f64)
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

} // namespace detail

inline void write_field_snapshot(const std::string& path, const TorusField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field_snapshot: cannot open " + path);
    os.write("VNSF", 4);
    detail::write_u32(os, kSnapshotVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(f.grid().dim()));
    detail::write_u32(os, static_cast<std::uint32_t>(f.grid().n()));
    detail::write_u32(os, static_cast<std::uint32_t>(f.components()));
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    if (!os) throw std::runtime_error("write_field_snapshot: write failed");
}

inline TorusField read_field_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field_snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "VNSF", 4) != 0)
        throw std::runtime_error("read_field_snapshot: bad magic");
    if (detail::read_u32(is) != kSnapshotVersion)
        throw std::runtime_error("read_field_snapshot: unsupported version");
    const int dim = static_cast<int>(detail::read_u32(is));
    const int n = static_cast<int>(detail::read_u32(is));
    const int comps = static_cast<int>(detail::read_u32(is));
    TorusGrid g(dim, n);
    TorusField f(g, comps);
    auto& v = f.mutable_values();
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_field_snapshot: truncated file");
    return f;
}

inline void write_ensemble_snapshot(const std::string& path,
                                    const ParticleEnsemble& e) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_ensemble_snapshot: cannot open " + path);
    os.write("VNSP", 4);
    detail::write_u32(os, kSnapshotVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(e.dim));
    detail::write_u64(os, static_cast<std::uint64_t>(e.count()));
    for (std::size_t i = 0; i < e.count(); ++i) {
        os.write(reinterpret_cast<const char*>(&e.pos[i * e.dim]),
                 static_cast<std::streamsize>(e.dim * sizeof(double)));
        os.write(reinterpret_cast<const char*>(&e.vel[i * e.dim]),
                 static_cast<std::streamsize>(e.dim * sizeof(double)));
        os.write(reinterpret_cast<const char*>(&e.weight[i]), sizeof(double));
    }
    if (!os) throw std::runtime_error("write_ensemble_snapshot: write failed");
}

inline ParticleEnsemble read_ensemble_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_ensemble_snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "VNSP", 4) != 0)
        throw std::runtime_error("read_ensemble_snapshot: bad magic");
    if (detail::read_u32(is) != kSnapshotVersion)
        throw std::runtime_error("read_ensemble_snapshot: unsupported version");
    ParticleEnsemble e;
    e.dim = static_cast<int>(detail::read_u32(is));
    const std::uint64_t n = detail::read_u64(is);
    e.pos.resize(n * e.dim);
    e.vel.resize(n * e.dim);
    e.weight.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        is.read(reinterpret_cast<char*>(&e.pos[i * e.dim]),
                static_cast<std::streamsize>(e.dim * sizeof(double)));
        is.read(reinterpret_cast<char*>(&e.vel[i * e.dim]),
                static_cast<std::streamsize>(e.dim * sizeof(double)));
        is.read(reinterpret_cast<char*>(&e.weight[i]), sizeof(double));
    }
    if (!is) throw std::runtime_error("read_ensemble_snapshot: truncated file");
    return e;
}

} // namespace vns
