#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "hoigs/ad.hpp"
#include "hoigs/common.hpp"
#include "hoigs/geom.hpp"
#include "hoigs/nn.hpp"
#include "hoigs/rng.hpp"

namespace hoigs {

// Six 2D feature planes over the coordinate pairs (xy, xz, yz, xt, yt, zt).
// A query bilinearly interpolates each plane and concatenates in that fixed
// order, giving a 6*C feature (96 at the default C=16). Spatial axes cover
// [lo, hi]; the time axis covers [0, 1]. Out-of-bounds queries clamp.
template <class T>
struct HexPlaneT {
    int res = 32;
    int channels = 16;
    Vec3 lo{-1.0, -1.0, -1.0};
    Vec3 hi{1.0, 1.0, 1.0};
    std::array<std::vector<T>, 6> planes; // each res*res*channels, (u, v, c)

    int fused_dim() const { return 6 * channels; }

    void allocate() {
        for (auto& p : planes)
            p.assign(static_cast<std::size_t>(res) * res * channels, T(0.0));
    }

    const T& at(int plane, int u, int v, int c) const {
        return planes[static_cast<std::size_t>(plane)]
                     [(static_cast<std::size_t>(u) * res + v) * channels + c];
    }
    T& at(int plane, int u, int v, int c) {
        return planes[static_cast<std::size_t>(plane)]
                     [(static_cast<std::size_t>(u) * res + v) * channels + c];
    }
};

using HexPlaneGrid = HexPlaneT<double>;

inline HexPlaneGrid make_hexplane(int res, int channels, const Vec3& lo, const Vec3& hi,
                                  Rng& rng, double init_scale = 0.1) {
    HexPlaneGrid g;
    g.res = res;
    g.channels = channels;
    g.lo = lo;
    g.hi = hi;
    g.allocate();
    for (auto& p : g.planes)
        for (auto& v : p) v = rng.uniform(-init_scale, init_scale);
    return g;
}

namespace detail {

struct AxisCoord {
    int i0, i1;
    double frac;
};

inline AxisCoord axis_coord(double val, double lo, double hi, int res) {
    double u = (val - lo) / (hi - lo) * (res - 1);
    u = std::clamp(u, 0.0, static_cast<double>(res - 1));
    int i0 = static_cast<int>(std::floor(u));
    if (i0 > res - 2) i0 = res - 2;
    return {i0, i0 + 1, u - i0};
}

} // namespace detail

template <class T>
std::vector<T> plane_query(const HexPlaneT<T>& grid, double x, double y, double z,
                           double t) {
    const detail::AxisCoord cx = detail::axis_coord(x, grid.lo.x, grid.hi.x, grid.res);
    const detail::AxisCoord cy = detail::axis_coord(y, grid.lo.y, grid.hi.y, grid.res);
    const detail::AxisCoord cz = detail::axis_coord(z, grid.lo.z, grid.hi.z, grid.res);
    const detail::AxisCoord ct = detail::axis_coord(t, 0.0, 1.0, grid.res);
    const std::array<std::pair<detail::AxisCoord, detail::AxisCoord>, 6> pairs = {{
        {cx, cy}, {cx, cz}, {cy, cz}, {cx, ct}, {cy, ct}, {cz, ct},
    }};
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(grid.fused_dim()));
    for (int p = 0; p < 6; ++p) {
        const auto& [a, b] = pairs[static_cast<std::size_t>(p)];
        const double w00 = (1.0 - a.frac) * (1.0 - b.frac);
        const double w01 = (1.0 - a.frac) * b.frac;
        const double w10 = a.frac * (1.0 - b.frac);
        const double w11 = a.frac * b.frac;
        for (int c = 0; c < grid.channels; ++c) {
            out.push_back(grid.at(p, a.i0, b.i0, c) * w00 +
                          grid.at(p, a.i0, b.i1, c) * w01 +
                          grid.at(p, a.i1, b.i0, c) * w10 +
                          grid.at(p, a.i1, b.i1, c) * w11);
        }
    }
    return out;
}

// Disjoint vertex index sets, one per body part; must cover every vertex.
struct PartPartition {
    std::vector<std::vector<int>> parts;

    int n_parts() const { return static_cast<int>(parts.size()); }

    void validate(int n_vertices) const {
        std::vector<char> seen(static_cast<std::size_t>(n_vertices), 0);
        for (const auto& p : parts) {
            if (p.empty()) throw EmptyPart("PartPartition: empty part");
            for (int i : p) {
                if (i < 0 || i >= n_vertices || seen[static_cast<std::size_t>(i)])
                    throw InvalidConfig("PartPartition: indices must be disjoint and in range");
                seen[static_cast<std::size_t>(i)] = 1;
            }
        }
        for (char s : seen)
            if (!s) throw InvalidConfig("PartPartition: vertex not covered");
    }
};

// Row p = mean over the part's vertices of plane_query at time t.
template <class T>
std::vector<std::vector<T>> part_features(const HexPlaneT<T>& grid,
                                          const std::vector<Vec3>& points,
                                          const PartPartition& partition, double t) {
    partition.validate(static_cast<int>(points.size()));
    std::vector<std::vector<T>> tokens;
    tokens.reserve(partition.parts.size());
    for (const auto& part : partition.parts) {
        std::vector<T> acc(static_cast<std::size_t>(grid.fused_dim()), T(0.0));
        for (int i : part) {
            const Vec3& p = points[static_cast<std::size_t>(i)];
            const auto q = plane_query(grid, p.x, p.y, p.z, t);
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += q[c];
        }
        const double inv = 1.0 / static_cast<double>(part.size());
        for (auto& v : acc) v = v * inv;
        tokens.push_back(std::move(acc));
    }
    return tokens;
}

// Nearest-joint partition of avatar vertices, used as the default body-part
// split when a scene does not supply one.
PartPartition partition_by_weights(const Tensor& weights, int n_parts);

template <class T>
HexPlaneT<ad::Var> hexplane_lift(const HexPlaneT<T>& src, ad::Tape& tape) {
    HexPlaneT<ad::Var> g;
    g.res = src.res;
    g.channels = src.channels;
    g.lo = src.lo;
    g.hi = src.hi;
    for (int p = 0; p < 6; ++p) {
        auto& dst = g.planes[static_cast<std::size_t>(p)];
        dst.reserve(src.planes[static_cast<std::size_t>(p)].size());
        for (const auto& v : src.planes[static_cast<std::size_t>(p)])
            dst.emplace_back(tape, ad::value_of(v));
    }
    return g;
}

} // namespace hoigs
