#pragma once

#include <cmath>
#include <vector>

#include "hoigs/common.hpp"
#include "hoigs/geom.hpp"

namespace hoigs {

struct TimeGrid {
    int n_frames = 0;
    int n_keys = 0;
    int key_stride = 4;

    void validate() const {
        if (n_keys < 2 || n_frames < n_keys)
            throw InvalidConfig("TimeGrid: need n_keys >= 2 and n_frames >= n_keys");
    }

    // Default grid for a frame count: keyframe every `stride` frames,
    // endpoints included.
    static TimeGrid from_stride(int n_frames, int stride = 4) {
        TimeGrid g;
        g.n_frames = n_frames;
        g.key_stride = stride;
        g.n_keys = (n_frames - 1) / stride + 1;
        g.validate();
        return g;
    }

    double normalized(double t) const { return t / (n_frames - 1); }
};

struct SegmentPos {
    int k = 0;      // segment index, clamped to [0, n_keys-2]
    double tr = 0.0; // position inside the segment, [0, 1]
};

// t_n = t/(N_f-1), t_s = t_n (N_key-1), k = floor(t_s), t_r = frac(t_s);
// the final frame maps to (n_keys-2, 1) instead of opening a new segment.
inline SegmentPos normalize_time(double t, const TimeGrid& grid) {
    if (t < 0.0 || t > grid.n_frames - 1)
        throw OutOfRangeTime("normalize_time: frame index outside [0, N_f-1]");
    const double ts = grid.normalized(t) * (grid.n_keys - 1);
    int k = static_cast<int>(std::floor(ts));
    if (k > grid.n_keys - 2) k = grid.n_keys - 2;
    return {k, ts - k};
}

// Cubic Hermite basis on one segment; works for plain doubles and tape vars.
template <class T>
T hermite1(const T& p0, const T& v0, const T& p1, const T& v1, double tr) {
    const double tr2 = tr * tr;
    const double tr3 = tr2 * tr;
    const double h00 = 2 * tr3 - 3 * tr2 + 1;
    const double h10 = tr3 - 2 * tr2 + tr;
    const double h01 = -2 * tr3 + 3 * tr2;
    const double h11 = tr3 - tr2;
    return p0 * h00 + v0 * h10 + p1 * h01 + v1 * h11;
}

template <class T>
Vec3T<T> hermite3(const Vec3T<T>& p0, const Vec3T<T>& v0, const Vec3T<T>& p1,
                  const Vec3T<T>& v1, double tr) {
    return {hermite1(p0.x, v0.x, p1.x, v1.x, tr),
            hermite1(p0.y, v0.y, p1.y, v1.y, tr),
            hermite1(p0.z, v0.z, p1.z, v1.z, tr)};
}

// d/dtr of the segment polynomial.
template <class T>
T hermite1_deriv(const T& p0, const T& v0, const T& p1, const T& v1, double tr) {
    const double tr2 = tr * tr;
    const double d00 = 6 * tr2 - 6 * tr;
    const double d10 = 3 * tr2 - 4 * tr + 1;
    const double d01 = -6 * tr2 + 6 * tr;
    const double d11 = 3 * tr2 - 2 * tr;
    return p0 * d00 + v0 * d10 + p1 * d01 + v1 * d11;
}

template <class T>
Vec3T<T> hermite3_deriv(const Vec3T<T>& p0, const Vec3T<T>& v0, const Vec3T<T>& p1,
                        const Vec3T<T>& v1, double tr) {
    return {hermite1_deriv(p0.x, v0.x, p1.x, v1.x, tr),
            hermite1_deriv(p0.y, v0.y, p1.y, v1.y, tr),
            hermite1_deriv(p0.z, v0.z, p1.z, v1.z, tr)};
}

// Keyframed motion state of one object Gaussian: spline control points and
// velocity tangents, per-key rotations and opacities, constant scale/color.
// Tangents are in scene units per unit of segment-normalized time.
struct ChsTrack {
    std::vector<Vec3> control_points;      // m_k
    std::vector<Vec3> velocities;          // tau_k
    std::vector<UnitRotation> rotations;   // q_k
    std::vector<double> opacities;         // o_k in [0,1]
    Vec3 scale{1.0, 1.0, 1.0};
    Vec3 color{1.0, 1.0, 1.0};

    int n_keys() const { return static_cast<int>(control_points.size()); }

    void validate(const TimeGrid& grid) const {
        const auto nk = static_cast<std::size_t>(grid.n_keys);
        if (control_points.size() != nk || velocities.size() != nk ||
            rotations.size() != nk || opacities.size() != nk)
            throw DimensionMismatch("ChsTrack: per-keyframe array lengths disagree with grid");
    }

    static ChsTrack zeros(const TimeGrid& grid) {
        ChsTrack tr;
        const auto nk = static_cast<std::size_t>(grid.n_keys);
        tr.control_points.assign(nk, Vec3{});
        tr.velocities.assign(nk, Vec3{});
        tr.rotations.assign(nk, UnitRotation::identity());
        tr.opacities.assign(nk, 1.0);
        return tr;
    }
};

inline Vec3 chs_eval(const ChsTrack& track, double t, const TimeGrid& grid) {
    track.validate(grid);
    const SegmentPos s = normalize_time(t, grid);
    const auto k = static_cast<std::size_t>(s.k);
    return hermite3(track.control_points[k], track.velocities[k],
                    track.control_points[k + 1], track.velocities[k + 1], s.tr);
}

inline Vec3 chs_derivative(const ChsTrack& track, double t, const TimeGrid& grid) {
    track.validate(grid);
    const SegmentPos s = normalize_time(t, grid);
    const auto k = static_cast<std::size_t>(s.k);
    return hermite3_deriv(track.control_points[k], track.velocities[k],
                          track.control_points[k + 1], track.velocities[k + 1], s.tr);
}

struct GaussianState {
    Vec3 position{};
    UnitRotation rotation;
    double opacity = 1.0;
    Vec3 scale{1.0, 1.0, 1.0};
    Vec3 color{1.0, 1.0, 1.0};
};

inline GaussianState track_state(const ChsTrack& track, double t, const TimeGrid& grid) {
    track.validate(grid);
    const SegmentPos s = normalize_time(t, grid);
    const auto k = static_cast<std::size_t>(s.k);
    GaussianState st;
    st.position = hermite3(track.control_points[k], track.velocities[k],
                           track.control_points[k + 1], track.velocities[k + 1], s.tr);
    st.rotation = slerp(track.rotations[k], track.rotations[k + 1], s.tr);
    const double o = (1.0 - s.tr) * track.opacities[k] + s.tr * track.opacities[k + 1];
    st.opacity = std::min(1.0, std::max(0.0, o));
    st.scale = track.scale;
    st.color = track.color;
    return st;
}

} // namespace hoigs
