#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hoigs/ad.hpp"
#include "hoigs/common.hpp"

namespace hoigs {

template <class T>
struct Vec3T {
    T x{}, y{}, z{};

    Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3T operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3T operator-() const { return {-x, -y, -z}; }
    Vec3T& operator+=(const Vec3T& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

using Vec3 = Vec3T<double>;

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double dist2(const Vec3& a, const Vec3& b) {
    const Vec3 d = a - b;
    return dot(d, d);
}

template <class T>
T dot(const Vec3T<T>& a, const Vec3T<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <class T>
struct Mat3T {
    // row-major
    std::array<T, 9> m{};

    static Mat3T identity() {
        Mat3T r;
        r.m = {T(1), T(0), T(0), T(0), T(1), T(0), T(0), T(0), T(1)};
        return r;
    }

    Vec3T<T> operator*(const Vec3T<T>& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3T operator*(const Mat3T& o) const {
        Mat3T r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[static_cast<std::size_t>(3 * i + j)] =
                    m[static_cast<std::size_t>(3 * i)] * o.m[static_cast<std::size_t>(j)] +
                    m[static_cast<std::size_t>(3 * i + 1)] * o.m[static_cast<std::size_t>(3 + j)] +
                    m[static_cast<std::size_t>(3 * i + 2)] * o.m[static_cast<std::size_t>(6 + j)];
        return r;
    }

    Mat3T transposed() const {
        Mat3T r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[static_cast<std::size_t>(3 * i + j)] = m[static_cast<std::size_t>(3 * j + i)];
        return r;
    }
};

using Mat3 = Mat3T<double>;

// Unit quaternion, canonicalized to w >= 0 (double cover).
struct UnitRotation {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    UnitRotation() = default;
    UnitRotation(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {
        normalize();
    }

    static UnitRotation identity() { return {}; }

    static UnitRotation from_axis_angle(const Vec3& axis, double angle) {
        const double n = norm(axis);
        if (n < 1e-15) return identity();
        const double h = 0.5 * angle;
        const double s = std::sin(h) / n;
        return {std::cos(h), axis.x * s, axis.y * s, axis.z * s};
    }

    void normalize() {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        w /= n; x /= n; y /= n; z /= n;
        if (w < 0.0) { w = -w; x = -x; y = -y; z = -z; }
    }

    double dot(const UnitRotation& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }

    Mat3 to_matrix() const {
        Mat3 r;
        r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
               2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
               2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
        return r;
    }

    Vec3 rotate(const Vec3& v) const { return to_matrix() * v; }
};

// Geodesic interpolation along the shorter arc; near-antipodal pairs fall
// back to normalized linear interpolation.
UnitRotation slerp(const UnitRotation& q0, const UnitRotation& q1, double u);

struct BBox2D {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

    double area() const { return (max_x - min_x) * (max_y - min_y); }
};

struct CameraPose {
    Mat3 rotation = Mat3::identity(); // world -> camera
    Vec3 translation{};
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    Vec3 shift{}; // per-frame shift v_t applied in camera space

    bool rotation_orthonormal(double tol = 1e-9) const;
};

// p_cam = R * p_world + t
inline Vec3 world_to_camera(const Vec3& p, const CameraPose& cam) {
    return cam.rotation * p + cam.translation;
}

// Pinhole projection; requires positive depth.
std::array<double, 2> project_point(const Vec3& p_world, const CameraPose& cam);

std::pair<BBox2D, double> project_bbox_area(const std::vector<Vec3>& points,
                                            const CameraPose& cam);

// S = mean over valid frames of sqrt(A_mask / A_proj); frames whose
// projection fails (point behind camera) or collapses to zero area are
// skipped, and the mean runs over the frames that survive.
double estimate_scale(const std::vector<Vec3>& canonical_means,
                      const std::vector<BBox2D>& masks,
                      const std::vector<CameraPose>& cams);

// mu_world = R^T ((S * mu_can + v_t) - t_t)
Vec3 to_world(const Vec3& mu_can, double scale, const CameraPose& cam);

// Forward map matching to_world: mu_can = (R * mu_world + t_t - v_t) / S
Vec3 from_world(const Vec3& mu_world, double scale, const CameraPose& cam);

} // namespace hoigs
