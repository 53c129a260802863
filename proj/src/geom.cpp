#include "hoigs/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hoigs {

UnitRotation slerp(const UnitRotation& q0, const UnitRotation& q1, double u) {
    double d = q0.dot(q1);
    // take the shorter arc
    double sign = 1.0;
    if (d < 0.0) {
        d = -d;
        sign = -1.0;
    }
    double a, b;
    if (d > 1.0 - 1e-6) {
        // nearly identical or antipodal: nlerp
        a = 1.0 - u;
        b = u;
    } else {
        const double theta = std::acos(std::clamp(d, -1.0, 1.0));
        const double s = std::sin(theta);
        a = std::sin((1.0 - u) * theta) / s;
        b = std::sin(u * theta) / s;
    }
    b *= sign;
    return UnitRotation(a * q0.w + b * q1.w, a * q0.x + b * q1.x,
                        a * q0.y + b * q1.y, a * q0.z + b * q1.z);
}

bool CameraPose::rotation_orthonormal(double tol) const {
    const Mat3 rrt = rotation * rotation.transposed();
    const Mat3 id = Mat3::identity();
    for (int i = 0; i < 9; ++i)
        if (std::abs(rrt.m[static_cast<std::size_t>(i)] - id.m[static_cast<std::size_t>(i)]) > tol)
            return false;
    const auto& m = rotation.m;
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                       m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    return std::abs(det - 1.0) <= 1e-6;
}

std::array<double, 2> project_point(const Vec3& p_world, const CameraPose& cam) {
    const Vec3 pc = world_to_camera(p_world, cam);
    if (pc.z <= 0.0)
        throw PointBehindCamera("project_point: non-positive depth");
    return {cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy};
}

std::pair<BBox2D, double> project_bbox_area(const std::vector<Vec3>& points,
                                            const CameraPose& cam) {
    if (points.empty())
        throw EmptyPointSet("project_bbox_area: no points");
    BBox2D box;
    box.min_x = box.min_y = std::numeric_limits<double>::infinity();
    box.max_x = box.max_y = -std::numeric_limits<double>::infinity();
    for (const Vec3& p : points) {
        const auto uv = project_point(p, cam);
        box.min_x = std::min(box.min_x, uv[0]);
        box.max_x = std::max(box.max_x, uv[0]);
        box.min_y = std::min(box.min_y, uv[1]);
        box.max_y = std::max(box.max_y, uv[1]);
    }
    return {box, box.area()};
}

double estimate_scale(const std::vector<Vec3>& canonical_means,
                      const std::vector<BBox2D>& masks,
                      const std::vector<CameraPose>& cams) {
    if (masks.size() != cams.size() || masks.empty())
        throw DimensionMismatch("estimate_scale: masks/cams length mismatch");
    double sum = 0.0;
    int valid = 0;
    for (std::size_t t = 0; t < cams.size(); ++t) {
        double area_proj = 0.0;
        try {
            area_proj = project_bbox_area(canonical_means, cams[t]).second;
        } catch (const PointBehindCamera&) {
            continue; // frame invalid for scale estimation
        }
        if (area_proj <= 0.0) continue;
        sum += std::sqrt(masks[t].area() / area_proj);
        ++valid;
    }
    if (valid == 0)
        throw DegenerateProjection("estimate_scale: no frame with positive projected area");
    return sum / static_cast<double>(valid);
}

Vec3 to_world(const Vec3& mu_can, double scale, const CameraPose& cam) {
    const Vec3 pc = mu_can * scale + cam.shift - cam.translation;
    return cam.rotation.transposed() * pc;
}

Vec3 from_world(const Vec3& mu_world, double scale, const CameraPose& cam) {
    const Vec3 pc = cam.rotation * mu_world + cam.translation - cam.shift;
    return pc * (1.0 / scale);
}

} // namespace hoigs
