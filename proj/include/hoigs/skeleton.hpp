#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hoigs/common.hpp"
#include "hoigs/geom.hpp"
#include "hoigs/nn.hpp"

namespace hoigs {

template <class T>
struct RigidT {
    Mat3T<T> R = Mat3T<T>::identity();
    Vec3T<T> t{};

    Vec3T<T> apply(const Vec3T<T>& p) const { return R * p + t; }
};

using Rigid = RigidT<double>;

// Rotation matrix from an axis-angle vector. Written in terms of |aa|^2 with
// a series branch near zero, so it stays smooth (and differentiable) at the
// identity.
template <class T>
Mat3T<T> rodrigues(const Vec3T<T>& aa) {
    using std::sqrt;
    using std::sin;
    using std::cos;
    using ad::sqrt;
    using ad::sin;
    using ad::cos;
    const T t2 = aa.x * aa.x + aa.y * aa.y + aa.z * aa.z;
    T a, b; // sin(th)/th, (1-cos(th))/th^2
    if (ad::value_of(t2) < 1e-12) {
        a = 1.0 - t2 * (1.0 / 6.0);
        b = 0.5 - t2 * (1.0 / 24.0);
    } else {
        const T th = sqrt(t2);
        a = sin(th) / th;
        b = (1.0 - cos(th)) / t2;
    }
    const T xx = aa.x * aa.x, yy = aa.y * aa.y, zz = aa.z * aa.z;
    const T xy = aa.x * aa.y, xz = aa.x * aa.z, yz = aa.y * aa.z;
    Mat3T<T> r;
    r.m[0] = 1.0 + b * (-(yy + zz));
    r.m[1] = a * (-aa.z) + b * xy;
    r.m[2] = a * aa.y + b * xz;
    r.m[3] = a * aa.z + b * xy;
    r.m[4] = 1.0 + b * (-(xx + zz));
    r.m[5] = a * (-aa.x) + b * yz;
    r.m[6] = a * (-aa.y) + b * xz;
    r.m[7] = a * aa.x + b * yz;
    r.m[8] = 1.0 + b * (-(xx + yy));
    return r;
}

// Joint index sets feeding the pose-residual partition (body / left hand /
// right hand); sizes are whatever the loaded skeleton declares.
struct PosePartition {
    std::vector<int> body;
    std::vector<int> lhand;
    std::vector<int> rhand;

    int total() const {
        return static_cast<int>(body.size() + lhand.size() + rhand.size());
    }
};

struct Skeleton {
    std::vector<int> parent;       // parent[0] == -1
    std::vector<Vec3> rest_offsets; // joint position relative to parent, canonical pose
    std::vector<std::string> names;
    PosePartition partition;

    int joints() const { return static_cast<int>(parent.size()); }

    int find(const std::string& name) const {
        for (int j = 0; j < joints(); ++j)
            if (names[static_cast<std::size_t>(j)] == name) return j;
        return -1;
    }

    void validate() const;

    // Joint positions in the canonical (zero) pose.
    std::vector<Vec3> canonical_joint_positions() const;

    // Summed segment lengths from a hand joint up to (excluding) the joint
    // hanging directly off the pelvis; max of left/right.
    double arm_length() const;

    // Default 7-joint test rig: pelvis, two 2-segment arms, hands.
    static Skeleton default_rig();
};

template <class T>
using PoseVec = std::vector<Vec3T<T>>; // axis-angle per joint

struct PoseParams {
    std::vector<Vec3> theta; // J x 3 axis-angle

    int joints() const { return static_cast<int>(theta.size()); }

    static PoseParams zeros(int j) {
        PoseParams p;
        p.theta.assign(static_cast<std::size_t>(j), Vec3{});
        return p;
    }
};

// T_j = T_parent(j) * Translate(rest_offsets_j) * Rot(theta_j); root parent
// is the identity.
template <class T>
std::vector<RigidT<T>> forward_kinematics(const Skeleton& skel, const PoseVec<T>& theta) {
    skel.validate();
    if (theta.size() != static_cast<std::size_t>(skel.joints()))
        throw DimensionMismatch("forward_kinematics: pose joint count mismatch");
    const int j_count = skel.joints();
    std::vector<RigidT<T>> out(static_cast<std::size_t>(j_count));
    for (int j = 0; j < j_count; ++j) { // validate() guarantees parent[j] < j
        const auto sj = static_cast<std::size_t>(j);
        RigidT<T> local;
        local.R = rodrigues(theta[sj]);
        const Vec3& off = skel.rest_offsets[sj];
        local.t = Vec3T<T>{T(off.x), T(off.y), T(off.z)};
        if (skel.parent[sj] < 0) {
            out[sj] = local;
        } else {
            const RigidT<T>& p = out[static_cast<std::size_t>(skel.parent[sj])];
            out[sj].R = p.R * local.R;
            out[sj].t = p.R * local.t + p.t;
        }
    }
    return out;
}

inline std::vector<Rigid> forward_kinematics(const Skeleton& skel, const PoseParams& pose) {
    return forward_kinematics<double>(skel, pose.theta);
}

// Per-point outputs of the canonical attribute head.
struct AttributeSet {
    std::vector<Vec3> colors;        // [0,1]
    std::vector<double> opacities;   // [0,1]
    std::vector<Vec3> offsets;       // delta P_c
    std::vector<UnitRotation> rotations;
    std::vector<Vec3> scales;        // positive
    Tensor weights;                  // V x J, row-stochastic
};

struct AvatarRig {
    std::vector<Vec3> canonical_points; // P_c, V x 3
    Tensor weights;                     // W, V x J row-stochastic
    PoseParams pose;
    double alpha = 1.0;
    AttributeSet attributes; // offsets default to zero when empty

    int points() const { return static_cast<int>(canonical_points.size()); }

    void validate(const Skeleton& skel) const;
};

// p_i = alpha * sum_j W_ij * (R_j (p_i + dP_i - c_j) + t_j) where c_j is the
// canonical joint position (T-bar inverse applied in closed form).
template <class T>
std::vector<Vec3T<T>> lbs_apply(const Skeleton& skel, const std::vector<RigidT<T>>& joint_tf,
                                const std::vector<Vec3T<T>>& points, const Tensor& weights,
                                const T& alpha) {
    const std::vector<Vec3> canon = skel.canonical_joint_positions();
    const int j_count = skel.joints();
    if (weights.shape.size() != 2 || weights.shape[1] != j_count ||
        weights.shape[0] != static_cast<int>(points.size()))
        throw DimensionMismatch("lbs_apply: weight matrix shape mismatch");
    std::vector<Vec3T<T>> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        Vec3T<T> acc{T(0.0), T(0.0), T(0.0)};
        for (int j = 0; j < j_count; ++j) {
            const double w = weights.at(static_cast<int>(i), j);
            if (w == 0.0) continue;
            const auto sj = static_cast<std::size_t>(j);
            const Vec3& c = canon[sj];
            const Vec3T<T> rel{points[i].x - c.x, points[i].y - c.y, points[i].z - c.z};
            const Vec3T<T> moved = joint_tf[sj].R * rel + joint_tf[sj].t;
            acc += moved * w;
        }
        out.push_back(Vec3T<T>{acc.x * alpha, acc.y * alpha, acc.z * alpha});
    }
    return out;
}

// Eq-style entry point over a rig: applies canonical offsets, FK, skinning
// and the global scale.
std::vector<Vec3> lbs_deform(const AvatarRig& rig, const Skeleton& skel,
                             const PoseParams& pose);

// Attribute head: squashes color/opacity, normalizes rotations, exp-maps
// scales, softmaxes skinning weights over joints.
AttributeSet avatar_attributes(const Mlp& head,
                               const std::vector<std::vector<double>>& spatial_features,
                               int n_joints);

} // namespace hoigs
