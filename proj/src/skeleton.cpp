#include "hoigs/skeleton.hpp"

#include <cmath>

namespace hoigs {

void Skeleton::validate() const {
    const int j_count = joints();
    if (j_count == 0 || rest_offsets.size() != static_cast<std::size_t>(j_count) ||
        names.size() != static_cast<std::size_t>(j_count))
        throw MalformedSkeleton("skeleton arrays inconsistent");
    if (parent[0] != -1)
        throw MalformedSkeleton("joint 0 must be the root");
    for (int j = 1; j < j_count; ++j) {
        const int p = parent[static_cast<std::size_t>(j)];
        // parents must precede children; rules out cycles and bad indices
        if (p < 0 || p >= j)
            throw MalformedSkeleton("parent indices must form a tree rooted at joint 0");
    }
}

std::vector<Vec3> Skeleton::canonical_joint_positions() const {
    validate();
    std::vector<Vec3> pos(static_cast<std::size_t>(joints()));
    for (int j = 0; j < joints(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const int p = parent[sj];
        pos[sj] = (p < 0) ? rest_offsets[sj]
                          : pos[static_cast<std::size_t>(p)] + rest_offsets[sj];
    }
    return pos;
}

double Skeleton::arm_length() const {
    double best = 0.0;
    const int pelvis = find("pelvis");
    for (const char* hand : {"left_hand", "right_hand"}) {
        const int h = find(hand);
        if (h < 0) continue;
        double len = 0.0;
        int j = h;
        // walk up until the joint hanging directly off the pelvis; its own
        // offset is torso, not arm
        while (j >= 0 && parent[static_cast<std::size_t>(j)] != pelvis &&
               parent[static_cast<std::size_t>(j)] >= 0) {
            len += norm(rest_offsets[static_cast<std::size_t>(j)]);
            j = parent[static_cast<std::size_t>(j)];
        }
        best = std::max(best, len);
    }
    return best;
}

Skeleton Skeleton::default_rig() {
    Skeleton s;
    s.names = {"pelvis",         "left_shoulder", "left_elbow", "left_hand",
               "right_shoulder", "right_elbow",   "right_hand"};
    s.parent = {-1, 0, 1, 2, 0, 4, 5};
    s.rest_offsets = {
        {0.0, 1.0, 0.0},   // pelvis above origin
        {-0.2, 0.4, 0.0},  // left shoulder
        {-0.3, 0.0, 0.0},  // left elbow
        {-0.3, 0.0, 0.0},  // left hand
        {0.2, 0.4, 0.0},   // right shoulder
        {0.3, 0.0, 0.0},   // right elbow
        {0.3, 0.0, 0.0},   // right hand
    };
    s.partition.body = {1, 2, 4, 5};
    s.partition.lhand = {3};
    s.partition.rhand = {6};
    s.validate();
    return s;
}

void AvatarRig::validate(const Skeleton& skel) const {
    const int v = points();
    if (weights.shape.size() != 2 || weights.shape[0] != v ||
        weights.shape[1] != skel.joints())
        throw DimensionMismatch("AvatarRig: W shape disagrees with skeleton");
    if (alpha <= 0.0)
        throw InvalidConfig("AvatarRig: alpha must be positive");
    for (int i = 0; i < v; ++i) {
        double sum = 0.0;
        for (int j = 0; j < skel.joints(); ++j) {
            const double w = weights.at(i, j);
            if (w < 0.0)
                throw InvalidConfig("AvatarRig: negative skinning weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidConfig("AvatarRig: skinning weight row does not sum to 1");
    }
}

std::vector<Vec3> lbs_deform(const AvatarRig& rig, const Skeleton& skel,
                             const PoseParams& pose) {
    rig.validate(skel);
    const auto joint_tf = forward_kinematics(skel, pose);
    std::vector<Vec3> pts = rig.canonical_points;
    if (!rig.attributes.offsets.empty()) {
        if (rig.attributes.offsets.size() != pts.size())
            throw DimensionMismatch("lbs_deform: offset count mismatch");
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i] += rig.attributes.offsets[i];
    }
    return lbs_apply<double>(skel, joint_tf, pts, rig.weights, rig.alpha);
}

AttributeSet avatar_attributes(const Mlp& head,
                               const std::vector<std::vector<double>>& spatial_features,
                               int n_joints) {
    const int out_dim = 14 + n_joints; // c(3) o(1) dp(3) r(4) s(3) w(J)
    if (head.output_dim() != out_dim)
        throw DimensionMismatch("avatar_attributes: head output width must be 14+J");
    AttributeSet a;
    const int v = static_cast<int>(spatial_features.size());
    a.weights = Tensor({v, n_joints});
    for (int i = 0; i < v; ++i) {
        const auto raw = head.forward(spatial_features[static_cast<std::size_t>(i)]);
        auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
        a.colors.push_back({sig(raw[0]), sig(raw[1]), sig(raw[2])});
        a.opacities.push_back(sig(raw[3]));
        a.offsets.push_back({raw[4], raw[5], raw[6]});
        const double qn = std::sqrt(raw[7] * raw[7] + raw[8] * raw[8] +
                                    raw[9] * raw[9] + raw[10] * raw[10]);
        if (qn < 1e-12)
            a.rotations.push_back(UnitRotation::identity());
        else
            a.rotations.push_back(UnitRotation(raw[7], raw[8], raw[9], raw[10]));
        a.scales.push_back({std::exp(raw[11]), std::exp(raw[12]), std::exp(raw[13])});
        // softmax over joints, max-shifted
        double mx = raw[14];
        for (int j = 1; j < n_joints; ++j)
            mx = std::max(mx, raw[static_cast<std::size_t>(14 + j)]);
        double denom = 0.0;
        for (int j = 0; j < n_joints; ++j)
            denom += std::exp(raw[static_cast<std::size_t>(14 + j)] - mx);
        for (int j = 0; j < n_joints; ++j)
            a.weights.at(i, j) = std::exp(raw[static_cast<std::size_t>(14 + j)] - mx) / denom;
    }
    return a;
}

} // namespace hoigs
