#include "hoigs/synth.hpp"

#include <algorithm>
#include <cmath>

#include "hoigs/rng.hpp"

namespace hoigs {

std::vector<Vec3> make_box_cloud(double h) {
    std::vector<Vec3> pts;
    for (double sx : {-h, h})
        for (double sy : {-h, h})
            for (double sz : {-h, h}) pts.push_back({sx, sy, sz});
    pts.push_back({h, 0, 0});
    pts.push_back({-h, 0, 0});
    pts.push_back({0, h, 0});
    pts.push_back({0, -h, 0});
    pts.push_back({0, 0, h});
    pts.push_back({0, 0, -h});
    return pts;
}

std::pair<std::vector<int>, std::vector<int>> hand_vertex_indices(const AvatarRig& rig,
                                                                  const Skeleton& skel) {
    const int lh = skel.find("left_hand");
    const int rh = skel.find("right_hand");
    std::vector<int> left, right;
    for (int i = 0; i < rig.points(); ++i) {
        int best = 0;
        for (int j = 1; j < skel.joints(); ++j)
            if (rig.weights.at(i, j) > rig.weights.at(i, best)) best = j;
        if (best == lh) left.push_back(i);
        if (best == rh) right.push_back(i);
    }
    return {left, right};
}

std::vector<Vec3> SyntheticScene::gt_human_points(int frame) const {
    return lbs_deform(rig, skeleton, gt_poses[static_cast<std::size_t>(frame)]);
}

std::vector<Vec3> SyntheticScene::gt_object_points(int frame) const {
    const auto f = static_cast<std::size_t>(frame);
    std::vector<Vec3> out;
    out.reserve(object_cloud.size());
    for (const Vec3& p : object_cloud)
        out.push_back(gt_object_rotation[f].rotate(p) + gt_object_position[f]);
    return out;
}

Vec3 SyntheticScene::pelvis_position(const PoseParams& pose) const {
    const auto tf = forward_kinematics(skeleton, pose);
    const int pelvis = skeleton.find("pelvis");
    return tf[static_cast<std::size_t>(pelvis)].t;
}

bool SyntheticScene::is_contact(int frame) const {
    return std::find(contact_frames.begin(), contact_frames.end(), frame) !=
           contact_frames.end();
}

std::pair<Vec3, Vec3> SyntheticScene::bounds() const {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    auto grow = [&](const Vec3& p) {
        lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
        lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
        lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
    };
    for (const auto& frame : obs_human_points)
        for (const Vec3& p : frame) grow(p);
    for (const auto& frame : obs_object_points)
        for (const Vec3& p : frame) grow(p);
    const Vec3 pad = (hi - lo) * 0.1 + Vec3{1e-3, 1e-3, 1e-3};
    return {lo - pad, hi + pad};
}

namespace {

CameraPose look_at(const Vec3& eye, const Vec3& center, double fx, double cx) {
    const Vec3 fwd = (center - eye) * (1.0 / norm(center - eye));
    Vec3 up{0, 1, 0};
    Vec3 right = cross(up, fwd);
    const double rn = norm(right);
    if (rn < 1e-9) right = Vec3{1, 0, 0};
    else right = right * (1.0 / rn);
    const Vec3 down = cross(fwd, right); // completes a right-handed camera frame
    CameraPose cam;
    cam.rotation.m = {right.x, right.y, right.z,
                      down.x,  down.y,  down.z,
                      fwd.x,   fwd.y,   fwd.z};
    cam.translation = -(cam.rotation * eye);
    cam.fx = cam.fy = fx;
    cam.cx = cam.cy = cx;
    return cam;
}

// Per-frame joint angles for the three motion templates. u is the phase
// inside the contact window, s the normalized sequence time.
PoseParams template_pose(const std::string& tmpl, const Skeleton& skel, double s,
                         double u, bool in_contact) {
    PoseParams pose = PoseParams::zeros(skel.joints());
    const int rsh = skel.find("right_shoulder");
    const int rel = skel.find("right_elbow");
    const int lsh = skel.find("left_shoulder");
    auto set_z = [&](int j, double angle) {
        pose.theta[static_cast<std::size_t>(j)] = Vec3{0.0, 0.0, angle};
    };
    if (tmpl == "carry") {
        // two arm swings inside the contact window, fast enough that a
        // stride-4 spline visibly smooths the object path; sin^2 keeps the
        // window boundaries C1
        const double a =
            in_contact ? std::sin(2.0 * M_PI * u) * std::sin(2.0 * M_PI * u) : 0.0;
        set_z(rsh, -1.1 * a);
        set_z(rel, -0.5 * a);
        set_z(lsh, 0.15 * std::sin(2.0 * M_PI * s) * std::sin(2.0 * M_PI * s));
    } else if (tmpl == "place") {
        // raise-and-hold: half-sine eases in, pose freezes after release
        const double a = in_contact ? std::sin(0.5 * M_PI * u) * std::sin(0.5 * M_PI * u)
                                    : 1.0;
        set_z(rsh, -1.0 * a);
        set_z(rel, -0.4 * a);
    } else { // swing
        set_z(rsh, -0.9 + 0.4 * std::sin(2.0 * M_PI * s));
        set_z(rel, -0.3 + 0.2 * std::sin(2.0 * M_PI * s + 0.7));
    }
    return pose;
}

} // namespace

SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);

    SyntheticScene scene;
    scene.config = config;
    scene.seed = seed;
    scene.grid = TimeGrid::from_stride(config.n_frames, config.key_stride);
    scene.skeleton = Skeleton::default_rig();
    scene.engaged_hand = "right_hand";
    scene.grip_offset = Vec3{0.0, -0.08, 0.03};
    scene.object_cloud = make_box_cloud(0.06);

    // avatar: point blobs around the canonical joints, weights by proximity
    const auto joints = scene.skeleton.canonical_joint_positions();
    const int j_count = scene.skeleton.joints();
    const int v_count = config.avatar_points;
    scene.rig.alpha = 1.0;
    scene.rig.weights = Tensor({v_count, j_count});
    for (int i = 0; i < v_count; ++i) {
        const int j = i % j_count;
        const Vec3 center = joints[static_cast<std::size_t>(j)];
        const Vec3 p = center + Vec3{rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08),
                                     rng.uniform(-0.08, 0.08)};
        scene.rig.canonical_points.push_back(p);
        // softmax of -dist^2 / sigma^2 over joints
        const double inv_s2 = 1.0 / (0.12 * 0.12);
        double mx = -1e30;
        std::vector<double> logits(static_cast<std::size_t>(j_count));
        for (int k = 0; k < j_count; ++k) {
            logits[static_cast<std::size_t>(k)] =
                -dist2(p, joints[static_cast<std::size_t>(k)]) * inv_s2;
            mx = std::max(mx, logits[static_cast<std::size_t>(k)]);
        }
        double denom = 0.0;
        for (int k = 0; k < j_count; ++k)
            denom += std::exp(logits[static_cast<std::size_t>(k)] - mx);
        for (int k = 0; k < j_count; ++k)
            scene.rig.weights.at(i, k) =
                std::exp(logits[static_cast<std::size_t>(k)] - mx) / denom;
    }
    scene.rig.pose = PoseParams::zeros(j_count);
    scene.rig.validate(scene.skeleton);
    scene.partition = partition_by_weights(scene.rig.weights, config.n_parts);

    // contact window per template
    const int nf = config.n_frames;
    int c0 = 0, c1 = nf - 1;
    if (config.motion_template == "carry") {
        c0 = nf / 4;
        c1 = (3 * nf) / 4;
    } else if (config.motion_template == "place") {
        c0 = 0;
        c1 = nf / 2;
    }
    for (int t = c0; t <= c1; ++t) scene.contact_frames.push_back(t);

    const int hand = scene.skeleton.find(scene.engaged_hand);
    Vec3 rest_object{};
    for (int t = 0; t < nf; ++t) {
        const double s = static_cast<double>(t) / (nf - 1);
        const bool contact = t >= c0 && t <= c1;
        const double u = (c1 > c0) ? static_cast<double>(t - c0) / (c1 - c0) : 0.0;
        PoseParams pose = template_pose(config.motion_template, scene.skeleton, s, u, contact);
        const auto tf = forward_kinematics(scene.skeleton, pose);
        const Vec3 hand_pos = tf[static_cast<std::size_t>(hand)].t;
        Vec3 obj_pos;
        if (contact) {
            obj_pos = hand_pos + scene.grip_offset;
            if (t == c1) rest_object = obj_pos; // where "place" leaves it
        } else if (t < c0) {
            // static until pickup; the sin^2 window means pose(c0) == rest
            PoseParams p0 = template_pose(config.motion_template, scene.skeleton,
                                          static_cast<double>(c0) / (nf - 1), 0.0, true);
            const auto tf0 = forward_kinematics(scene.skeleton, p0);
            obj_pos = tf0[static_cast<std::size_t>(hand)].t + scene.grip_offset;
        } else {
            obj_pos = rest_object;
        }
        scene.gt_poses.push_back(pose);
        scene.gt_object_position.push_back(obj_pos);
        scene.gt_object_rotation.push_back(UnitRotation::identity());

        const double angle = 0.4 * M_PI * s;
        const Vec3 eye{3.5 * std::sin(angle), 1.4, -3.5 * std::cos(angle)};
        scene.cameras.push_back(look_at(eye, Vec3{0.0, 1.0, 0.0}, 300.0, 64.0));
    }

    // noisy observations
    for (int t = 0; t < nf; ++t) {
        auto human = scene.gt_human_points(t);
        for (Vec3& p : human)
            p += Vec3{rng.normal(0, config.noise_sigma), rng.normal(0, config.noise_sigma),
                      rng.normal(0, config.noise_sigma)};
        scene.obs_human_points.push_back(std::move(human));
        auto object = scene.gt_object_points(t);
        for (Vec3& p : object)
            p += Vec3{rng.normal(0, config.noise_sigma), rng.normal(0, config.noise_sigma),
                      rng.normal(0, config.noise_sigma)};
        scene.obs_object_points.push_back(std::move(object));
    }
    return scene;
}

} // namespace hoigs
