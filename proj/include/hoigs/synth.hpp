#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoigs/geom.hpp"
#include "hoigs/hexplane.hpp"
#include "hoigs/skeleton.hpp"
#include "hoigs/spline.hpp"

namespace hoigs {

struct SceneConfig {
    int n_frames = 33;
    int key_stride = 4;
    std::string motion_template = "carry"; // carry | place | swing
    double noise_sigma = 0.01;
    int avatar_points = 60;
    int n_parts = 16;

    void validate() const {
        if (n_frames < 2 * key_stride || key_stride < 1)
            throw InvalidConfig("SceneConfig: need n_frames >= 2*key_stride");
        if (noise_sigma < 0.0)
            throw InvalidConfig("SceneConfig: negative noise");
        if (motion_template != "carry" && motion_template != "place" &&
            motion_template != "swing")
            throw InvalidConfig("SceneConfig: unknown motion template");
        if (avatar_points < n_parts || n_parts < 1)
            throw InvalidConfig("SceneConfig: avatar_points must cover the parts");
    }
};

// Coupled human-object ground truth plus noisy observations. During contact
// frames the object centroid equals the engaged hand joint position plus
// grip_offset, exactly by construction.
struct SyntheticScene {
    SceneConfig config;
    std::uint64_t seed = 0;
    TimeGrid grid;
    Skeleton skeleton;
    AvatarRig rig;
    PartPartition partition;

    std::vector<PoseParams> gt_poses;            // per frame
    std::vector<Vec3> gt_object_position;        // per frame, centroid
    std::vector<UnitRotation> gt_object_rotation;
    std::vector<Vec3> object_cloud;              // canonical, centroid at origin
    std::vector<CameraPose> cameras;             // per frame
    std::vector<int> contact_frames;
    Vec3 grip_offset;
    std::string engaged_hand; // "left_hand" or "right_hand"

    std::vector<std::vector<Vec3>> obs_human_points;  // per frame, V x 3
    std::vector<std::vector<Vec3>> obs_object_points; // per frame

    std::vector<Vec3> gt_human_points(int frame) const;
    std::vector<Vec3> gt_object_points(int frame) const;
    Vec3 pelvis_position(const PoseParams& pose) const;
    bool is_contact(int frame) const;

    // Scene bounding box over all observed points, padded by 10% per axis.
    std::pair<Vec3, Vec3> bounds() const;
};

SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed);

// Vertex index sets dominated by the left/right hand joints.
std::pair<std::vector<int>, std::vector<int>> hand_vertex_indices(const AvatarRig& rig,
                                                                  const Skeleton& skel);

// 8 box corners plus 6 face centers, half-extent h.
std::vector<Vec3> make_box_cloud(double half_extent);

} // namespace hoigs
