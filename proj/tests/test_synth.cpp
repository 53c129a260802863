#include <doctest.h>

#include <cmath>

#include "hoigs/synth.hpp"

using namespace hoigs;

TEST_CASE("same seed regenerates the scene bitwise") {
    SceneConfig cfg;
    const SyntheticScene a = generate_scene(cfg, 7);
    const SyntheticScene b = generate_scene(cfg, 7);
    REQUIRE(a.obs_human_points.size() == b.obs_human_points.size());
    for (std::size_t t = 0; t < a.obs_human_points.size(); ++t)
        for (std::size_t i = 0; i < a.obs_human_points[t].size(); ++i) {
            CHECK(a.obs_human_points[t][i].x == b.obs_human_points[t][i].x);
            CHECK(a.obs_human_points[t][i].y == b.obs_human_points[t][i].y);
            CHECK(a.obs_human_points[t][i].z == b.obs_human_points[t][i].z);
        }
    for (std::size_t i = 0; i < a.rig.canonical_points.size(); ++i)
        CHECK(a.rig.canonical_points[i].x == b.rig.canonical_points[i].x);
    CHECK(a.rig.weights.data == b.rig.weights.data);
    CHECK(a.contact_frames == b.contact_frames);
}

TEST_CASE("different seeds perturb the observations") {
    SceneConfig cfg;
    const SyntheticScene a = generate_scene(cfg, 1);
    const SyntheticScene b = generate_scene(cfg, 2);
    bool differs = false;
    for (std::size_t i = 0; i < a.obs_human_points[0].size() && !differs; ++i)
        differs = a.obs_human_points[0][i].x != b.obs_human_points[0][i].x;
    CHECK(differs);
}

TEST_CASE("zero noise makes observations equal ground truth") {
    SceneConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.motion_template = "place";
    const SyntheticScene scene = generate_scene(cfg, 3);
    for (int t = 0; t < cfg.n_frames; ++t) {
        const auto gt_h = scene.gt_human_points(t);
        const auto gt_o = scene.gt_object_points(t);
        for (std::size_t i = 0; i < gt_h.size(); ++i) {
            CHECK(scene.obs_human_points[static_cast<std::size_t>(t)][i].x == gt_h[i].x);
            CHECK(scene.obs_human_points[static_cast<std::size_t>(t)][i].y == gt_h[i].y);
        }
        for (std::size_t i = 0; i < gt_o.size(); ++i)
            CHECK(scene.obs_object_points[static_cast<std::size_t>(t)][i].z == gt_o[i].z);
    }
}

TEST_CASE("contact frames pin the object to the engaged hand") {
    for (const char* tmpl : {"carry", "place", "swing"}) {
        SceneConfig cfg;
        cfg.motion_template = tmpl;
        const SyntheticScene scene = generate_scene(cfg, 11);
        const int hand = scene.skeleton.find(scene.engaged_hand);
        REQUIRE(hand >= 0);
        REQUIRE(!scene.contact_frames.empty());
        for (int t : scene.contact_frames) {
            const auto tf = forward_kinematics(scene.skeleton,
                                               scene.gt_poses[static_cast<std::size_t>(t)]);
            const Vec3 expect = tf[static_cast<std::size_t>(hand)].t + scene.grip_offset;
            CHECK(norm(scene.gt_object_position[static_cast<std::size_t>(t)] - expect) <
                  1e-12);
        }
    }
}

TEST_CASE("object stays still outside the carry contact window") {
    SceneConfig cfg;
    cfg.motion_template = "carry";
    const SyntheticScene scene = generate_scene(cfg, 5);
    const int c0 = scene.contact_frames.front();
    const int c1 = scene.contact_frames.back();
    for (int t = 0; t < c0; ++t)
        CHECK(norm(scene.gt_object_position[static_cast<std::size_t>(t)] -
                   scene.gt_object_position[0]) < 1e-12);
    for (int t = c1 + 1; t < cfg.n_frames; ++t)
        CHECK(norm(scene.gt_object_position[static_cast<std::size_t>(t)] -
                   scene.gt_object_position[static_cast<std::size_t>(c1)]) < 1e-12);
    // pre-contact rest position matches the pickup pose, so there is no jump
    CHECK(norm(scene.gt_object_position[0] -
               scene.gt_object_position[static_cast<std::size_t>(c0)]) < 1e-12);
}

TEST_CASE("generated rig and partition are valid") {
    SceneConfig cfg;
    const SyntheticScene scene = generate_scene(cfg, 9);
    CHECK_NOTHROW(scene.rig.validate(scene.skeleton));
    CHECK(scene.partition.n_parts() == cfg.n_parts);
    CHECK_NOTHROW(scene.partition.validate(scene.rig.points()));
    CHECK(scene.cameras.size() == static_cast<std::size_t>(cfg.n_frames));
    for (const auto& cam : scene.cameras) CHECK(cam.rotation_orthonormal(1e-9));
    CHECK(scene.grid.n_keys == 9);
}

TEST_CASE("box cloud has 14 points with the requested extent") {
    const auto pts = make_box_cloud(0.06);
    CHECK(pts.size() == 14);
    Vec3 centroid{};
    double max_norm = 0.0;
    for (const Vec3& p : pts) {
        centroid += p * (1.0 / 14.0);
        max_norm = std::max(max_norm, std::max(std::abs(p.x),
                                               std::max(std::abs(p.y), std::abs(p.z))));
    }
    CHECK(norm(centroid) < 1e-15);
    CHECK(max_norm == 0.06);
}

TEST_CASE("hand vertex index sets are disjoint and hand-dominated") {
    SceneConfig cfg;
    const SyntheticScene scene = generate_scene(cfg, 13);
    const auto [left, right] = hand_vertex_indices(scene.rig, scene.skeleton);
    CHECK(!left.empty());
    CHECK(!right.empty());
    for (int i : left)
        for (int j : right) CHECK(i != j);
}

TEST_CASE("invalid configs are rejected") {
    SceneConfig cfg;
    cfg.motion_template = "juggle";
    CHECK_THROWS_AS(generate_scene(cfg, 0), InvalidConfig);
    cfg = SceneConfig{};
    cfg.n_frames = 5;
    CHECK_THROWS_AS(generate_scene(cfg, 0), InvalidConfig);
    cfg = SceneConfig{};
    cfg.noise_sigma = -0.1;
    CHECK_THROWS_AS(generate_scene(cfg, 0), InvalidConfig);
    cfg = SceneConfig{};
    cfg.avatar_points = 8; // below n_parts
    CHECK_THROWS_AS(generate_scene(cfg, 0), InvalidConfig);
}

TEST_CASE("scene bounds cover every observed point with padding") {
    SceneConfig cfg;
    const SyntheticScene scene = generate_scene(cfg, 17);
    const auto [lo, hi] = scene.bounds();
    for (const auto& frame : scene.obs_human_points)
        for (const Vec3& p : frame) {
            CHECK(p.x > lo.x);
            CHECK(p.x < hi.x);
            CHECK(p.y > lo.y);
            CHECK(p.y < hi.y);
            CHECK(p.z > lo.z);
            CHECK(p.z < hi.z);
        }
}
