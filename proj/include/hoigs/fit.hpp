#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoigs/hexplane.hpp"
#include "hoigs/hoi.hpp"
#include "hoigs/spline.hpp"
#include "hoigs/synth.hpp"

namespace hoigs {

struct FitOptions {
    int iters = 2000;
    double step = 0.05;
    std::uint64_t seed = 0;
    bool use_adam = true;              // false: plain gradient descent
    std::vector<int> holdout_frames;   // excluded from the objective
};

struct ObjectFitResult {
    ChsTrack track;
    std::vector<double> loss_trace; // one entry per iteration
};

// Minimizes the mean squared 3D error between the spline and the per-frame
// observed centroids over the keyframe positions and velocity tangents.
ObjectFitResult fit_object_track(const std::vector<std::vector<Vec3>>& observations,
                                 const TimeGrid& grid, const FitOptions& options);

struct JointFitOptions {
    int pose_iters = 120;
    double pose_step = 0.05;
    int object_iters = 1200;
    double object_step = 0.05;
    int hoi_iters = 120;
    double hoi_step = 0.01;
    int hoi_frame_stride = 1; // subsampling of contact frames for phase 2
    bool enable_hoi = true;
    bool conventional_values = false;
    std::uint64_t seed = 0;
};

struct PhaseMetrics {
    double human_rmse = 0.0;     // vs ground truth points, all frames
    double object_rmse = 0.0;    // vs ground truth centroids, all frames
    double contact_cd_best = 0.0; // mean over contact frames
};

struct JointFitResult {
    std::vector<PoseParams> poses; // phase-1 baseline, per frame
    ChsTrack track;
    ObjectFeatureTrack object_features;
    HoiModule module;
    HexPlaneGrid feature_grid;
    PartPartition partition;
    double d_th = 0.0;

    PhaseMetrics phase1;
    PhaseMetrics phase2;
    std::vector<double> pose_loss_trace;
    std::vector<double> object_loss_trace;
    std::vector<double> hoi_loss_trace;

    std::vector<std::vector<Vec3>> human_points_phase1; // per frame
    std::vector<std::vector<Vec3>> human_points_phase2;
    std::vector<Vec3> object_position_phase1; // centroid per frame
    std::vector<Vec3> object_position_phase2;
};

// Two-phase schedule: entity-wise baselines first (per-frame LBS pose fit +
// object spline fit), then the interaction module's residual heads trained
// jointly against the 3D observations.
JointFitResult fit_joint_hoi(const SyntheticScene& scene, const JointFitOptions& options);

} // namespace hoigs
