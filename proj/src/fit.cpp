#include "hoigs/fit.hpp"

#include <algorithm>
#include <cmath>

#include "hoigs/metrics.hpp"
#include "hoigs/rng.hpp"

namespace hoigs {

namespace {

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c{};
    for (const Vec3& p : pts) c += p;
    return c * (1.0 / static_cast<double>(pts.size()));
}

void check_finite(double loss) {
    if (!std::isfinite(loss)) throw DivergedLoss("loss became non-finite");
}

} // namespace

ObjectFitResult fit_object_track(const std::vector<std::vector<Vec3>>& observations,
                                 const TimeGrid& grid, const FitOptions& options) {
    grid.validate();
    if (static_cast<int>(observations.size()) != grid.n_frames)
        throw InsufficientData("fit_object_track: one observation per frame required");
    if (grid.n_frames < grid.n_keys)
        throw InsufficientData("fit_object_track: fewer frames than keyframes");

    std::vector<Vec3> centroids;
    centroids.reserve(observations.size());
    for (const auto& pts : observations) {
        if (pts.empty()) throw InsufficientData("fit_object_track: empty frame");
        centroids.push_back(centroid(pts));
    }

    std::vector<int> train_frames;
    for (int t = 0; t < grid.n_frames; ++t)
        if (std::find(options.holdout_frames.begin(), options.holdout_frames.end(), t) ==
            options.holdout_frames.end())
            train_frames.push_back(t);
    if (train_frames.empty())
        throw InsufficientData("fit_object_track: every frame held out");

    // init: keyframe centroids, classical central-difference tangents
    const int nk = grid.n_keys;
    std::vector<Vec3> key_c(static_cast<std::size_t>(nk));
    for (int k = 0; k < nk; ++k) {
        const int t = std::min(k * grid.key_stride, grid.n_frames - 1);
        key_c[static_cast<std::size_t>(k)] = centroids[static_cast<std::size_t>(t)];
    }
    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(6 * nk));
    for (const Vec3& m : key_c) {
        params.push_back(m.x);
        params.push_back(m.y);
        params.push_back(m.z);
    }
    for (int k = 0; k < nk; ++k) {
        const Vec3& prev = key_c[static_cast<std::size_t>(std::max(0, k - 1))];
        const Vec3& next = key_c[static_cast<std::size_t>(std::min(nk - 1, k + 1))];
        const double scale = (k == 0 || k == nk - 1) ? 1.0 : 0.5;
        const Vec3 tau = (next - prev) * scale;
        params.push_back(tau.x);
        params.push_back(tau.y);
        params.push_back(tau.z);
    }

    ObjectFitResult result;
    Adam adam;
    adam.step = options.step;
    GradientDescent gd;
    gd.step = options.step;

    ad::Tape tape; // reused across iterations to avoid realloc churn
    for (int iter = 0; iter < options.iters; ++iter) {
        tape.clear();
        std::vector<ad::Var> vars;
        vars.reserve(params.size());
        for (double p : params) vars.emplace_back(tape, p);
        auto key_pos = [&](int k) {
            return Vec3T<ad::Var>{vars[static_cast<std::size_t>(3 * k)],
                                  vars[static_cast<std::size_t>(3 * k + 1)],
                                  vars[static_cast<std::size_t>(3 * k + 2)]};
        };
        auto key_tau = [&](int k) {
            const int base = 3 * nk + 3 * k;
            return Vec3T<ad::Var>{vars[static_cast<std::size_t>(base)],
                                  vars[static_cast<std::size_t>(base + 1)],
                                  vars[static_cast<std::size_t>(base + 2)]};
        };
        ad::Var loss(tape, 0.0);
        for (int t : train_frames) {
            const SegmentPos s = normalize_time(t, grid);
            const auto pos = hermite3<ad::Var>(key_pos(s.k), key_tau(s.k),
                                               key_pos(s.k + 1), key_tau(s.k + 1), s.tr);
            const Vec3& obs = centroids[static_cast<std::size_t>(t)];
            const auto dx = pos.x - obs.x;
            const auto dy = pos.y - obs.y;
            const auto dz = pos.z - obs.z;
            loss += dx * dx + dy * dy + dz * dz;
        }
        loss = loss * (1.0 / static_cast<double>(train_frames.size()));
        check_finite(loss.value());
        result.loss_trace.push_back(loss.value());
        tape.backward(loss.idx);
        std::vector<double> grads(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) grads[i] = vars[i].grad();
        if (options.use_adam)
            adam.update(params, grads);
        else
            gd.update(params, grads);
    }

    ChsTrack track = ChsTrack::zeros(grid);
    for (int k = 0; k < nk; ++k) {
        track.control_points[static_cast<std::size_t>(k)] =
            Vec3{params[static_cast<std::size_t>(3 * k)],
                 params[static_cast<std::size_t>(3 * k + 1)],
                 params[static_cast<std::size_t>(3 * k + 2)]};
        const int base = 3 * nk + 3 * k;
        track.velocities[static_cast<std::size_t>(k)] =
            Vec3{params[static_cast<std::size_t>(base)],
                 params[static_cast<std::size_t>(base + 1)],
                 params[static_cast<std::size_t>(base + 2)]};
    }
    result.track = std::move(track);
    return result;
}

namespace {

// Per-frame pose fit: theta minimizing |LBS(theta) - observation|^2.
PoseParams fit_frame_pose(const SyntheticScene& scene, const std::vector<Vec3>& obs,
                          const PoseParams& init, int iters, double step,
                          std::vector<double>* trace) {
    const Skeleton& skel = scene.skeleton;
    const int j_count = skel.joints();
    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(3 * j_count));
    for (const Vec3& th : init.theta) {
        params.push_back(th.x);
        params.push_back(th.y);
        params.push_back(th.z);
    }
    Adam adam;
    adam.step = step;
    ad::Tape tape;
    for (int iter = 0; iter < iters; ++iter) {
        tape.clear();
        std::vector<ad::Var> vars;
        vars.reserve(params.size());
        for (double p : params) vars.emplace_back(tape, p);
        PoseVec<ad::Var> theta(static_cast<std::size_t>(j_count));
        for (int j = 0; j < j_count; ++j)
            theta[static_cast<std::size_t>(j)] =
                Vec3T<ad::Var>{vars[static_cast<std::size_t>(3 * j)],
                               vars[static_cast<std::size_t>(3 * j + 1)],
                               vars[static_cast<std::size_t>(3 * j + 2)]};
        const auto tf = forward_kinematics<ad::Var>(skel, theta);
        std::vector<Vec3T<ad::Var>> pts;
        pts.reserve(scene.rig.canonical_points.size());
        for (const Vec3& p : scene.rig.canonical_points)
            pts.push_back(Vec3T<ad::Var>{ad::Var(p.x), ad::Var(p.y), ad::Var(p.z)});
        const auto deformed =
            lbs_apply<ad::Var>(skel, tf, pts, scene.rig.weights, ad::Var(scene.rig.alpha));
        ad::Var loss(tape, 0.0);
        for (std::size_t i = 0; i < deformed.size(); ++i) {
            const auto dx = deformed[i].x - obs[i].x;
            const auto dy = deformed[i].y - obs[i].y;
            const auto dz = deformed[i].z - obs[i].z;
            loss += dx * dx + dy * dy + dz * dz;
        }
        loss = loss * (1.0 / static_cast<double>(deformed.size()));
        check_finite(loss.value());
        if (trace) trace->push_back(loss.value());
        tape.backward(loss.idx);
        std::vector<double> grads(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) grads[i] = vars[i].grad();
        adam.update(params, grads);
    }
    PoseParams out = PoseParams::zeros(j_count);
    for (int j = 0; j < j_count; ++j)
        out.theta[static_cast<std::size_t>(j)] =
            Vec3{params[static_cast<std::size_t>(3 * j)],
                 params[static_cast<std::size_t>(3 * j + 1)],
                 params[static_cast<std::size_t>(3 * j + 2)]};
    return out;
}

PhaseMetrics compute_phase_metrics(const SyntheticScene& scene,
                                   const std::vector<std::vector<Vec3>>& human_points,
                                   const std::vector<Vec3>& object_positions) {
    PhaseMetrics m;
    double hsum = 0.0;
    long hcount = 0;
    double osum = 0.0;
    for (int t = 0; t < scene.grid.n_frames; ++t) {
        const auto gt_h = scene.gt_human_points(t);
        const auto& fit_h = human_points[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < gt_h.size(); ++i) {
            hsum += dist2(gt_h[i], fit_h[i]);
            ++hcount;
        }
        osum += dist2(scene.gt_object_position[static_cast<std::size_t>(t)],
                      object_positions[static_cast<std::size_t>(t)]);
    }
    m.human_rmse = std::sqrt(hsum / static_cast<double>(hcount));
    m.object_rmse = std::sqrt(osum / static_cast<double>(scene.grid.n_frames));

    const auto hands = hand_vertex_indices(scene.rig, scene.skeleton);
    double cd_sum = 0.0;
    for (int t : scene.contact_frames) {
        const auto& h = human_points[static_cast<std::size_t>(t)];
        std::vector<Vec3> left, right;
        for (int i : hands.first) left.push_back(h[static_cast<std::size_t>(i)]);
        for (int i : hands.second) right.push_back(h[static_cast<std::size_t>(i)]);
        std::vector<Vec3> obj;
        for (const Vec3& p : scene.object_cloud)
            obj.push_back(p + object_positions[static_cast<std::size_t>(t)]);
        cd_sum += cd_best(obj, left, right);
    }
    m.contact_cd_best = cd_sum / static_cast<double>(scene.contact_frames.size());
    return m;
}

} // namespace

JointFitResult fit_joint_hoi(const SyntheticScene& scene, const JointFitOptions& options) {
    const Skeleton& skel = scene.skeleton;
    const TimeGrid& grid = scene.grid;
    JointFitResult result;

    // ---- phase 1: entity-wise baselines ------------------------------------
    PoseParams warm = PoseParams::zeros(skel.joints());
    for (int t = 0; t < grid.n_frames; ++t) {
        warm = fit_frame_pose(scene, scene.obs_human_points[static_cast<std::size_t>(t)],
                              warm, options.pose_iters, options.pose_step,
                              &result.pose_loss_trace);
        result.poses.push_back(warm);
        result.human_points_phase1.push_back(lbs_deform(scene.rig, skel, warm));
    }

    FitOptions obj_opt;
    obj_opt.iters = options.object_iters;
    obj_opt.step = options.object_step;
    obj_opt.seed = options.seed;
    auto obj_fit = fit_object_track(scene.obs_object_points, grid, obj_opt);
    result.track = std::move(obj_fit.track);
    result.object_loss_trace = std::move(obj_fit.loss_trace);
    for (int t = 0; t < grid.n_frames; ++t)
        result.object_position_phase1.push_back(chs_eval(result.track, t, grid));

    result.phase1 = compute_phase_metrics(scene, result.human_points_phase1,
                                          result.object_position_phase1);

    // ---- phase 2: interaction refinement ------------------------------------
    Rng rng(options.seed + 0x9e3779b97f4a7c15ULL);
    const auto [lo, hi] = scene.bounds();
    result.feature_grid = make_hexplane(32, 16, lo, hi, rng);
    result.partition = scene.partition;
    result.d_th = skel.arm_length();

    result.object_features = make_object_feature_track(grid, rng);
    result.object_features.tau = result.track.velocities;

    result.module = make_hoi_module(scene.partition.n_parts(), skel.partition.total(),
                                    rng, result.d_th, 64, /*zero_heads=*/true);
    result.module.conventional_values = options.conventional_values;

    // precompute per-frame constants: human part tokens (from the phase-1
    // baseline), pelvis position, masks, object spline baseline
    const int nf = grid.n_frames;
    std::vector<std::vector<std::vector<double>>> tokens(static_cast<std::size_t>(nf));
    std::vector<DistanceMask> masks(static_cast<std::size_t>(nf));
    for (int t = 0; t < nf; ++t) {
        const auto st = static_cast<std::size_t>(t);
        tokens[st] = part_features(result.feature_grid, result.human_points_phase1[st],
                                   scene.partition, grid.normalized(t));
        const Vec3 pelvis = scene.pelvis_position(result.poses[st]);
        masks[st] = distance_mask({result.object_position_phase1[st]}, pelvis,
                                  result.d_th, scene.partition.n_parts());
    }

    std::vector<int> hoi_frames;
    for (std::size_t i = 0; i < scene.contact_frames.size();
         i += static_cast<std::size_t>(std::max(1, options.hoi_frame_stride)))
        hoi_frames.push_back(scene.contact_frames[i]);

    if (options.enable_hoi && options.hoi_iters > 0) {
        std::vector<double> params;
        hoi_collect(result.module, params);
        mlp_collect(result.object_features.head, params);
        const std::size_t n_module = hoi_param_count(result.module);

        Adam adam;
        adam.step = options.hoi_step;
        ad::Tape tape;
        for (int iter = 0; iter < options.hoi_iters; ++iter) {
            tape.clear();
            std::vector<ad::Var> vars;
            vars.reserve(params.size());
            for (double p : params) vars.emplace_back(tape, p);
            std::size_t pos = 0;
            const auto module_v = hoi_module_from_vars(result.module, vars, pos);
            const auto head_v = mlp_from_vars(result.object_features.head, vars, pos);

            ad::Var loss(tape, 0.0);
            long terms = 0;
            for (int t : hoi_frames) {
                const auto st = static_cast<std::size_t>(t);
                std::vector<std::vector<ad::Var>> fh;
                for (const auto& tok : tokens[st]) {
                    std::vector<ad::Var> row;
                    row.reserve(tok.size());
                    for (double v : tok) row.emplace_back(v); // constants
                    fh.push_back(std::move(row));
                }
                std::vector<std::vector<ad::Var>> fo;
                fo.push_back(object_feature<ad::Var>(result.object_features.tau,
                                                     result.object_features.embed, head_v,
                                                     t, grid));
                const auto attn = mutual_attention<ad::Var>(fh, fo, masks[st], module_v);
                const auto refined = regress_and_apply<ad::Var>(
                    attn.fh, attn.fo, module_v, scene.rig, skel, result.poses[st],
                    {result.object_position_phase1[st]});

                const auto& obs_h = scene.obs_human_points[st];
                for (std::size_t i = 0; i < refined.human_points.size(); ++i) {
                    const auto dx = refined.human_points[i].x - obs_h[i].x;
                    const auto dy = refined.human_points[i].y - obs_h[i].y;
                    const auto dz = refined.human_points[i].z - obs_h[i].z;
                    loss += dx * dx + dy * dy + dz * dz;
                    ++terms;
                }
                const Vec3 obs_c = centroid(scene.obs_object_points[st]);
                const auto dx = refined.object_positions[0].x - obs_c.x;
                const auto dy = refined.object_positions[0].y - obs_c.y;
                const auto dz = refined.object_positions[0].z - obs_c.z;
                // object centroid error weighted like a full point set
                const double w = static_cast<double>(scene.obs_human_points[st].size());
                loss += (dx * dx + dy * dy + dz * dz) * w;
                terms += static_cast<long>(w);
            }
            loss = loss * (1.0 / static_cast<double>(terms));
            check_finite(loss.value());
            result.hoi_loss_trace.push_back(loss.value());
            tape.backward(loss.idx);
            std::vector<double> grads(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) grads[i] = vars[i].grad();
            adam.update(params, grads);
        }
        std::size_t pos = 0;
        hoi_assign(result.module, params, pos);
        (void)n_module;
        mlp_assign(result.object_features.head, params, pos);
    }

    // phase-2 outputs on every frame (double path; with zero heads this is
    // bit-identical to phase 1)
    for (int t = 0; t < nf; ++t) {
        const auto st = static_cast<std::size_t>(t);
        std::vector<std::vector<double>> fo;
        fo.push_back(object_feature(result.object_features, t, grid));
        const auto attn = mutual_attention<double>(tokens[st], fo, masks[st], result.module);
        const auto refined = regress_and_apply<double>(
            attn.fh, attn.fo, result.module, scene.rig, skel, result.poses[st],
            {result.object_position_phase1[st]});
        std::vector<Vec3> pts;
        pts.reserve(refined.human_points.size());
        for (const auto& p : refined.human_points) pts.push_back({p.x, p.y, p.z});
        result.human_points_phase2.push_back(std::move(pts));
        result.object_position_phase2.push_back({refined.object_positions[0].x,
                                                 refined.object_positions[0].y,
                                                 refined.object_positions[0].z});
    }
    result.phase2 = compute_phase_metrics(scene, result.human_points_phase2,
                                          result.object_position_phase2);
    return result;
}

} // namespace hoigs
