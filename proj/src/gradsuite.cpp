#include "hoigs/gradsuite.hpp"

#include <cmath>

#include "hoigs/ad.hpp"
#include "hoigs/hexplane.hpp"
#include "hoigs/hoi.hpp"
#include "hoigs/rng.hpp"
#include "hoigs/skeleton.hpp"
#include "hoigs/spline.hpp"

namespace hoigs {

namespace {

using ad::Tape;
using ad::Var;

double suite_chs(std::uint64_t seed) {
    Rng rng(seed);
    const TimeGrid grid = TimeGrid::from_stride(9, 4); // 3 keys
    const int nk = grid.n_keys;
    std::vector<double> params;
    for (int i = 0; i < 6 * nk; ++i) params.push_back(rng.uniform(-1.0, 1.0));
    std::vector<Vec3> targets;
    for (int t = 0; t < grid.n_frames; ++t)
        targets.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0)});

    auto f = [&](Tape& tape, const std::vector<Var>& xs) {
        auto key = [&](int base, int k) {
            return Vec3T<Var>{xs[static_cast<std::size_t>(base + 3 * k)],
                              xs[static_cast<std::size_t>(base + 3 * k + 1)],
                              xs[static_cast<std::size_t>(base + 3 * k + 2)]};
        };
        Var loss(tape, 0.0);
        for (int t = 0; t < grid.n_frames; ++t) {
            const SegmentPos s = normalize_time(t, grid);
            const auto p = hermite3<Var>(key(0, s.k), key(3 * nk, s.k),
                                         key(0, s.k + 1), key(3 * nk, s.k + 1), s.tr);
            const Vec3& g = targets[static_cast<std::size_t>(t)];
            loss += (p.x - g.x) * (p.x - g.x) + (p.y - g.y) * (p.y - g.y) +
                    (p.z - g.z) * (p.z - g.z);
        }
        return loss;
    };
    return ad::grad_check(f, params);
}

double suite_lbs(std::uint64_t seed) {
    Rng rng(seed);
    const Skeleton skel = Skeleton::default_rig();
    const int j_count = skel.joints();
    const auto joints = skel.canonical_joint_positions();
    const int v_count = 12;

    std::vector<Vec3> canon;
    Tensor weights({v_count, j_count});
    for (int i = 0; i < v_count; ++i) {
        const Vec3 c = joints[static_cast<std::size_t>(i % j_count)];
        canon.push_back(c + Vec3{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                                 rng.uniform(-0.1, 0.1)});
        double sum = 0.0;
        for (int j = 0; j < j_count; ++j) {
            const double w = std::exp(rng.uniform(-1.0, 1.0));
            weights.at(i, j) = w;
            sum += w;
        }
        for (int j = 0; j < j_count; ++j) weights.at(i, j) /= sum;
    }
    std::vector<Vec3> targets;
    for (int i = 0; i < v_count; ++i)
        targets.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0)});

    // params: theta (J*3), alpha, dPc (V*3)
    std::vector<double> params;
    for (int i = 0; i < 3 * j_count; ++i) params.push_back(rng.uniform(-0.5, 0.5));
    params.push_back(1.0 + rng.uniform(-0.2, 0.2));
    for (int i = 0; i < 3 * v_count; ++i) params.push_back(rng.uniform(-0.05, 0.05));

    auto f = [&](Tape& tape, const std::vector<Var>& xs) {
        PoseVec<Var> theta(static_cast<std::size_t>(j_count));
        for (int j = 0; j < j_count; ++j)
            theta[static_cast<std::size_t>(j)] =
                Vec3T<Var>{xs[static_cast<std::size_t>(3 * j)],
                           xs[static_cast<std::size_t>(3 * j + 1)],
                           xs[static_cast<std::size_t>(3 * j + 2)]};
        const Var alpha = xs[static_cast<std::size_t>(3 * j_count)];
        const std::size_t dp0 = static_cast<std::size_t>(3 * j_count + 1);
        const auto tf = forward_kinematics<Var>(skel, theta);
        std::vector<Vec3T<Var>> pts;
        for (int i = 0; i < v_count; ++i) {
            const Vec3& p = canon[static_cast<std::size_t>(i)];
            pts.push_back(Vec3T<Var>{Var(p.x) + xs[dp0 + 3 * static_cast<std::size_t>(i)],
                                     Var(p.y) + xs[dp0 + 3 * static_cast<std::size_t>(i) + 1],
                                     Var(p.z) + xs[dp0 + 3 * static_cast<std::size_t>(i) + 2]});
        }
        const auto out = lbs_apply<Var>(skel, tf, pts, weights, alpha);
        Var loss(tape, 0.0);
        for (int i = 0; i < v_count; ++i) {
            const Vec3& g = targets[static_cast<std::size_t>(i)];
            const auto& p = out[static_cast<std::size_t>(i)];
            loss += (p.x - g.x) * (p.x - g.x) + (p.y - g.y) * (p.y - g.y) +
                    (p.z - g.z) * (p.z - g.z);
        }
        return loss;
    };
    return ad::grad_check(f, params);
}

double suite_hexplane(std::uint64_t seed) {
    Rng rng(seed);
    const int res = 4, channels = 2;
    const std::size_t plane_size = static_cast<std::size_t>(res) * res * channels;
    std::vector<double> params;
    for (std::size_t i = 0; i < 6 * plane_size; ++i) params.push_back(rng.uniform(-1.0, 1.0));

    std::vector<std::array<double, 4>> queries;
    for (int q = 0; q < 5; ++q)
        queries.push_back({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                           rng.uniform(-0.8, 0.8), rng.uniform(0.1, 0.9)});

    auto f = [&](Tape& tape, const std::vector<Var>& xs) {
        HexPlaneT<Var> grid;
        grid.res = res;
        grid.channels = channels;
        grid.lo = {-1, -1, -1};
        grid.hi = {1, 1, 1};
        std::size_t pos = 0;
        for (auto& plane : grid.planes) {
            plane.assign(plane_size, Var(0.0));
            for (auto& v : plane) v = xs[pos++];
        }
        Var loss(tape, 0.0);
        for (const auto& q : queries) {
            const auto feat = plane_query<Var>(grid, q[0], q[1], q[2], q[3]);
            for (const auto& v : feat) loss += v * v;
        }
        return loss;
    };
    return ad::grad_check(f, params);
}

double suite_attention(std::uint64_t seed) {
    Rng rng(seed);
    const Skeleton skel = Skeleton::default_rig();
    const int j_count = skel.joints();
    const auto joints = skel.canonical_joint_positions();

    HoiModule shape;
    shape.human_dim = 12;
    shape.object_dim = 6;
    shape.d = 4;
    shape.d_th = 1.0;
    const int m_tokens = 3, n_tokens = 2;
    auto rand_w = [&](int in, int out) {
        std::vector<double> w(static_cast<std::size_t>(in * out));
        for (double& v : w) v = rng.uniform(-0.5, 0.5);
        return w;
    };
    shape.wh_q = rand_w(shape.human_dim, shape.d);
    shape.wh_k = rand_w(shape.human_dim, shape.d);
    shape.wh_v = rand_w(shape.human_dim, shape.d);
    shape.wo_q = rand_w(shape.object_dim, shape.d);
    shape.wo_k = rand_w(shape.object_dim, shape.d);
    shape.wo_v = rand_w(shape.object_dim, shape.d);
    shape.mlp_hum = make_mlp({m_tokens * shape.d, 8, skel.partition.total() * 3}, rng);
    shape.mlp_obj = make_mlp({shape.d, 8, 3}, rng);

    // small rig, unmasked attention so every projection carries gradient
    const int v_count = 10;
    AvatarRig rig;
    rig.alpha = 1.0;
    rig.weights = Tensor({v_count, j_count});
    for (int i = 0; i < v_count; ++i) {
        const Vec3 c = joints[static_cast<std::size_t>(i % j_count)];
        rig.canonical_points.push_back(c + Vec3{rng.uniform(-0.05, 0.05),
                                                rng.uniform(-0.05, 0.05),
                                                rng.uniform(-0.05, 0.05)});
        double sum = 0.0;
        for (int j = 0; j < j_count; ++j) {
            const double w = std::exp(rng.uniform(-1.0, 1.0));
            rig.weights.at(i, j) = w;
            sum += w;
        }
        for (int j = 0; j < j_count; ++j) rig.weights.at(i, j) /= sum;
    }
    PoseParams pose = PoseParams::zeros(j_count);
    for (Vec3& th : pose.theta)
        th = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};

    std::vector<std::vector<double>> fh(static_cast<std::size_t>(m_tokens)),
        fo(static_cast<std::size_t>(n_tokens));
    for (auto& row : fh) {
        row.resize(static_cast<std::size_t>(shape.human_dim));
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
    }
    for (auto& row : fo) {
        row.resize(static_cast<std::size_t>(shape.object_dim));
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
    }
    const DistanceMask mask = distance_mask({Vec3{0.1, 0, 0}, Vec3{0, 0.1, 0}},
                                            Vec3{}, shape.d_th, m_tokens);
    const std::vector<Vec3> baseline = {Vec3{0.2, 0.9, 0.1}, Vec3{-0.1, 1.1, 0.0}};

    std::vector<double> params;
    hoi_collect(shape, params);

    auto f = [&](Tape& tape, const std::vector<Var>& xs) {
        std::size_t pos = 0;
        const auto module = hoi_module_from_vars(shape, xs, pos);
        std::vector<std::vector<Var>> fh_v, fo_v;
        for (const auto& row : fh) {
            std::vector<Var> r;
            for (double v : row) r.emplace_back(v);
            fh_v.push_back(std::move(r));
        }
        for (const auto& row : fo) {
            std::vector<Var> r;
            for (double v : row) r.emplace_back(v);
            fo_v.push_back(std::move(r));
        }
        const auto attn = mutual_attention<Var>(fh_v, fo_v, mask, module);
        const auto refined =
            regress_and_apply<Var>(attn.fh, attn.fo, module, rig, skel, pose, baseline);
        Var loss(tape, 0.0);
        for (const auto& p : refined.human_points)
            loss += p.x * p.x + p.y * p.y + p.z * p.z;
        for (const auto& p : refined.object_positions)
            loss += p.x * p.x + p.y * p.y + p.z * p.z;
        return loss;
    };
    return ad::grad_check(f, params);
}

} // namespace

std::vector<GradSuiteResult> run_grad_suites(const std::string& which,
                                             std::uint64_t seed) {
    std::vector<GradSuiteResult> out;
    auto want = [&](const std::string& name) { return which == "all" || which == name; };
    if (want("chs")) out.push_back({"chs", suite_chs(seed)});
    if (want("lbs")) out.push_back({"lbs", suite_lbs(seed + 1)});
    if (want("hexplane")) out.push_back({"hexplane", suite_hexplane(seed + 2)});
    if (want("attention")) out.push_back({"attention", suite_attention(seed + 3)});
    if (out.empty()) throw InvalidConfig("run_grad_suites: unknown suite " + which);
    return out;
}

} // namespace hoigs
