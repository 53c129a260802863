#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hoigs/ad.hpp"
#include "hoigs/common.hpp"
#include "hoigs/geom.hpp"
#include "hoigs/nn.hpp"
#include "hoigs/skeleton.hpp"
#include "hoigs/spline.hpp"

namespace hoigs {

// Per-keyframe object motion features: velocity tangents plus a learnable
// 29-d embedding, interpolated over time and projected to 32 dims.
struct ObjectFeatureTrack {
    std::vector<Vec3> tau;                  // N_key x 3
    std::vector<std::vector<double>> embed; // N_key x 29
    Mlp head;                               // 33 -> hidden -> 32

    static constexpr int kEmbedDim = 29;
    static constexpr int kFeatureDim = 32;

    void validate(const TimeGrid& grid) const {
        const auto nk = static_cast<std::size_t>(grid.n_keys);
        if (tau.size() != nk || embed.size() != nk)
            throw DimensionMismatch("ObjectFeatureTrack: keyframe array lengths disagree");
        for (const auto& e : embed)
            if (e.size() != kEmbedDim)
                throw DimensionMismatch("ObjectFeatureTrack: embedding must be 29-d");
        if (head.input_dim() != kEmbedDim + 4 || head.output_dim() != kFeatureDim)
            throw DimensionMismatch("ObjectFeatureTrack: head must map 33 -> 32");
    }
};

inline ObjectFeatureTrack make_object_feature_track(const TimeGrid& grid, Rng& rng,
                                                    int hidden = 64) {
    ObjectFeatureTrack tr;
    const auto nk = static_cast<std::size_t>(grid.n_keys);
    tr.tau.assign(nk, Vec3{});
    tr.embed.assign(nk, std::vector<double>(ObjectFeatureTrack::kEmbedDim));
    for (auto& e : tr.embed)
        for (double& v : e) v = rng.uniform(-0.1, 0.1);
    tr.head = make_mlp({ObjectFeatureTrack::kEmbedDim + 4, hidden,
                        ObjectFeatureTrack::kFeatureDim}, rng);
    return tr;
}

// f_o(t) = MLP([tau(t); e(t); t_n]); the 32 keyframe channels interpolate
// with the same Hermite segments as positions, tangents fixed to zero.
template <class T>
std::vector<T> object_feature(const std::vector<Vec3>& tau,
                              const std::vector<std::vector<double>>& embed,
                              const MlpT<T>& head, double t, const TimeGrid& grid) {
    const SegmentPos s = normalize_time(t, grid);
    const auto k = static_cast<std::size_t>(s.k);
    std::vector<T> input;
    input.reserve(static_cast<std::size_t>(head.input_dim()));
    const Vec3 tau_t = hermite3<double>(tau[k], Vec3{}, tau[k + 1], Vec3{}, s.tr);
    input.push_back(T(tau_t.x));
    input.push_back(T(tau_t.y));
    input.push_back(T(tau_t.z));
    for (std::size_t c = 0; c < embed[k].size(); ++c)
        input.push_back(T(hermite1<double>(embed[k][c], 0.0, embed[k + 1][c], 0.0, s.tr)));
    input.push_back(T(grid.normalized(t)));
    return head.forward(input);
}

inline std::vector<double> object_feature(const ObjectFeatureTrack& track, double t,
                                          const TimeGrid& grid) {
    track.validate(grid);
    return object_feature<double>(track.tau, track.embed, track.head, t, grid);
}

// Additive attention bias: column j is -inf for every human row iff object j
// lies at distance >= d_th from the pelvis.
struct DistanceMask {
    int m = 0, n = 0;
    std::vector<double> bias; // m x n, entries 0 or -inf

    double at(int i, int j) const {
        return bias[static_cast<std::size_t>(i * n + j)];
    }
    bool masked(int i, int j) const { return at(i, j) != 0.0; }
    bool column_masked(int j) const { return masked(0, j); }
};

inline DistanceMask distance_mask(const std::vector<Vec3>& object_centers,
                                  const Vec3& pelvis, double d_th, int m_tokens) {
    DistanceMask mask;
    mask.m = m_tokens;
    mask.n = static_cast<int>(object_centers.size());
    mask.bias.assign(static_cast<std::size_t>(mask.m) * mask.n, 0.0);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < mask.n; ++j) {
        const double dist = norm(object_centers[static_cast<std::size_t>(j)] - pelvis);
        if (dist >= d_th)
            for (int i = 0; i < mask.m; ++i)
                mask.bias[static_cast<std::size_t>(i * mask.n + j)] = kNegInf;
    }
    return mask;
}

// Distance-masked mutual cross-attention plus residual heads. Projections
// are row-major [in x out]; both entities project to a common width d.
//
// The human branch pairs Q_h with K_o but reads values from the human side,
// as the source equations write it; since the row-stochastic weights then
// collapse to a gate, that branch reduces to V_h for interacting rows and
// zero for fully masked ones. `conventional_values` switches to the usual
// cross-entity values instead.
template <class T>
struct HoiModuleT {
    int human_dim = 96;
    int object_dim = 32;
    int d = 32;
    std::vector<T> wh_q, wh_k, wh_v; // human_dim x d
    std::vector<T> wo_q, wo_k, wo_v; // object_dim x d
    MlpT<T> mlp_hum;                 // m_tokens*d -> partition.total()*3
    MlpT<T> mlp_obj;                 // d -> 3
    double d_th = 1.0;
    bool conventional_values = false;
};

using HoiModule = HoiModuleT<double>;

HoiModule make_hoi_module(int m_tokens, int delta_theta_joints, Rng& rng,
                          double d_th, int hidden = 64, bool zero_heads = true);

template <class T>
struct AttentionResult {
    std::vector<std::vector<T>> fh; // M x d
    std::vector<std::vector<T>> fo; // N x d
    std::vector<std::vector<T>> weights_h; // M x N softmax rows (masked = 0)
    std::vector<std::vector<T>> weights_o; // N x M
};

namespace detail {

template <class T>
std::vector<T> project_token(const std::vector<T>& f, const std::vector<T>& w,
                             int in, int out) {
    if (static_cast<int>(f.size()) != in)
        throw ShapeMismatch("mutual_attention: token width mismatch");
    std::vector<T> r(static_cast<std::size_t>(out), T(0.0));
    for (int i = 0; i < in; ++i)
        for (int o = 0; o < out; ++o)
            r[static_cast<std::size_t>(o)] +=
                f[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i * out + o)];
    return r;
}

template <class T>
T dot_tokens(const std::vector<T>& a, const std::vector<T>& b) {
    T acc(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace detail

template <class T>
AttentionResult<T> mutual_attention(const std::vector<std::vector<T>>& f_human,
                                    const std::vector<std::vector<T>>& f_object,
                                    const DistanceMask& mask,
                                    const HoiModuleT<T>& module) {
    using ad::exp;
    using std::exp;
    const int m = static_cast<int>(f_human.size());
    const int n = static_cast<int>(f_object.size());
    if (mask.m != m || mask.n != n)
        throw ShapeMismatch("mutual_attention: mask shape disagrees with token counts");
    const int d = module.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    std::vector<std::vector<T>> qh(static_cast<std::size_t>(m)), vh(static_cast<std::size_t>(m));
    std::vector<std::vector<T>> kh(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto& f = f_human[static_cast<std::size_t>(i)];
        qh[static_cast<std::size_t>(i)] = detail::project_token(f, module.wh_q, module.human_dim, d);
        kh[static_cast<std::size_t>(i)] = detail::project_token(f, module.wh_k, module.human_dim, d);
        vh[static_cast<std::size_t>(i)] = detail::project_token(f, module.wh_v, module.human_dim, d);
    }
    std::vector<std::vector<T>> qo(static_cast<std::size_t>(n)), ko(static_cast<std::size_t>(n));
    std::vector<std::vector<T>> vo(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const auto& f = f_object[static_cast<std::size_t>(j)];
        qo[static_cast<std::size_t>(j)] = detail::project_token(f, module.wo_q, module.object_dim, d);
        ko[static_cast<std::size_t>(j)] = detail::project_token(f, module.wo_k, module.object_dim, d);
        vo[static_cast<std::size_t>(j)] = detail::project_token(f, module.wo_v, module.object_dim, d);
    }

    AttentionResult<T> res;
    res.weights_h.assign(static_cast<std::size_t>(m),
                         std::vector<T>(static_cast<std::size_t>(n), T(0.0)));
    res.weights_o.assign(static_cast<std::size_t>(n),
                         std::vector<T>(static_cast<std::size_t>(m), T(0.0)));

    // human rows attend over object tokens
    for (int i = 0; i < m; ++i) {
        std::vector<int> live;
        for (int j = 0; j < n; ++j)
            if (!mask.masked(i, j)) live.push_back(j);
        std::vector<T> out(static_cast<std::size_t>(d), T(0.0));
        if (!live.empty()) {
            std::vector<T> logits;
            logits.reserve(live.size());
            double mx = -std::numeric_limits<double>::infinity();
            for (int j : live) {
                T l = detail::dot_tokens(qh[static_cast<std::size_t>(i)],
                                         ko[static_cast<std::size_t>(j)]) * inv_sqrt_d;
                mx = std::max(mx, ad::value_of(l));
                logits.push_back(l);
            }
            T denom(0.0);
            std::vector<T> num;
            num.reserve(live.size());
            for (auto& l : logits) {
                T e = exp(l - mx);
                denom += e;
                num.push_back(e);
            }
            T gate(0.0);
            for (std::size_t a = 0; a < live.size(); ++a) {
                const T w = num[a] / denom;
                res.weights_h[static_cast<std::size_t>(i)]
                             [static_cast<std::size_t>(live[a])] = w;
                gate += w;
                if (module.conventional_values)
                    for (int c = 0; c < d; ++c)
                        out[static_cast<std::size_t>(c)] +=
                            w * vo[static_cast<std::size_t>(live[a])][static_cast<std::size_t>(c)];
            }
            if (!module.conventional_values)
                for (int c = 0; c < d; ++c)
                    out[static_cast<std::size_t>(c)] =
                        gate * vh[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        }
        res.fh.push_back(std::move(out));
    }

    // object rows attend over human tokens, bias transposed
    for (int j = 0; j < n; ++j) {
        std::vector<T> out(static_cast<std::size_t>(d), T(0.0));
        if (!mask.column_masked(j)) {
            std::vector<T> logits;
            logits.reserve(static_cast<std::size_t>(m));
            double mx = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                T l = detail::dot_tokens(qo[static_cast<std::size_t>(j)],
                                         kh[static_cast<std::size_t>(i)]) * inv_sqrt_d;
                mx = std::max(mx, ad::value_of(l));
                logits.push_back(l);
            }
            T denom(0.0);
            std::vector<T> num;
            num.reserve(logits.size());
            for (auto& l : logits) {
                T e = exp(l - mx);
                denom += e;
                num.push_back(e);
            }
            T gate(0.0);
            for (int i = 0; i < m; ++i) {
                const T w = num[static_cast<std::size_t>(i)] / denom;
                res.weights_o[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = w;
                gate += w;
                if (module.conventional_values)
                    for (int c = 0; c < d; ++c)
                        out[static_cast<std::size_t>(c)] +=
                            w * vh[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            }
            if (!module.conventional_values)
                for (int c = 0; c < d; ++c)
                    out[static_cast<std::size_t>(c)] =
                        gate * vo[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
        }
        res.fo.push_back(std::move(out));
    }
    return res;
}

template <class T>
struct RefineResultT {
    PoseVec<T> theta_final;
    PoseVec<T> delta_theta;
    std::vector<Vec3T<T>> human_points;
    std::vector<Vec3T<T>> delta_g;          // per object token
    std::vector<Vec3T<T>> object_positions; // baseline + delta
};

using RefineResult = RefineResultT<double>;

// delta_theta = MLP_hum(flattened F'_h) scattered over the skeleton's
// partition; delta_g per token = MLP_obj(F'_o row); final outputs re-run LBS
// with theta + delta_theta and shift the baseline object positions.
template <class T>
RefineResultT<T> regress_and_apply(const std::vector<std::vector<T>>& fh,
                                   const std::vector<std::vector<T>>& fo,
                                   const HoiModuleT<T>& module, const AvatarRig& rig,
                                   const Skeleton& skel, const PoseParams& pose,
                                   const std::vector<Vec3>& object_baseline) {
    const PosePartition& part = skel.partition;
    if (module.mlp_hum.output_dim() != part.total() * 3)
        throw PartitionMismatch("regress_and_apply: MLP_hum width disagrees with pose partition");

    std::vector<T> flat;
    flat.reserve(fh.size() * static_cast<std::size_t>(module.d));
    for (const auto& row : fh) flat.insert(flat.end(), row.begin(), row.end());
    const std::vector<T> dtheta_flat = module.mlp_hum.forward(flat);

    RefineResultT<T> res;
    res.delta_theta.assign(static_cast<std::size_t>(skel.joints()),
                           Vec3T<T>{T(0.0), T(0.0), T(0.0)});
    std::size_t pos = 0;
    for (const auto* group : {&part.body, &part.lhand, &part.rhand}) {
        for (int j : *group) {
            res.delta_theta[static_cast<std::size_t>(j)] =
                Vec3T<T>{dtheta_flat[pos], dtheta_flat[pos + 1], dtheta_flat[pos + 2]};
            pos += 3;
        }
    }
    res.theta_final.reserve(static_cast<std::size_t>(skel.joints()));
    for (int j = 0; j < skel.joints(); ++j) {
        const Vec3& th = pose.theta[static_cast<std::size_t>(j)];
        const auto& dt = res.delta_theta[static_cast<std::size_t>(j)];
        res.theta_final.push_back(Vec3T<T>{th.x + dt.x, th.y + dt.y, th.z + dt.z});
    }

    const auto joint_tf = forward_kinematics<T>(skel, res.theta_final);
    std::vector<Vec3T<T>> pts;
    pts.reserve(rig.canonical_points.size());
    for (std::size_t i = 0; i < rig.canonical_points.size(); ++i) {
        Vec3 p = rig.canonical_points[i];
        if (!rig.attributes.offsets.empty()) p += rig.attributes.offsets[i];
        pts.push_back(Vec3T<T>{T(p.x), T(p.y), T(p.z)});
    }
    res.human_points = lbs_apply<T>(skel, joint_tf, pts, rig.weights, T(rig.alpha));

    if (object_baseline.size() != fo.size())
        throw ShapeMismatch("regress_and_apply: object token/baseline count mismatch");
    for (std::size_t j = 0; j < fo.size(); ++j) {
        const std::vector<T> dg = module.mlp_obj.forward(fo[j]);
        res.delta_g.push_back(Vec3T<T>{dg[0], dg[1], dg[2]});
        const Vec3& base = object_baseline[j];
        res.object_positions.push_back(Vec3T<T>{base.x + dg[0], base.y + dg[1],
                                                base.z + dg[2]});
    }
    return res;
}

// Parameter flattening for the optimizer (same layout as hoi_module_from_vars).
void hoi_collect(const HoiModule& m, std::vector<double>& out);
std::size_t hoi_param_count(const HoiModule& m);
void hoi_assign(HoiModule& m, const std::vector<double>& flat, std::size_t& pos);
HoiModuleT<ad::Var> hoi_module_from_vars(const HoiModule& shape,
                                         const std::vector<ad::Var>& flat,
                                         std::size_t& pos);

} // namespace hoigs
