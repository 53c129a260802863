#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hoigs/hoi.hpp"
#include "hoigs/rng.hpp"

using namespace hoigs;

namespace {

// small module with explicit dims so hand cases stay readable
HoiModule tiny_module(Rng& rng, int human_dim, int object_dim, int d, int m_tokens,
                      int joints) {
    HoiModule m;
    m.human_dim = human_dim;
    m.object_dim = object_dim;
    m.d = d;
    m.d_th = 1.0;
    auto init = [&](int in, int out) {
        std::vector<double> w(static_cast<std::size_t>(in * out));
        for (double& v : w) v = rng.uniform(-0.5, 0.5);
        return w;
    };
    m.wh_q = init(human_dim, d);
    m.wh_k = init(human_dim, d);
    m.wh_v = init(human_dim, d);
    m.wo_q = init(object_dim, d);
    m.wo_k = init(object_dim, d);
    m.wo_v = init(object_dim, d);
    m.mlp_hum = make_mlp({m_tokens * d, 8, joints * 3}, rng);
    m.mlp_obj = make_mlp({d, 8, 3}, rng);
    return m;
}

std::vector<std::vector<double>> random_tokens(int count, int dim, Rng& rng) {
    std::vector<std::vector<double>> out;
    for (int i = 0; i < count; ++i) {
        std::vector<double> t(static_cast<std::size_t>(dim));
        for (double& v : t) v = rng.normal(0, 1);
        out.push_back(std::move(t));
    }
    return out;
}

DistanceMask open_mask(int m, int n) {
    DistanceMask mask;
    mask.m = m;
    mask.n = n;
    mask.bias.assign(static_cast<std::size_t>(m) * n, 0.0);
    return mask;
}

} // namespace

TEST_CASE("object_feature hand cases") {
    const TimeGrid g = TimeGrid::from_stride(9, 4);
    Rng rng(51);
    ObjectFeatureTrack tr = make_object_feature_track(g, rng);

    SUBCASE("zero head gives the zero feature") {
        tr.head = make_zero_mlp({33, 64, 32});
        const auto f = object_feature(tr, 3.0, g);
        REQUIRE(f.size() == 32);
        for (double v : f) CHECK(v == 0.0);
    }
    SUBCASE("keyframe evaluation feeds the stored tau and embedding") {
        // identity-like head: first three outputs copy tau
        tr.head = make_zero_mlp({33, 32});
        tr.head.weights[0][0 * 33 + 0] = 1.0;
        tr.head.weights[0][1 * 33 + 1] = 1.0;
        tr.head.weights[0][2 * 33 + 2] = 1.0;
        tr.tau[1] = Vec3{0.4, -0.6, 0.9};
        const auto f = object_feature(tr, 4.0, g); // keyframe 1
        CHECK(f[0] == 0.4);
        CHECK(f[1] == -0.6);
        CHECK(f[2] == 0.9);
    }
    SUBCASE("time channel varies between frames sharing keyframe data") {
        tr.head = make_zero_mlp({33, 32});
        tr.head.weights[0][32] = 1.0; // copy the t_n channel
        const auto fa = object_feature(tr, 1.0, g);
        const auto fb = object_feature(tr, 2.0, g);
        CHECK(fa[0] == doctest::Approx(1.0 / 8.0).epsilon(1e-12));
        CHECK(fb[0] == doctest::Approx(2.0 / 8.0).epsilon(1e-12));
    }
    SUBCASE("embedding interpolates with zero-tangent Hermite") {
        tr.head = make_zero_mlp({33, 32});
        tr.head.weights[0][3] = 1.0; // copy embedding channel 0
        tr.embed[0][0] = 0.0;
        tr.embed[1][0] = 1.0;
        const auto f = object_feature(tr, 2.0, g); // tr = 0.5 in segment 0
        CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("validation rejects a bad head width") {
        tr.head = make_zero_mlp({33, 31});
        CHECK_THROWS_AS(object_feature(tr, 0.0, g), DimensionMismatch);
    }
}

TEST_CASE("distance_mask thresholding") {
    const Vec3 pelvis{0, 1, 0};
    const std::vector<Vec3> centers = {{0, 1.4, 0}, {0, 3, 0}, {0.6, 1, 0}};
    const DistanceMask mask = distance_mask(centers, pelvis, 0.6, 2);
    // 0.4 away: live; 2.0 away: masked; exactly d_th: masked (>=)
    for (int i = 0; i < 2; ++i) {
        CHECK_FALSE(mask.masked(i, 0));
        CHECK(mask.masked(i, 1));
        CHECK(mask.masked(i, 2));
    }
    CHECK_FALSE(mask.column_masked(0));
    CHECK(mask.column_masked(1));
}

TEST_CASE("mutual attention") {
    Rng rng(52);
    const HoiModule mod = tiny_module(rng, 6, 4, 3, 2, 2);

    SUBCASE("single live pair returns the own-entity value row") {
        const auto fh = random_tokens(1, 6, rng);
        const auto fo = random_tokens(1, 4, rng);
        const auto res = mutual_attention(fh, fo, open_mask(1, 1), mod);
        const auto vh = detail::project_token(fh[0], mod.wh_v, 6, 3);
        const auto vo = detail::project_token(fo[0], mod.wo_v, 4, 3);
        CHECK(res.weights_h[0][0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.weights_o[0][0] == doctest::Approx(1.0).epsilon(1e-12));
        for (int c = 0; c < 3; ++c) {
            CHECK(res.fh[0][static_cast<std::size_t>(c)] ==
                  doctest::Approx(vh[static_cast<std::size_t>(c)]).epsilon(1e-12));
            CHECK(res.fo[0][static_cast<std::size_t>(c)] ==
                  doctest::Approx(vo[static_cast<std::size_t>(c)]).epsilon(1e-12));
        }
    }
    SUBCASE("unmasked rows sum to 1, masked entries are exactly zero") {
        const auto fh = random_tokens(4, 6, rng);
        const auto fo = random_tokens(3, 4, rng);
        DistanceMask mask = open_mask(4, 3);
        for (int i = 0; i < 4; ++i) // mask object column 1
            mask.bias[static_cast<std::size_t>(i * 3 + 1)] =
                -std::numeric_limits<double>::infinity();
        const auto res = mutual_attention(fh, fo, mask, mod);
        for (int i = 0; i < 4; ++i) {
            double sum = 0.0;
            for (int j = 0; j < 3; ++j) sum += res.weights_h[static_cast<std::size_t>(i)]
                                                            [static_cast<std::size_t>(j)];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(res.weights_h[static_cast<std::size_t>(i)][1] == 0.0);
        }
        // masked object token gets a zero output row
        for (int c = 0; c < 3; ++c) CHECK(res.fo[1][static_cast<std::size_t>(c)] == 0.0);
        double sum_o = 0.0;
        for (int i = 0; i < 4; ++i) sum_o += res.weights_o[0][static_cast<std::size_t>(i)];
        CHECK(sum_o == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("fully masked human rows return the zero vector") {
        const auto fh = random_tokens(2, 6, rng);
        const auto fo = random_tokens(2, 4, rng);
        DistanceMask mask = open_mask(2, 2);
        for (auto& b : mask.bias) b = -std::numeric_limits<double>::infinity();
        const auto res = mutual_attention(fh, fo, mask, mod);
        for (const auto& row : res.fh)
            for (double v : row) CHECK(v == 0.0);
        for (const auto& row : res.fo)
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("equal keys split the weights evenly") {
        const auto fh = random_tokens(1, 6, rng);
        auto fo = random_tokens(1, 4, rng);
        fo.push_back(fo[0]); // duplicate token, identical key
        const auto res = mutual_attention(fh, fo, open_mask(1, 2), mod);
        CHECK(res.weights_h[0][0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(res.weights_h[0][1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("conventional values mix the other entity's value rows") {
        HoiModule conv = mod;
        conv.conventional_values = true;
        const auto fh = random_tokens(2, 6, rng);
        const auto fo = random_tokens(2, 4, rng);
        const auto res = mutual_attention(fh, fo, open_mask(2, 2), conv);
        for (int i = 0; i < 2; ++i) {
            std::vector<double> expect(3, 0.0);
            for (int j = 0; j < 2; ++j) {
                const auto vo = detail::project_token(fo[static_cast<std::size_t>(j)],
                                                      conv.wo_v, 4, 3);
                for (int c = 0; c < 3; ++c)
                    expect[static_cast<std::size_t>(c)] +=
                        res.weights_h[static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(j)] *
                        vo[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < 3; ++c)
                CHECK(res.fh[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] ==
                      doctest::Approx(expect[static_cast<std::size_t>(c)]).epsilon(1e-12));
        }
    }
    SUBCASE("object token order only permutes the outputs") {
        const auto fh = random_tokens(2, 6, rng);
        auto fo = random_tokens(2, 4, rng);
        const auto res_a = mutual_attention(fh, fo, open_mask(2, 2), mod);
        std::swap(fo[0], fo[1]);
        const auto res_b = mutual_attention(fh, fo, open_mask(2, 2), mod);
        for (int i = 0; i < 2; ++i) {
            CHECK(res_a.weights_h[static_cast<std::size_t>(i)][0] ==
                  doctest::Approx(res_b.weights_h[static_cast<std::size_t>(i)][1])
                      .epsilon(1e-12));
            CHECK(res_a.weights_h[static_cast<std::size_t>(i)][1] ==
                  doctest::Approx(res_b.weights_h[static_cast<std::size_t>(i)][0])
                      .epsilon(1e-12));
        }
        for (int c = 0; c < 3; ++c)
            CHECK(res_a.fo[0][static_cast<std::size_t>(c)] ==
                  doctest::Approx(res_b.fo[1][static_cast<std::size_t>(c)]).epsilon(1e-12));
    }
    SUBCASE("mask shape mismatch throws") {
        const auto fh = random_tokens(2, 6, rng);
        const auto fo = random_tokens(2, 4, rng);
        CHECK_THROWS_AS(mutual_attention(fh, fo, open_mask(3, 2), mod), ShapeMismatch);
    }
}

TEST_CASE("regress_and_apply") {
    Rng rng(53);
    const Skeleton skel = Skeleton::default_rig();
    AvatarRig rig;
    const auto joints = skel.canonical_joint_positions();
    rig.weights = Tensor({10, skel.joints()});
    for (int i = 0; i < 10; ++i) {
        const int j = i % skel.joints();
        rig.canonical_points.push_back(joints[static_cast<std::size_t>(j)] +
                                       Vec3{rng.uniform(-0.05, 0.05),
                                            rng.uniform(-0.05, 0.05),
                                            rng.uniform(-0.05, 0.05)});
        for (int k = 0; k < skel.joints(); ++k) rig.weights.at(i, k) = 0.0;
        rig.weights.at(i, j) = 1.0;
    }
    rig.pose = PoseParams::zeros(skel.joints());

    PoseParams pose = PoseParams::zeros(skel.joints());
    pose.theta[4] = Vec3{0, 0, -0.8};
    const std::vector<Vec3> baseline = {{0.5, 1.2, 0.1}, {0.4, 1.1, 0.0}};

    SUBCASE("zero heads reproduce the baseline bitwise") {
        HoiModule mod = tiny_module(rng, 6, 4, 3, 2, skel.partition.total());
        for (double& v : mod.mlp_hum.weights.back()) v = 0.0;
        for (double& v : mod.mlp_hum.biases.back()) v = 0.0;
        for (double& v : mod.mlp_obj.weights.back()) v = 0.0;
        for (double& v : mod.mlp_obj.biases.back()) v = 0.0;
        const auto fh = random_tokens(2, 3, rng);
        const auto fo = random_tokens(2, 3, rng);
        const auto res = regress_and_apply<double>(fh, fo, mod, rig, skel, pose, baseline);
        const auto direct = lbs_deform(rig, skel, pose);
        for (std::size_t i = 0; i < direct.size(); ++i) {
            CHECK(res.human_points[i].x == direct[i].x);
            CHECK(res.human_points[i].y == direct[i].y);
            CHECK(res.human_points[i].z == direct[i].z);
        }
        for (std::size_t j = 0; j < baseline.size(); ++j) {
            CHECK(res.object_positions[j].x == baseline[j].x);
            CHECK(norm(res.delta_g[j]) == 0.0);
            CHECK(norm(res.delta_theta[j]) == 0.0);
        }
    }
    SUBCASE("a forced object head bias shifts every token by that amount") {
        HoiModule mod = tiny_module(rng, 6, 4, 3, 2, skel.partition.total());
        for (double& v : mod.mlp_obj.weights.back()) v = 0.0;
        mod.mlp_obj.biases.back() = {0.1, 0.0, -0.2};
        for (double& v : mod.mlp_hum.weights.back()) v = 0.0;
        for (double& v : mod.mlp_hum.biases.back()) v = 0.0;
        const auto fh = random_tokens(2, 3, rng);
        const auto fo = random_tokens(2, 3, rng);
        const auto res = regress_and_apply<double>(fh, fo, mod, rig, skel, pose, baseline);
        for (std::size_t j = 0; j < baseline.size(); ++j) {
            CHECK(res.object_positions[j].x ==
                  doctest::Approx(baseline[j].x + 0.1).epsilon(1e-15));
            CHECK(res.object_positions[j].z ==
                  doctest::Approx(baseline[j].z - 0.2).epsilon(1e-15));
        }
    }
    SUBCASE("pose head width must match the partition") {
        HoiModule mod = tiny_module(rng, 6, 4, 3, 2, skel.partition.total() + 1);
        const auto fh = random_tokens(2, 3, rng);
        const auto fo = random_tokens(2, 3, rng);
        CHECK_THROWS_AS(
            regress_and_apply<double>(fh, fo, mod, rig, skel, pose, baseline),
            PartitionMismatch);
    }
    SUBCASE("token and baseline counts must agree") {
        HoiModule mod = tiny_module(rng, 6, 4, 3, 2, skel.partition.total());
        const auto fh = random_tokens(2, 3, rng);
        const auto fo = random_tokens(3, 3, rng);
        CHECK_THROWS_AS(
            regress_and_apply<double>(fh, fo, mod, rig, skel, pose, baseline),
            ShapeMismatch);
    }
}

TEST_CASE("hoi module parameter flattening round-trips") {
    Rng rng(54);
    HoiModule m = make_hoi_module(16, 6, rng, 0.6, 8, false);
    std::vector<double> flat;
    hoi_collect(m, flat);
    CHECK(flat.size() == hoi_param_count(m));
    HoiModule copy = make_hoi_module(16, 6, rng, 0.6, 8, false);
    std::size_t pos = 0;
    hoi_assign(copy, flat, pos);
    CHECK(pos == flat.size());
    std::vector<double> flat2;
    hoi_collect(copy, flat2);
    CHECK(flat == flat2);
}
