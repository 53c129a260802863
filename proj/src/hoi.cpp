#include "hoigs/hoi.hpp"

namespace hoigs {

HoiModule make_hoi_module(int m_tokens, int delta_theta_joints, Rng& rng, double d_th,
                          int hidden, bool zero_heads) {
    HoiModule m;
    m.d_th = d_th;
    auto init = [&](int in, int out) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(static_cast<std::size_t>(in * out));
        for (double& v : w) v = rng.uniform(-bound, bound);
        return w;
    };
    m.wh_q = init(m.human_dim, m.d);
    m.wh_k = init(m.human_dim, m.d);
    m.wh_v = init(m.human_dim, m.d);
    m.wo_q = init(m.object_dim, m.d);
    m.wo_k = init(m.object_dim, m.d);
    m.wo_v = init(m.object_dim, m.d);
    const std::vector<int> hum_widths = {m_tokens * m.d, hidden, delta_theta_joints * 3};
    const std::vector<int> obj_widths = {m.d, hidden, 3};
    if (zero_heads) {
        // hidden layers random so gradients flow, output layers zero so the
        // module starts as an exact identity residual
        m.mlp_hum = make_mlp(hum_widths, rng);
        m.mlp_obj = make_mlp(obj_widths, rng);
        for (double& v : m.mlp_hum.weights.back()) v = 0.0;
        for (double& v : m.mlp_hum.biases.back()) v = 0.0;
        for (double& v : m.mlp_obj.weights.back()) v = 0.0;
        for (double& v : m.mlp_obj.biases.back()) v = 0.0;
    } else {
        m.mlp_hum = make_mlp(hum_widths, rng);
        m.mlp_obj = make_mlp(obj_widths, rng);
    }
    return m;
}

void hoi_collect(const HoiModule& m, std::vector<double>& out) {
    for (const auto* w : {&m.wh_q, &m.wh_k, &m.wh_v, &m.wo_q, &m.wo_k, &m.wo_v})
        out.insert(out.end(), w->begin(), w->end());
    mlp_collect(m.mlp_hum, out);
    mlp_collect(m.mlp_obj, out);
}

std::size_t hoi_param_count(const HoiModule& m) {
    std::size_t n = m.wh_q.size() * 3 + m.wo_q.size() * 3;
    return n + mlp_param_count(m.mlp_hum) + mlp_param_count(m.mlp_obj);
}

void hoi_assign(HoiModule& m, const std::vector<double>& flat, std::size_t& pos) {
    for (auto* w : {&m.wh_q, &m.wh_k, &m.wh_v, &m.wo_q, &m.wo_k, &m.wo_v})
        for (double& v : *w) v = flat[pos++];
    mlp_assign(m.mlp_hum, flat, pos);
    mlp_assign(m.mlp_obj, flat, pos);
}

HoiModuleT<ad::Var> hoi_module_from_vars(const HoiModule& shape,
                                         const std::vector<ad::Var>& flat,
                                         std::size_t& pos) {
    HoiModuleT<ad::Var> m;
    m.human_dim = shape.human_dim;
    m.object_dim = shape.object_dim;
    m.d = shape.d;
    m.d_th = shape.d_th;
    m.conventional_values = shape.conventional_values;
    auto take = [&](const std::vector<double>& src) {
        std::vector<ad::Var> vs(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) vs[i] = flat[pos++];
        return vs;
    };
    m.wh_q = take(shape.wh_q);
    m.wh_k = take(shape.wh_k);
    m.wh_v = take(shape.wh_v);
    m.wo_q = take(shape.wo_q);
    m.wo_k = take(shape.wo_k);
    m.wo_v = take(shape.wo_v);
    m.mlp_hum = mlp_from_vars(shape.mlp_hum, flat, pos);
    m.mlp_obj = mlp_from_vars(shape.mlp_obj, flat, pos);
    return m;
}

} // namespace hoigs
