#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "hoigs/ad.hpp"
#include "hoigs/common.hpp"
#include "hoigs/rng.hpp"

namespace hoigs {

// Dense row-major tensor; just shape + storage.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel()), 0.0);
    }

    long numel() const {
        long n = 1;
        for (int e : shape) n *= e;
        return n;
    }

    double& at(int i, int j) {
        return data[static_cast<std::size_t>(i * shape[1] + j)];
    }
    double at(int i, int j) const {
        return data[static_cast<std::size_t>(i * shape[1] + j)];
    }
};

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

template <class T>
T apply_activation(Activation act, const T& x) {
    using ad::relu;
    using ad::sigmoid;
    using std::tanh;
    using ad::tanh;
    switch (act) {
        case Activation::ReLU: return relu(x);
        case Activation::Tanh: return tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Identity: default: return x;
    }
}

// Fully connected net; hidden layers share one activation, output layer has
// its own (identity unless specified). Weights are row-major [out x in].
template <class T>
struct MlpT {
    std::vector<int> widths; // input, hidden..., output
    std::vector<std::vector<T>> weights;
    std::vector<std::vector<T>> biases;
    Activation hidden_act = Activation::ReLU;
    Activation output_act = Activation::Identity;

    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }

    std::vector<T> forward(const std::vector<T>& x) const {
        if (static_cast<int>(x.size()) != input_dim())
            throw DimensionMismatch("mlp_forward: input width mismatch");
        std::vector<T> cur = x;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const int in = widths[l];
            const int out = widths[l + 1];
            std::vector<T> next;
            next.reserve(static_cast<std::size_t>(out));
            const auto& w = weights[l];
            const auto& b = biases[l];
            const bool last = (l + 2 == widths.size());
            const Activation act = last ? output_act : hidden_act;
            for (int o = 0; o < out; ++o) {
                T acc = b[static_cast<std::size_t>(o)];
                for (int i = 0; i < in; ++i)
                    acc = acc + w[static_cast<std::size_t>(o * in + i)] * cur[static_cast<std::size_t>(i)];
                next.push_back(apply_activation(act, acc));
            }
            cur = std::move(next);
        }
        return cur;
    }
};

using Mlp = MlpT<double>;

// Uniform +-1/sqrt(fan_in) init, seeded.
inline Mlp make_mlp(const std::vector<int>& widths, Rng& rng,
                    Activation hidden = Activation::ReLU,
                    Activation output = Activation::Identity) {
    Mlp m;
    m.widths = widths;
    m.hidden_act = hidden;
    m.output_act = output;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int in = widths[l];
        const int out = widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(static_cast<std::size_t>(in * out));
        for (double& v : w) v = rng.uniform(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
    return m;
}

inline Mlp make_zero_mlp(const std::vector<int>& widths,
                         Activation hidden = Activation::ReLU,
                         Activation output = Activation::Identity) {
    Mlp m;
    m.widths = widths;
    m.hidden_act = hidden;
    m.output_act = output;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        m.weights.emplace_back(static_cast<std::size_t>(widths[l] * widths[l + 1]), 0.0);
        m.biases.emplace_back(static_cast<std::size_t>(widths[l + 1]), 0.0);
    }
    return m;
}

inline std::vector<double> mlp_forward(const Mlp& m, const std::vector<double>& x) {
    return m.forward(x);
}

// --- parameter flattening -------------------------------------------------

inline void mlp_collect(const Mlp& m, std::vector<double>& out) {
    for (const auto& w : m.weights) out.insert(out.end(), w.begin(), w.end());
    for (const auto& b : m.biases) out.insert(out.end(), b.begin(), b.end());
}

inline std::size_t mlp_param_count(const Mlp& m) {
    std::size_t n = 0;
    for (const auto& w : m.weights) n += w.size();
    for (const auto& b : m.biases) n += b.size();
    return n;
}

inline void mlp_assign(Mlp& m, const std::vector<double>& flat, std::size_t& pos) {
    for (auto& w : m.weights)
        for (double& v : w) v = flat[pos++];
    for (auto& b : m.biases)
        for (double& v : b) v = flat[pos++];
}

// Rebuilds the net on a tape from a flat slice of leaf vars (same layout as
// mlp_collect), so losses can differentiate through the weights.
inline MlpT<ad::Var> mlp_from_vars(const Mlp& shape, const std::vector<ad::Var>& flat,
                                   std::size_t& pos) {
    MlpT<ad::Var> m;
    m.widths = shape.widths;
    m.hidden_act = shape.hidden_act;
    m.output_act = shape.output_act;
    for (const auto& w : shape.weights) {
        std::vector<ad::Var> vs(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) vs[i] = flat[pos++];
        m.weights.push_back(std::move(vs));
    }
    for (const auto& b : shape.biases) {
        std::vector<ad::Var> vs(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) vs[i] = flat[pos++];
        m.biases.push_back(std::move(vs));
    }
    return m;
}

// Lift constants onto a tape (used when the net itself is not optimized but
// sits inside a differentiated pipeline).
inline MlpT<ad::Var> mlp_lift(const Mlp& src, ad::Tape& tape) {
    MlpT<ad::Var> m;
    m.widths = src.widths;
    m.hidden_act = src.hidden_act;
    m.output_act = src.output_act;
    for (const auto& w : src.weights) {
        std::vector<ad::Var> vs;
        vs.reserve(w.size());
        for (double v : w) vs.emplace_back(tape, v);
        m.weights.push_back(std::move(vs));
    }
    for (const auto& b : src.biases) {
        std::vector<ad::Var> vs;
        vs.reserve(b.size());
        for (double v : b) vs.emplace_back(tape, v);
        m.biases.push_back(std::move(vs));
    }
    return m;
}

// --- optimizers -------------------------------------------------------------

// Plain gradient descent with a fixed step.
struct GradientDescent {
    double step = 1e-2;

    void update(std::vector<double>& params, const std::vector<double>& grads) {
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= step * grads[i];
    }
};

// Adaptive-moment variant (standard first/second moment estimates with bias
// correction).
struct Adam {
    double step = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<double> m_, v_;
    long t_ = 0;

    void update(std::vector<double>& params, const std::vector<double>& grads) {
        if (m_.size() != params.size()) {
            m_.assign(params.size(), 0.0);
            v_.assign(params.size(), 0.0);
            t_ = 0;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * grads[i];
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * grads[i] * grads[i];
            params[i] -= step * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }
};

} // namespace hoigs
