#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "hoigs/common.hpp"

namespace hoigs::ad {

// Reverse-mode tape over scalars. Every recorded node keeps at most two
// parents together with the local partial derivatives, so backward is a
// single reverse sweep with no virtual dispatch.
class Tape {
public:
    struct Node {
        int a;
        int b;
        double da;
        double db;
    };

    int leaf(double v) {
        nodes_.push_back({-1, -1, 0.0, 0.0});
        vals_.push_back(v);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int push1(double v, int a, double da) {
        nodes_.push_back({a, -1, da, 0.0});
        vals_.push_back(v);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int push2(double v, int a, double da, int b, double db) {
        nodes_.push_back({a, b, da, db});
        vals_.push_back(v);
        return static_cast<int>(nodes_.size()) - 1;
    }

    double value(int i) const { return vals_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and accumulates adjoints for every node.
    void backward(int loss) {
        if (loss < 0 || loss >= static_cast<int>(nodes_.size()))
            throw NotScalarLoss("backward: loss node not on this tape");
        grads_.assign(nodes_.size(), 0.0);
        grads_[static_cast<std::size_t>(loss)] = 1.0;
        for (int i = loss; i >= 0; --i) {
            const double g = grads_[static_cast<std::size_t>(i)];
            if (g == 0.0) continue;
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.a >= 0) grads_[static_cast<std::size_t>(n.a)] += n.da * g;
            if (n.b >= 0) grads_[static_cast<std::size_t>(n.b)] += n.db * g;
        }
    }

    double grad(int i) const { return grads_[static_cast<std::size_t>(i)]; }

    void clear() {
        nodes_.clear();
        vals_.clear();
        grads_.clear();
    }

    // Rolls the tape back to `mark` nodes; leaves recorded earlier survive.
    void truncate(std::size_t mark) {
        nodes_.resize(mark);
        vals_.resize(mark);
    }

private:
    std::vector<Node> nodes_;
    std::vector<double> vals_;
    std::vector<double> grads_;
};

// Handle to a tape node. Copying is cheap; the value is mirrored locally so
// arithmetic does not need to chase the tape for operands. A Var constructed
// from a bare double is a detached constant: it participates in arithmetic
// but records nothing and receives no gradient.
struct Var {
    Tape* tape = nullptr;
    int idx = -1;
    double v = 0.0;

    Var() = default;
    Var(double value) : v(value) {} // constant
    Var(Tape& t, double value) : tape(&t), idx(t.leaf(value)), v(value) {}
    Var(Tape* t, int i, double value) : tape(t), idx(i), v(value) {}

    double value() const { return v; }
    double grad() const { return tape ? tape->grad(idx) : 0.0; }
};

inline Var make_leaf(Tape& t, double v) { return Var(t, v); }

namespace detail {
inline Var binary(const Var& a, const Var& b, double v, double da, double db) {
    Tape* t = a.tape ? a.tape : b.tape;
    if (!t) return Var(v);
    int i;
    if (a.tape && b.tape)
        i = t->push2(v, a.idx, da, b.idx, db);
    else if (a.tape)
        i = t->push1(v, a.idx, da);
    else
        i = t->push1(v, b.idx, db);
    return {t, i, v};
}
inline Var unary(const Var& a, double v, double da) {
    if (!a.tape) return Var(v);
    return {a.tape, a.tape->push1(v, a.idx, da), v};
}
} // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    return detail::binary(a, b, a.v + b.v, 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
    return detail::binary(a, b, a.v - b.v, 1.0, -1.0);
}
inline Var operator-(const Var& a) { return detail::unary(a, -a.v, -1.0); }
inline Var operator*(const Var& a, const Var& b) {
    return detail::binary(a, b, a.v * b.v, b.v, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
    const double inv = 1.0 / b.v;
    return detail::binary(a, b, a.v * inv, inv, -a.v * inv * inv);
}

inline Var& operator+=(Var& a, const Var& b) { a = a + b; return a; }
inline Var& operator-=(Var& a, const Var& b) { a = a - b; return a; }
inline Var& operator*=(Var& a, const Var& b) { a = a * b; return a; }

inline Var exp(const Var& a) {
    const double e = std::exp(a.v);
    return detail::unary(a, e, e);
}
inline Var log(const Var& a) { return detail::unary(a, std::log(a.v), 1.0 / a.v); }
inline Var sqrt(const Var& a) {
    const double s = std::sqrt(a.v);
    return detail::unary(a, s, 0.5 / s);
}
inline Var sin(const Var& a) { return detail::unary(a, std::sin(a.v), std::cos(a.v)); }
inline Var cos(const Var& a) { return detail::unary(a, std::cos(a.v), -std::sin(a.v)); }
inline Var tanh(const Var& a) {
    const double t = std::tanh(a.v);
    return detail::unary(a, t, 1.0 - t * t);
}
inline Var relu(const Var& a) {
    return detail::unary(a, a.v > 0.0 ? a.v : 0.0, a.v > 0.0 ? 1.0 : 0.0);
}
inline Var sigmoid(const Var& a) {
    const double s = 1.0 / (1.0 + std::exp(-a.v));
    return detail::unary(a, s, s * (1.0 - s));
}

// Plain-double counterparts so templated numeric code compiles for both
// scalar types via unqualified calls.
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

// Max over parameters of |analytic - central difference| / max(1, |central|).
// `f` rebuilds the scalar loss from leaf variables each call, so the same
// functor serves both the analytic and the perturbed numeric evaluations.
inline double grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& f,
    const std::vector<double>& params, double eps = 1e-5) {
    // analytic pass
    std::vector<double> analytic(params.size());
    {
        Tape tape;
        std::vector<Var> xs;
        xs.reserve(params.size());
        for (double p : params) xs.emplace_back(tape, p);
        Var loss = f(tape, xs);
        if (!std::isfinite(loss.v)) throw NonFiniteValue("grad_check: loss not finite");
        tape.backward(loss.idx);
        for (std::size_t i = 0; i < params.size(); ++i)
            analytic[i] = xs[i].grad();
    }
    // central differences
    double max_err = 0.0;
    std::vector<double> work = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = work[i];
        auto eval = [&](double x) {
            work[i] = x;
            Tape tape;
            std::vector<Var> xs;
            xs.reserve(work.size());
            for (double p : work) xs.emplace_back(tape, p);
            const double v = f(tape, xs).v;
            if (!std::isfinite(v)) throw NonFiniteValue("grad_check: perturbed loss not finite");
            return v;
        };
        const double fp = eval(saved + eps);
        const double fm = eval(saved - eps);
        work[i] = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
        if (err > max_err) max_err = err;
    }
    return max_err;
}

} // namespace hoigs::ad
