#include "hoigs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hoigs {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kWindow);
    const int half = kWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - half;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// ssim over one channel; valid (fully inside) windows only
double ssim_channel(const Image& a, const Image& b, int c) {
    const auto kern = gaussian_kernel();
    const int half = kWindow / 2;
    double total = 0.0;
    long count = 0;
    for (int y = half; y < a.height - half; ++y) {
        for (int x = half; x < a.width - half; ++x) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int dy = -half; dy <= half; ++dy) {
                for (int dx = -half; dx <= half; ++dx) {
                    const double w = kern[static_cast<std::size_t>(dy + half)] *
                                     kern[static_cast<std::size_t>(dx + half)];
                    const double va = a.at(x + dx, y + dy, c);
                    const double vb = b.at(x + dx, y + dy, c);
                    mu_a += w * va;
                    mu_b += w * vb;
                    aa += w * va * va;
                    bb += w * vb * vb;
                    ab += w * va * vb;
                }
            }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double s = ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) /
                             ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            total += s;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace

double l1_image(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("l1_image: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        sum += std::abs(a.data[i] - b.data[i]);
    return sum / static_cast<double>(a.data.size());
}

double l1_image_masked(const Image& a, const Image& b, const Image& mask) {
    if (!a.same_shape(b) || mask.width != a.width || mask.height != a.height ||
        mask.channels != 1)
        throw ShapeMismatch("l1_image_masked: shape mismatch");
    double sum = 0.0;
    long count = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (mask.at(x, y, 0) == 0.0) continue;
            for (int c = 0; c < a.channels; ++c)
                sum += std::abs(a.at(x, y, c) - b.at(x, y, c));
            count += a.channels;
        }
    if (count == 0) return 0.0;
    return sum / static_cast<double>(count);
}

double dssim(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("dssim: shape mismatch");
    if (a.width < kWindow || a.height < kWindow)
        throw ImageTooSmall("dssim: image smaller than the 11x11 window");
    double mean = 0.0;
    for (int c = 0; c < a.channels; ++c)
        mean += ssim_channel(a, b, c);
    mean /= a.channels;
    return (1.0 - mean) / 2.0;
}

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double chamfer(const std::vector<Vec3>& set_o, const std::vector<Vec3>& set_h) {
    if (set_o.empty() || set_h.empty())
        throw EmptyPointSet("chamfer: empty point set");
    double sum_oh = 0.0;
    for (const Vec3& o : set_o) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& h : set_h) best = std::min(best, dist2(o, h));
        sum_oh += best;
    }
    double sum_ho = 0.0;
    for (const Vec3& h : set_h) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& o : set_o) best = std::min(best, dist2(h, o));
        sum_ho += best;
    }
    return 0.5 * (sum_oh / static_cast<double>(set_o.size()) +
                  sum_ho / static_cast<double>(set_h.size()));
}

double cd_best(const std::vector<Vec3>& object_points, const std::vector<Vec3>& left_hand,
               const std::vector<Vec3>& right_hand) {
    return std::min(chamfer(object_points, left_hand), chamfer(object_points, right_hand));
}

double photometric_mix(double l1, double dssim_value) {
    return 0.8 * l1 + 0.2 * dssim_value;
}

double total_loss(double l_human, double l_object, double l_scene, double l_depth,
                  const LossWeights& w) {
    for (double v : {l_human, l_object, l_scene, l_depth})
        if (!std::isfinite(v))
            throw NonFiniteValue("total_loss: non-finite term");
    return w.human * l_human + w.object * l_object + w.scene * l_scene +
           w.depth * l_depth;
}

} // namespace hoigs
