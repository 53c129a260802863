#pragma once

#include <vector>

#include "hoigs/common.hpp"
#include "hoigs/geom.hpp"

namespace hoigs {

struct Image {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 or 3
    std::vector<double> data; // row-major, [0,1]

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

struct LossWeights {
    double human = 0.5;
    double object = 1.0;
    double scene = 0.25;
    double depth = 1.0;
};

// Mean absolute difference over all entries.
double l1_image(const Image& a, const Image& b);

// Same, averaged over the pixels where mask (single channel, same w/h) is
// nonzero.
double l1_image_masked(const Image& a, const Image& b, const Image& mask);

// (1 - mean SSIM)/2 with an 11x11 Gaussian window, sigma 1.5, standard
// stabilizers on unit dynamic range. Multi-channel images average over
// channels.
double dssim(const Image& a, const Image& b);

// 10*log10(1/MSE); identical images return +infinity (callers serializing to
// CSV print the sentinel string "inf").
double psnr(const Image& a, const Image& b);

// Symmetric bidirectional mean of squared nearest-neighbor distances.
double chamfer(const std::vector<Vec3>& set_o, const std::vector<Vec3>& set_h);

// min(chamfer(O, H_L), chamfer(O, H_R))
double cd_best(const std::vector<Vec3>& object_points, const std::vector<Vec3>& left_hand,
               const std::vector<Vec3>& right_hand);

// 0.8*L1 + 0.2*DSSIM, the per-term photometric mix for object/scene losses.
double photometric_mix(double l1, double dssim_value);

// Weighted sum of the four loss terms.
double total_loss(double l_human, double l_object, double l_scene, double l_depth,
                  const LossWeights& w);

} // namespace hoigs
