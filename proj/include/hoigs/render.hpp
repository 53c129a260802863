#pragma once

#include <string>
#include <vector>

#include "hoigs/geom.hpp"
#include "hoigs/metrics.hpp"

namespace hoigs {

struct Splat {
    Vec3 position{};
    UnitRotation rotation;
    Vec3 scale{0.05, 0.05, 0.05};
    double opacity = 1.0;
    Vec3 color{1.0, 1.0, 1.0};
};

struct RenderOutput {
    Image rgb;   // w x h x 3
    Image depth; // w x h x 1, alpha-weighted mean depth, -1 where nothing hit
};

// Forward-only splat compositor: pinhole projection, stable (depth, id)
// front-to-back sort, isotropic 2D Gaussian footprints with radius
// mean(scale) * fx / depth. Splats behind the camera are skipped.
RenderOutput render_splats(const std::vector<Splat>& splats, const CameraPose& cam,
                           int width, int height, const Vec3& background = {0, 0, 0});

void write_ppm(const Image& rgb, const std::string& path);
// 16-bit PGM; depth normalized to [0, max positive depth], sentinel -> 0
void write_pgm16(const Image& depth, const std::string& path);

} // namespace hoigs
