#include "hoigs/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace hoigs {

RenderOutput render_splats(const std::vector<Splat>& splats, const CameraPose& cam,
                           int width, int height, const Vec3& background) {
    RenderOutput out;
    out.rgb = Image(width, height, 3);
    out.depth = Image(width, height, 1, -1.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            out.rgb.at(x, y, 0) = background.x;
            out.rgb.at(x, y, 1) = background.y;
            out.rgb.at(x, y, 2) = background.z;
        }

    struct Projected {
        double u, v, z, radius;
        std::size_t id;
    };
    std::vector<Projected> proj;
    proj.reserve(splats.size());
    for (std::size_t i = 0; i < splats.size(); ++i) {
        const Splat& s = splats[i];
        const Vec3 pc = world_to_camera(s.position, cam);
        if (pc.z <= 1e-9) continue;
        const double u = cam.fx * pc.x / pc.z + cam.cx;
        const double v = cam.fy * pc.y / pc.z + cam.cy;
        const double mean_scale = (s.scale.x + s.scale.y + s.scale.z) / 3.0;
        const double radius = std::max(0.3, mean_scale * cam.fx / pc.z);
        proj.push_back({u, v, pc.z, radius, i});
    }
    std::sort(proj.begin(), proj.end(), [](const Projected& a, const Projected& b) {
        if (a.z != b.z) return a.z < b.z; // front first
        return a.id < b.id;               // stable tie-break by id
    });

    std::vector<double> transmittance(static_cast<std::size_t>(width) * height, 1.0);
    std::vector<double> depth_num(transmittance.size(), 0.0);
    std::vector<double> depth_den(transmittance.size(), 0.0);

    for (const Projected& p : proj) {
        const Splat& s = splats[p.id];
        const double cutoff = 3.0 * p.radius;
        const int x0 = std::max(0, static_cast<int>(std::floor(p.u - cutoff)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(p.u + cutoff)));
        const int y0 = std::max(0, static_cast<int>(std::floor(p.v - cutoff)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(p.v + cutoff)));
        const double inv2s2 = 1.0 / (2.0 * p.radius * p.radius);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - p.u;
                const double dy = y - p.v;
                const double r2 = dx * dx + dy * dy;
                if (r2 > cutoff * cutoff) continue;
                const double alpha =
                    std::min(0.999, s.opacity * std::exp(-r2 * inv2s2));
                if (alpha < 1e-4) continue;
                const std::size_t px = static_cast<std::size_t>(y) * width + x;
                const double w = transmittance[px] * alpha;
                // buffer starts at bg; bg + sum w*(c-bg) == sum w*c + T_final*bg
                out.rgb.at(x, y, 0) += w * (s.color.x - background.x);
                out.rgb.at(x, y, 1) += w * (s.color.y - background.y);
                out.rgb.at(x, y, 2) += w * (s.color.z - background.z);
                depth_num[px] += w * p.z;
                depth_den[px] += w;
                transmittance[px] *= (1.0 - alpha);
            }
        }
    }

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t px = static_cast<std::size_t>(y) * width + x;
            if (depth_den[px] > 0.0)
                out.depth.at(x, y, 0) = depth_num[px] / depth_den[px];
            for (int c = 0; c < 3; ++c)
                out.rgb.at(x, y, c) = std::clamp(out.rgb.at(x, y, c), 0.0, 1.0);
        }
    return out;
}

void write_ppm(const Image& rgb, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_ppm: cannot open " + path);
    f << "P6\n" << rgb.width << " " << rgb.height << "\n255\n";
    for (int y = 0; y < rgb.height; ++y)
        for (int x = 0; x < rgb.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(rgb.at(x, y, c), 0.0, 1.0);
                f.put(static_cast<char>(static_cast<int>(std::lround(v * 255.0))));
            }
}

void write_pgm16(const Image& depth, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_pgm16: cannot open " + path);
    double max_d = 0.0;
    for (double v : depth.data) max_d = std::max(max_d, v);
    if (max_d <= 0.0) max_d = 1.0;
    f << "P5\n" << depth.width << " " << depth.height << "\n65535\n";
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) {
            const double v = depth.at(x, y, 0);
            const std::uint16_t q =
                v < 0.0 ? 0
                        : static_cast<std::uint16_t>(std::lround(v / max_d * 65535.0));
            f.put(static_cast<char>(q >> 8));
            f.put(static_cast<char>(q & 0xff));
        }
}

} // namespace hoigs
