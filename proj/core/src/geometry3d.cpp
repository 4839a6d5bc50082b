#include "stentx/geometry3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stentx/error.hpp"
#include "stentx/region.hpp"

namespace stentx {

double equivalent_diameter(double volume) { return std::cbrt(6.0 * volume / std::numbers::pi); }

namespace {

struct Voxel {
    int x, y, f;  // f is relative to the lesion start
};

struct VoxelStats {
    std::size_t count = 0;
    double extent = 0;
    double convex_volume = 0;
};

// Extent and prismatic convex volume of a voxel set.
VoxelStats voxel_stats(const std::vector<Voxel>& vox, double voxel_volume) {
    VoxelStats s;
    s.count = vox.size();
    if (vox.empty()) return s;
    int x0 = vox[0].x, x1 = x0, y0 = vox[0].y, y1 = y0, f0 = vox[0].f, f1 = f0;
    for (const auto& v : vox) {
        x0 = std::min(x0, v.x), x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
        f0 = std::min(f0, v.f), f1 = std::max(f1, v.f);
    }
    const double box = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1) * (f1 - f0 + 1);
    s.extent = static_cast<double>(vox.size()) / box;

    std::vector<region::PixelList> per_frame(static_cast<std::size_t>(f1 - f0 + 1));
    for (const auto& v : vox) per_frame[static_cast<std::size_t>(v.f - f0)].push_back({v.x, v.y});
    std::int64_t hull_px = 0;
    for (auto& px : per_frame)
        if (!px.empty()) hull_px += region::hull_lattice_count(region::convex_hull(std::move(px)));
    s.convex_volume = static_cast<double>(hull_px) * voxel_volume;
    return s;
}

// Exposed-face surface of all voxels labeled `label` inside the lesion.
double exposed_surface(const Pullback& p, Label label) {
    const double s = p.meta.pixel_spacing_mm, pitch = p.meta.frame_pitch_mm;
    const int ls = p.meta.lesion_start_frame, le = p.meta.lesion_end_frame;
    std::size_t side_faces = 0, cap_faces = 0;
    for (int f = ls; f <= le; ++f) {
        const auto& m = p.frames[static_cast<std::size_t>(f)];
        for (int y = 0; y < m.height(); ++y) {
            for (int x = 0; x < m.width(); ++x) {
                if (m.at(x, y) != label) continue;
                side_faces += !m.is(x - 1, y, label) + !m.is(x + 1, y, label) + !m.is(x, y - 1, label) +
                              !m.is(x, y + 1, label);
                cap_faces += !(f > ls && p.frames[static_cast<std::size_t>(f - 1)].at(x, y) == label);
                cap_faces += !(f < le && p.frames[static_cast<std::size_t>(f + 1)].at(x, y) == label);
            }
        }
    }
    return static_cast<double>(side_faces) * s * pitch + static_cast<double>(cap_faces) * s * s;
}

std::vector<Voxel> voxels_with(const Pullback& p, Label label) {
    std::vector<Voxel> out;
    for (int f = p.meta.lesion_start_frame; f <= p.meta.lesion_end_frame; ++f) {
        const auto& m = p.frames[static_cast<std::size_t>(f)];
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x)
                if (m.at(x, y) == label) out.push_back({x, y, f - p.meta.lesion_start_frame});
    }
    return out;
}

// 26-connected components of calcification voxels within the lesion.
std::vector<std::vector<Voxel>> deposit_components(const Pullback& p) {
    const int ls = p.meta.lesion_start_frame, le = p.meta.lesion_end_frame;
    const int w = p.frames.front().width(), h = p.frames.front().height();
    const int nf = le - ls + 1;
    auto idx = [&](int x, int y, int f) {
        return (static_cast<std::size_t>(f) * static_cast<std::size_t>(h) + static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(w) +
               static_cast<std::size_t>(x);
    };
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(nf) * static_cast<std::size_t>(w) *
                                       static_cast<std::size_t>(h),
                                   0);
    auto calc = [&](int x, int y, int f) {
        return x >= 0 && y >= 0 && f >= 0 && x < w && y < h && f < nf &&
               p.frames[static_cast<std::size_t>(f + ls)].at(x, y) == Label::calcification;
    };
    std::vector<std::vector<Voxel>> out;
    std::vector<Voxel> stack;
    for (int f = 0; f < nf; ++f) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!calc(x, y, f) || seen[idx(x, y, f)]) continue;
                out.emplace_back();
                seen[idx(x, y, f)] = 1;
                stack.push_back({x, y, f});
                while (!stack.empty()) {
                    const auto v = stack.back();
                    stack.pop_back();
                    out.back().push_back(v);
                    for (int df = -1; df <= 1; ++df)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const int nx = v.x + dx, ny = v.y + dy, nfr = v.f + df;
                                if (!calc(nx, ny, nfr) || seen[idx(nx, ny, nfr)]) continue;
                                seen[idx(nx, ny, nfr)] = 1;
                                stack.push_back({nx, ny, nfr});
                            }
                }
            }
        }
    }
    return out;
}

}  // namespace

LumenLesionFeatures compute_lumen_lesion_features(const Pullback& p) {
    validate_meta(p.meta);
    for (int f = p.meta.lesion_start_frame; f <= p.meta.lesion_end_frame; ++f)
        if (p.frames[static_cast<std::size_t>(f)].count(Label::lumen) == 0)
            throw DataError("frame " + std::to_string(f) + " inside the lesion has no lumen", f, "labels");

    const double voxel = p.meta.pixel_spacing_mm * p.meta.pixel_spacing_mm * p.meta.frame_pitch_mm;
    const auto stats = voxel_stats(voxels_with(p, Label::lumen), voxel);
    LumenLesionFeatures out;
    out.volume_mm3 = static_cast<double>(stats.count) * voxel;
    out.equivalent_diameter_mm = equivalent_diameter(out.volume_mm3);
    out.extent = stats.extent;
    out.convex_volume_mm3 = stats.convex_volume;
    out.solidity = out.volume_mm3 / out.convex_volume_mm3;
    out.surface_area_mm2 = exposed_surface(p, Label::lumen);
    return out;
}

std::vector<Deposit> find_deposits(const Pullback& p) {
    std::vector<Deposit> out;
    for (const auto& c : deposit_components(p)) {
        Deposit d{c.front().f, c.front().f, c.size()};
        for (const auto& v : c) {
            d.first_frame = std::min(d.first_frame, v.f);
            d.last_frame = std::max(d.last_frame, v.f);
        }
        d.first_frame += p.meta.lesion_start_frame;
        d.last_frame += p.meta.lesion_start_frame;
        out.push_back(d);
    }
    return out;
}

CalcLesionFeatures compute_calc_lesion_features(const Pullback& p) {
    validate_meta(p.meta);
    const double s = p.meta.pixel_spacing_mm, pitch = p.meta.frame_pitch_mm;
    const double voxel = s * s * pitch;
    const int ls = p.meta.lesion_start_frame, le = p.meta.lesion_end_frame;
    const int nf = le - ls + 1;

    CalcLesionFeatures out;
    int calc_frames = 0;
    for (int f = ls; f <= le; ++f) calc_frames += p.frames[static_cast<std::size_t>(f)].count(Label::calcification) > 0;
    out.calc_pct = 100.0 * calc_frames / nf;

    const auto deposits = deposit_components(p);
    out.num_deposits = static_cast<int>(deposits.size());
    if (deposits.empty()) return out;

    std::size_t total = 0;
    const std::vector<Voxel>* longest = nullptr;
    int longest_span = -1;
    for (const auto& d : deposits) {
        total += d.size();
        auto [lo, hi] = std::minmax_element(d.begin(), d.end(), [](const Voxel& a, const Voxel& b) { return a.f < b.f; });
        const int span = hi->f - lo->f + 1;
        if (span > longest_span || (span == longest_span && d.size() > longest->size())) {
            longest_span = span;
            longest = &d;
        }
    }
    out.volume_mm3 = static_cast<double>(total) * voxel;
    out.volume_index_mm3_per_mm = out.volume_mm3 / (nf * pitch);
    out.length_mm = longest_span * pitch;
    out.surface_area_mm2 = exposed_surface(p, Label::calcification);

    const auto stats = voxel_stats(*longest, voxel);
    const double longest_volume = static_cast<double>(stats.count) * voxel;
    out.equivalent_diameter_mm = equivalent_diameter(longest_volume);
    out.extent = stats.extent;
    out.convex_volume_mm3 = stats.convex_volume;
    out.solidity = longest_volume / stats.convex_volume;
    return out;
}

}  // namespace stentx
