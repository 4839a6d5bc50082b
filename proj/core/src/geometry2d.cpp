#include "stentx/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "stentx/error.hpp"
#include "stentx/region.hpp"

namespace stentx {

namespace {

// Row extremes are sufficient to build the convex hull of a pixel set.
region::PixelList row_extremes(std::span<const region::Pixel> px) {
    std::map<int, std::pair<int, int>> rows;
    for (auto p : px) {
        auto [it, inserted] = rows.try_emplace(p.y, p.x, p.x);
        if (!inserted) {
            it->second.first = std::min(it->second.first, p.x);
            it->second.second = std::max(it->second.second, p.x);
        }
    }
    region::PixelList out;
    out.reserve(rows.size() * 2);
    for (auto [y, r] : rows) {
        out.push_back({r.first, y});
        if (r.second != r.first) out.push_back({r.second, y});
    }
    return out;
}

struct ShapeStats {
    double major = 0, minor = 0, eccentricity = 0, extent = 0, solidity = 0, perimeter = 0;
};

ShapeStats shape_of(std::span<const region::Pixel> px, std::span<const region::PixelList> parts) {
    ShapeStats s;
    const auto fit = region::ellipse_fit(region::moments(px));
    s.major = fit.major;
    s.minor = fit.minor;
    s.eccentricity = fit.eccentricity;
    const auto n = static_cast<double>(px.size());
    s.extent = n / static_cast<double>(region::bounding_box(px).area());
    const auto hull = region::convex_hull(row_extremes(px));
    s.solidity = n / static_cast<double>(region::hull_lattice_count(hull));
    for (const auto& c : parts) s.perimeter += region::traced_perimeter(c);
    return s;
}

double circularity(double area, double perimeter) {
    return perimeter > 0 ? 4.0 * std::numbers::pi * area / (perimeter * perimeter) : 0.0;
}

}  // namespace

LumenFrameFeatures compute_lumen_frame_features(const FrameMask& mask, double spacing, double reference_area,
                                                int frame_index) {
    if (!(reference_area > 0)) throw std::invalid_argument("reference area must be positive");
    const auto parts = region::components(mask, Label::lumen);
    if (parts.empty())
        throw DataError("frame " + std::to_string(frame_index) + " has an empty lumen",
                        frame_index >= 0 ? std::optional<int>(frame_index) : std::nullopt, "labels");

    region::PixelList all;
    for (const auto& c : parts) all.insert(all.end(), c.begin(), c.end());
    const auto shape = shape_of(all, parts);

    LumenFrameFeatures f;
    const double n = static_cast<double>(all.size());
    f.area_mm2 = n * spacing * spacing;
    f.pct_area_stenosis = (1.0 - f.area_mm2 / reference_area) * 100.0;
    f.major_axis_mm = shape.major * spacing;
    f.minor_axis_mm = shape.minor * spacing;
    f.perimeter_mm = shape.perimeter * spacing;
    f.extent = shape.extent;
    f.eccentricity = shape.eccentricity;
    f.solidity = shape.solidity;
    f.circularity = circularity(n, shape.perimeter);
    f.below_ref_050 = f.area_mm2 < 0.5 * reference_area;
    f.below_ref_070 = f.area_mm2 < 0.7 * reference_area;
    f.below_ref_090 = f.area_mm2 < 0.9 * reference_area;
    return f;
}

RayProfile cast_rays(const FrameMask& mask) {
    RayProfile prof;
    const auto m = region::moments(region::pixels_with(mask, Label::lumen));
    prof.origin_x = m.cx;
    prof.origin_y = m.cy;

    constexpr double kStep = 0.25;
    for (int k = 0; k < RayProfile::kRays; ++k) {
        const double a = k * std::numbers::pi / 180.0;
        const double dx = std::cos(a), dy = std::sin(a);
        double lumen_exit = -1, first_calc = -1, run_start = -1, best_run = 0;
        for (double t = 0;; t += kStep) {
            const auto x = static_cast<int>(std::lround(prof.origin_x + t * dx));
            const auto y = static_cast<int>(std::lround(prof.origin_y + t * dy));
            if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) break;
            const auto l = mask.at(x, y);
            if (lumen_exit < 0 && l != Label::lumen) lumen_exit = t;
            if (l == Label::calcification) {
                if (first_calc < 0) first_calc = t;
                if (run_start < 0) run_start = t;
                best_run = std::max(best_run, t - run_start + kStep);
            } else {
                run_start = -1;
            }
        }
        if (first_calc >= 0) {
            prof.hits[static_cast<std::size_t>(k)] = true;
            prof.thickness_px[static_cast<std::size_t>(k)] = best_run;
            prof.depth_px[static_cast<std::size_t>(k)] = std::max(0.0, first_calc - std::max(lumen_exit, 0.0));
        }
    }
    return prof;
}

int longest_circular_run(const std::array<bool, RayProfile::kRays>& hits) {
    constexpr int n = RayProfile::kRays;
    if (std::all_of(hits.begin(), hits.end(), [](bool b) { return b; })) return n;
    int best = 0, run = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (hits[static_cast<std::size_t>(i % n)]) {
            best = std::max(best, std::min(++run, n));
        } else {
            run = 0;
        }
    }
    return best;
}

CalcFrameFeatures compute_calc_frame_features(const FrameMask& mask, double spacing, int frame_index) {
    CalcFrameFeatures f;
    const auto parts = region::components(mask, Label::calcification);
    if (parts.empty()) return f;
    if (mask.count(Label::lumen) == 0)
        throw DataError("frame " + std::to_string(frame_index) + " has calcification but no lumen for ray casting",
                        frame_index >= 0 ? std::optional<int>(frame_index) : std::nullopt, "labels");

    std::size_t total = 0;
    for (const auto& c : parts) total += c.size();
    f.present = true;
    f.area_mm2 = static_cast<double>(total) * spacing * spacing;

    const auto rays = cast_rays(mask);
    f.max_arc_angle_deg = longest_circular_run(rays.hits);
    for (int k = 0; k < RayProfile::kRays; ++k) {
        if (!rays.hits[static_cast<std::size_t>(k)]) continue;
        f.max_thickness_mm = std::max(f.max_thickness_mm, rays.thickness_px[static_cast<std::size_t>(k)] * spacing);
        f.max_depth_mm = std::max(f.max_depth_mm, rays.depth_px[static_cast<std::size_t>(k)] * spacing);
    }

    const auto& largest = parts.front();
    const auto shape = shape_of(largest, std::span(&largest, 1));
    f.major_axis_mm = shape.major * spacing;
    f.minor_axis_mm = shape.minor * spacing;
    f.perimeter_mm = shape.perimeter * spacing;
    f.extent = shape.extent;
    f.eccentricity = shape.eccentricity;
    f.solidity = shape.solidity;
    f.circularity = circularity(static_cast<double>(largest.size()), shape.perimeter);
    f.stretch_ratio = shape.minor > 0 ? shape.major / shape.minor : 1.0;
    return f;
}

}  // namespace stentx
