#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stentx/pullback.hpp"

namespace stentx::region {

struct Pixel {
    int x = 0;
    int y = 0;
    bool operator==(const Pixel&) const = default;
};

using PixelList = std::vector<Pixel>;

/// All pixels carrying `label`, in raster order.
PixelList pixels_with(const FrameMask& mask, Label label);

/// 8-connected components of `label`, largest first (ties: earliest in raster order).
std::vector<PixelList> components(const FrameMask& mask, Label label);

/// Centroid and normalized second central moments, including the 1/12
/// variance of a unit pixel so single pixels have non-zero extent.
struct Moments {
    double cx = 0, cy = 0;
    double uxx = 0, uyy = 0, uxy = 0;
};
Moments moments(std::span<const Pixel> px);

/// Axes (pixel units) of the ellipse with the same second moments.
struct EllipseFit {
    double major = 0;
    double minor = 0;
    double eccentricity = 0;
};
EllipseFit ellipse_fit(const Moments& m);

struct BoundingBox {
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    std::int64_t area() const {
        return static_cast<std::int64_t>(max_x - min_x + 1) * static_cast<std::int64_t>(max_y - min_y + 1);
    }
};
BoundingBox bounding_box(std::span<const Pixel> px);

/// Convex hull of pixel centers, counter-clockwise, collinear points removed.
PixelList convex_hull(PixelList pts);

/// Number of lattice points inside or on a hull from convex_hull (Pick's theorem).
std::int64_t hull_lattice_count(std::span<const Pixel> hull);

/// Outer-boundary length (pixel units) of one 8-connected component:
/// Moore-neighbor trace, chain measured with corner-count weights.
/// A single pixel has perimeter 4.
double traced_perimeter(std::span<const Pixel> component);

/// Freeman chain code (0=W,1=NW,2=N,...,7=SW with y down) of the outer boundary.
std::vector<int> boundary_chain(std::span<const Pixel> component);

}  // namespace stentx::region
