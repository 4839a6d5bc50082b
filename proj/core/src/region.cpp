#include "stentx/region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stentx::region {

PixelList pixels_with(const FrameMask& mask, Label label) {
    PixelList out;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y) == label) out.push_back({x, y});
    return out;
}

std::vector<PixelList> components(const FrameMask& mask, Label label) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::int32_t> comp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    std::vector<PixelList> out;
    std::vector<Pixel> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            if (mask.at(x, y) != label || comp[idx] >= 0) continue;
            const auto id = static_cast<std::int32_t>(out.size());
            out.emplace_back();
            comp[idx] = id;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const auto p = stack.back();
                stack.pop_back();
                out.back().push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if ((dx == 0 && dy == 0) || !mask.is(nx, ny, label)) continue;
                        const auto n = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                                       static_cast<std::size_t>(nx);
                        if (comp[n] >= 0) continue;
                        comp[n] = id;
                        stack.push_back({nx, ny});
                    }
                }
            }
        }
    }
    for (auto& c : out)
        std::sort(c.begin(), c.end(), [](Pixel a, Pixel b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    // components were discovered in raster order, so a stable sort keeps that tie order
    std::stable_sort(out.begin(), out.end(), [](const PixelList& a, const PixelList& b) { return a.size() > b.size(); });
    return out;
}

Moments moments(std::span<const Pixel> px) {
    Moments m;
    if (px.empty()) return m;
    const double n = static_cast<double>(px.size());
    for (auto p : px) {
        m.cx += p.x;
        m.cy += p.y;
    }
    m.cx /= n;
    m.cy /= n;
    for (auto p : px) {
        const double dx = p.x - m.cx, dy = p.y - m.cy;
        m.uxx += dx * dx;
        m.uyy += dy * dy;
        m.uxy += dx * dy;
    }
    m.uxx = m.uxx / n + 1.0 / 12.0;
    m.uyy = m.uyy / n + 1.0 / 12.0;
    m.uxy /= n;
    return m;
}

EllipseFit ellipse_fit(const Moments& m) {
    const double common = std::sqrt((m.uxx - m.uyy) * (m.uxx - m.uyy) + 4.0 * m.uxy * m.uxy);
    const double l1 = 0.5 * (m.uxx + m.uyy + common);
    const double l2 = std::max(0.0, 0.5 * (m.uxx + m.uyy - common));
    EllipseFit e;
    e.major = 4.0 * std::sqrt(l1);
    e.minor = 4.0 * std::sqrt(l2);
    e.eccentricity = l1 > 0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;
    return e;
}

BoundingBox bounding_box(std::span<const Pixel> px) {
    BoundingBox b{px.front().x, px.front().y, px.front().x, px.front().y};
    for (auto p : px) {
        b.min_x = std::min(b.min_x, p.x);
        b.max_x = std::max(b.max_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

namespace {
std::int64_t cross(Pixel o, Pixel a, Pixel b) {
    return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) - static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}
}  // namespace

PixelList convex_hull(PixelList pts) {
    std::sort(pts.begin(), pts.end(), [](Pixel a, Pixel b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    PixelList hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::int64_t hull_lattice_count(std::span<const Pixel> hull) {
    if (hull.empty()) return 0;
    if (hull.size() == 1) return 1;
    std::int64_t twice_area = 0, boundary = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto a = hull[i], b = hull[(i + 1) % hull.size()];
        twice_area += static_cast<std::int64_t>(a.x) * b.y - static_cast<std::int64_t>(b.x) * a.y;
        boundary += std::gcd(std::abs(b.x - a.x), std::abs(b.y - a.y));
    }
    // Pick: lattice points = A + B/2 + 1
    return (std::abs(twice_area) + boundary) / 2 + 1;
}

namespace {
// W, NW, N, NE, E, SE, S, SW with y pointing down (clockwise on screen)
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
}  // namespace

std::vector<int> boundary_chain(std::span<const Pixel> component) {
    if (component.size() <= 1) return {};
    const auto box = bounding_box(component);
    const int w = box.max_x - box.min_x + 3, h = box.max_y - box.min_y + 3;
    std::vector<std::uint8_t> grid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    auto at = [&](int x, int y) -> std::uint8_t& {
        return grid[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
    };
    Pixel start{w, h};
    for (auto p : component) {
        const Pixel q{p.x - box.min_x + 1, p.y - box.min_y + 1};
        at(q.x, q.y) = 1;
        if (q.y < start.y || (q.y == start.y && q.x < start.x)) start = q;
    }

    std::vector<int> chain;
    Pixel cur = start;
    int back = 0;  // start's west neighbor is background
    int first_move = -1;
    const std::size_t limit = 8 * component.size() + 8;
    while (chain.size() < limit) {
        int move = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (at(cur.x + kDx[d], cur.y + kDy[d])) {
                move = d;
                break;
            }
        }
        if (move < 0) break;  // isolated pixel
        if (cur == start && move == first_move) break;  // Jacob's stopping criterion
        if (first_move < 0) first_move = move;
        chain.push_back(move);
        cur = {cur.x + kDx[move], cur.y + kDy[move]};
        back = (move + 4) % 8;
    }
    return chain;
}

double traced_perimeter(std::span<const Pixel> component) {
    if (component.empty()) return 0.0;
    if (component.size() == 1) return 4.0;
    const auto chain = boundary_chain(component);
    std::size_t even = 0, odd = 0, corners = 0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        (chain[i] % 2 == 0 ? even : odd) += 1;
        if (chain[i] != chain[(i + chain.size() - 1) % chain.size()]) ++corners;
    }
    return 0.980 * static_cast<double>(even) + 1.406 * static_cast<double>(odd) - 0.091 * static_cast<double>(corners);
}

}  // namespace stentx::region
