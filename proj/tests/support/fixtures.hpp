#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "stentx/pullback.hpp"
#include "stentx/rng.hpp"

namespace stentx::testing {

inline double center(int size) { return (size - 1) / 2.0; }

/// Lumen disc of radius r (pixels) about the image center.
inline FrameMask disc(int size, double r) {
    FrameMask m(size, size);
    const double c = center(size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x - c, y - c) <= r) m.set(x, y, Label::lumen);
    return m;
}

/// Axis-aligned lumen ellipse with semi-axes a (x) and b (y).
inline FrameMask ellipse(int size, double a, double b) {
    FrameMask m(size, size);
    const double c = center(size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double u = (x - c) / a, v = (y - c) / b;
            if (u * u + v * v <= 1) m.set(x, y, Label::lumen);
        }
    return m;
}

/// Calcified annular wedge [r0, r1) spanning [a0, a1) degrees, measured
/// counter-clockwise from +x with y pointing up on screen.
inline void stamp_wedge(FrameMask& m, double r0, double r1, double a0_deg, double a1_deg) {
    const double c = center(m.width());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            const double dx = x - c, dy = c - y;
            const double r = std::hypot(dx, dy);
            double a = std::atan2(dy, dx) * 180 / std::numbers::pi;
            if (a < 0) a += 360;
            if (r >= r0 && r < r1 && a >= a0_deg && a < a1_deg) m.set(x, y, Label::calcification);
        }
}

/// Random blob: union of a few discs with random calcified specks, for
/// oracle comparisons.
inline FrameMask random_mask(Rng& rng, int size) {
    FrameMask m(size, size);
    const int blobs = static_cast<int>(uniform_int(rng, 1, 4));
    for (int b = 0; b < blobs; ++b) {
        const double cx = uniform(rng, size * 0.3, size * 0.7), cy = uniform(rng, size * 0.3, size * 0.7);
        const double r = uniform(rng, 2, size * 0.25);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                if (std::hypot(x - cx, y - cy) <= r) m.set(x, y, Label::lumen);
    }
    const int specks = static_cast<int>(uniform_int(rng, 0, 40));
    for (int s = 0; s < specks; ++s) {
        const int x = static_cast<int>(uniform_int(rng, 0, size - 1)), y = static_cast<int>(uniform_int(rng, 0, size - 1));
        if (m.at(x, y) == Label::background) m.set(x, y, Label::calcification);
    }
    return m;
}

inline Pullback stack(const FrameMask& frame, int count, double spacing = 0.01, double pitch = 0.2) {
    Pullback p;
    p.meta.pullback_id = "fixture";
    p.meta.patient_id = "P0";
    p.meta.frame_count = count;
    p.meta.pixel_spacing_mm = spacing;
    p.meta.frame_pitch_mm = pitch;
    p.meta.lesion_start_frame = 0;
    p.meta.lesion_end_frame = count - 1;
    p.frames.assign(static_cast<std::size_t>(count), frame);
    return p;
}

}  // namespace stentx::testing
