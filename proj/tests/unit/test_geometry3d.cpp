#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "stentx/geometry3d.hpp"

namespace stentx {
namespace {

Pullback lesion_with_calc(int frames, int calc_first, int calc_last, int size = 61) {
    auto base = testing::disc(size, 15);
    auto calc = base;
    testing::stamp_wedge(calc, 18, 24, 0, 120);
    auto p = testing::stack(base, frames);
    for (int f = calc_first; f <= calc_last; ++f) p.frames[static_cast<std::size_t>(f)] = calc;
    return p;
}

TEST(LumenLesion, StackedDiscVolume) {
    const auto m = testing::disc(61, 20);
    const auto p = testing::stack(m, 10);
    const double area = static_cast<double>(m.count(Label::lumen)) * 1e-4;
    const auto f = compute_lumen_lesion_features(p);
    EXPECT_NEAR(f.volume_mm3, 2.0 * area, 1e-12);
    EXPECT_NEAR(f.solidity, 1.0, 0.02);
    EXPECT_LE(f.volume_mm3, f.convex_volume_mm3 + 1e-12);
    EXPECT_NEAR(f.equivalent_diameter_mm, equivalent_diameter(f.volume_mm3), 1e-15);
}

TEST(LumenLesion, SingleVoxel) {
    FrameMask m(3, 3);
    m.set(1, 1, Label::lumen);
    const auto f = compute_lumen_lesion_features(testing::stack(m, 1));
    EXPECT_NEAR(f.volume_mm3, 2e-5, 1e-18);
    EXPECT_NEAR(f.equivalent_diameter_mm, std::cbrt(6 * 2e-5 / std::numbers::pi), 1e-15);
    EXPECT_NEAR(f.surface_area_mm2, 2 * (1e-4 + 2 * 0.01 * 0.2), 1e-15);
    EXPECT_DOUBLE_EQ(f.extent, 1.0);
}

TEST(LumenLesion, OnlyLesionFramesCount) {
    auto p = testing::stack(testing::disc(31, 8), 20);
    p.meta.lesion_start_frame = 5;
    p.meta.lesion_end_frame = 9;
    const auto all = compute_lumen_lesion_features(testing::stack(testing::disc(31, 8), 5));
    EXPECT_NEAR(compute_lumen_lesion_features(p).volume_mm3, all.volume_mm3, 1e-15);
}

TEST(CalcLesion, NoCalcification) {
    const auto f = compute_calc_lesion_features(testing::stack(testing::disc(31, 8), 8));
    EXPECT_EQ(f.num_deposits, 0);
    EXPECT_EQ(f.calc_pct, 0);
    EXPECT_EQ(f.volume_mm3, 0);
    EXPECT_EQ(f.length_mm, 0);
    EXPECT_EQ(f.surface_area_mm2, 0);
}

TEST(CalcLesion, SingleDepositLengthAndPercent) {
    const auto f = compute_calc_lesion_features(lesion_with_calc(50, 10, 19));
    EXPECT_EQ(f.num_deposits, 1);
    EXPECT_NEAR(f.length_mm, 2.0, 1e-12);
    EXPECT_NEAR(f.calc_pct, 20, 1e-12);
    EXPECT_NEAR(f.volume_index_mm3_per_mm, f.volume_mm3 / (50 * 0.2), 1e-15);
}

TEST(CalcLesion, SeparatedDepositsAreDistinct) {
    auto p = lesion_with_calc(40, 5, 9);
    const auto other = lesion_with_calc(40, 12, 20);
    for (int f = 12; f <= 20; ++f) p.frames[static_cast<std::size_t>(f)] = other.frames[static_cast<std::size_t>(f)];
    const auto f = compute_calc_lesion_features(p);
    EXPECT_EQ(f.num_deposits, 2);
    EXPECT_NEAR(f.length_mm, 9 * 0.2, 1e-12);
    const auto deps = find_deposits(p);
    ASSERT_EQ(deps.size(), 2u);
    double voxels = 0;
    for (const auto& d : deps) voxels += static_cast<double>(d.voxels);
    EXPECT_NEAR(f.volume_mm3, voxels * 1e-4 * 0.2, 1e-12);
}

TEST(CalcLesion, DiagonalNeighboursJoinAcrossFrames) {
    FrameMask a(9, 9), b(9, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 3; ++x) {
            a.set(x, y, Label::lumen);
            b.set(x, y, Label::lumen);
        }
    a.set(5, 5, Label::calcification);
    b.set(6, 6, Label::calcification);
    Pullback p = testing::stack(a, 2);
    p.frames[1] = b;
    EXPECT_EQ(compute_calc_lesion_features(p).num_deposits, 1);
}

TEST(CalcLesion, SingleVoxelSurface) {
    FrameMask m(9, 9);
    for (int y = 0; y < 9; ++y) m.set(0, y, Label::lumen);
    m.set(5, 5, Label::calcification);
    const auto f = compute_calc_lesion_features(testing::stack(m, 1));
    EXPECT_NEAR(f.surface_area_mm2, 2 * (1e-4 + 2 * 0.01 * 0.2), 1e-15);
}

TEST(CalcLesion, PitchEquivariance) {
    auto p = lesion_with_calc(30, 4, 15);
    const auto a = compute_calc_lesion_features(p);
    p.meta.frame_pitch_mm *= 2;
    const auto b = compute_calc_lesion_features(p);
    EXPECT_NEAR(b.volume_mm3, 2 * a.volume_mm3, 1e-12);
    EXPECT_NEAR(b.length_mm, 2 * a.length_mm, 1e-12);
    EXPECT_NEAR(b.convex_volume_mm3, 2 * a.convex_volume_mm3, 1e-12);
    EXPECT_EQ(b.calc_pct, a.calc_pct);
}

TEST(CalcLesion, PercentMatchesFrameScan) {
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = testing::stack(testing::disc(41, 10), 30);
        auto calc = p.frames[0];
        testing::stamp_wedge(calc, 12, 15, 0, 90);
        int with = 0;
        for (auto& f : p.frames)
            if (uniform01(rng) < 0.4) {
                f = calc;
                ++with;
            }
        const auto c = compute_calc_lesion_features(p);
        ASSERT_NEAR(c.calc_pct, 100.0 * with / 30, 1e-12);
        ASSERT_EQ(c.num_deposits == 0, c.volume_mm3 == 0);
        ASSERT_LE(c.solidity, 1 + 1e-9);
    }
}

}  // namespace
}  // namespace stentx
