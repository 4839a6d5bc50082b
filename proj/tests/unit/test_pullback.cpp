#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "stentx/error.hpp"
#include "stentx/pullback.hpp"

namespace fs = std::filesystem;

namespace stentx {
namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(STENTX_TEST_TMP) / "pullback" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Pullback small_pullback(int frames = 5) {
    auto frame = testing::disc(32, 8);
    testing::stamp_wedge(frame, 10, 13, 0, 120);
    auto p = testing::stack(frame, frames, 0.02);
    p.meta.pullback_id = "L1";
    p.meta.patient_id = "P1";
    p.meta.phenotype = Phenotype::protrusion;
    p.meta.lesion_start_frame = 1;
    p.meta.lesion_end_frame = frames - 2;
    return p;
}

Pullback post_of(const Pullback& pre) {
    auto post = pre;
    post.meta.phase = Phase::post;
    post.meta.stent_start_frame = pre.meta.lesion_start_frame;
    post.meta.stent_end_frame = pre.meta.lesion_end_frame;
    return post;
}

TEST(PullbackIo, RoundTripIsBitIdentical) {
    const auto dir = scratch("roundtrip");
    const auto p = small_pullback();
    save_pullback(p, dir);
    EXPECT_TRUE(fs::exists(dir / "meta.txt"));
    EXPECT_TRUE(fs::exists(dir / "frame_0004.pgm"));
    const auto q = load_pullback(dir);
    EXPECT_EQ(q.frames.size(), 5u);
    EXPECT_EQ(p, q);
}

TEST(PullbackIo, MissingFrameNamesIndex) {
    const auto dir = scratch("missing");
    save_pullback(small_pullback(), dir);
    fs::remove(dir / "frame_0004.pgm");
    try {
        load_pullback(dir);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.frame(), 4);
        EXPECT_NE(std::string(e.what()).find("0004"), std::string::npos);
    }
}

TEST(PullbackIo, ExtraFrameRejected) {
    const auto dir = scratch("extra");
    const auto p = small_pullback();
    save_pullback(p, dir);
    write_pgm(p.frames[0], dir / "frame_0005.pgm");
    EXPECT_THROW(load_pullback(dir), DataError);
}

TEST(PullbackIo, BadLabelNamesFrameAndValue) {
    const auto dir = scratch("label");
    auto p = small_pullback();
    save_pullback(p, dir);
    p.frames[2].raw()[0] = 3;
    {
        std::ofstream out(dir / "frame_0002.pgm", std::ios::binary);
        out << "P5\n32 32\n255\n";
        out.write(reinterpret_cast<const char*>(p.frames[2].raw().data()), 32 * 32);
    }
    try {
        load_pullback(dir);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.frame(), 2);
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
}

TEST(PullbackIo, MetaBoundsViolation) {
    auto p = small_pullback();
    p.meta.lesion_end_frame = 9;
    try {
        validate(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.field(), "lesion_end_frame");
    }
    auto q = small_pullback();
    q.meta.phase = Phase::post;
    EXPECT_THROW(validate(q), DataError);
}

TEST(PullbackIo, EmptyLumenInsideLesion) {
    auto p = small_pullback();
    p.frames[2] = FrameMask(32, 32);
    try {
        validate(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.frame(), 2);
    }
}

TEST(ValidatePair, Cases) {
    const auto pre = small_pullback();
    EXPECT_TRUE(validate_pair(pre, post_of(pre)).empty());

    auto unstented = post_of(pre);
    unstented.meta.stent_start_frame.reset();
    unstented.meta.stent_end_frame.reset();
    EXPECT_EQ(validate_pair(pre, unstented).size(), 1u);

    auto spacing = post_of(pre);
    spacing.meta.pixel_spacing_mm = 0.04;
    EXPECT_EQ(validate_pair(pre, spacing).size(), 1u);

    auto patient = post_of(pre);
    patient.meta.patient_id = "P2";
    EXPECT_EQ(validate_pair(pre, patient).size(), 1u);
}

TEST(Align, IdentityTransform) {
    const auto post = post_of(small_pullback());
    EXPECT_EQ(align_post_to_pre(post, {0, 0}), post);
}

TEST(Align, PureShift) {
    auto post = post_of(small_pullback(10));
    for (int i = 0; i < 10; ++i) post.frames[static_cast<std::size_t>(i)].set(0, 0, i % 2 ? Label::lumen : Label::background);
    const auto out = align_post_to_pre(post, {3, 0});
    ASSERT_EQ(out.meta.frame_count, 7);
    ASSERT_EQ(out.frames.size(), 7u);
    EXPECT_EQ(out.frames[0], post.frames[3]);
    EXPECT_EQ(aligned_frame_origin({3, 0}), 0);
    EXPECT_EQ(aligned_frame_origin({-2, 0}), 2);
}

TEST(Align, QuarterTurnMovesPixel) {
    FrameMask m(21, 21);
    m.set(20, 10, Label::lumen);
    const auto r = rotate_mask(m, 90);
    EXPECT_EQ(r.at(10, 20), Label::lumen);
    EXPECT_EQ(r.count(Label::lumen), 1u);
}

TEST(Align, OffsetTooLarge) {
    const auto post = post_of(small_pullback());
    EXPECT_THROW(align_post_to_pre(post, {5, 0}), DataError);
    EXPECT_THROW(align_post_to_pre(post, {-5, 0}), DataError);
}

TEST(Align, RotationRoundTripKeepsLabelCounts) {
    auto frame = testing::ellipse(101, 30, 18);
    testing::stamp_wedge(frame, 34, 44, 20, 140);
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const double r = uniform(rng, 0, 360);
        const auto back = rotate_mask(rotate_mask(frame, r), std::fmod(360 - r, 360.0));
        for (auto l : {Label::lumen, Label::calcification}) {
            const double a = static_cast<double>(frame.count(l)), b = static_cast<double>(back.count(l));
            ASSERT_LE(std::abs(a - b), 0.02 * a) << "rotation " << r;
        }
    }
}

TEST(Align, ShiftComposition) {
    auto post = post_of(small_pullback(12));
    post.meta.lesion_start_frame = 4;
    post.meta.lesion_end_frame = 8;
    post.meta.stent_start_frame = 4;
    post.meta.stent_end_frame = 8;
    for (int i = 0; i < 12; ++i) post.frames[static_cast<std::size_t>(i)].set(0, 0, i % 3 ? Label::lumen : Label::background);
    const auto twice = align_post_to_pre(align_post_to_pre(post, {1, 0}), {2, 0});
    const auto once = align_post_to_pre(post, {3, 0});
    EXPECT_EQ(twice.frames, once.frames);
    EXPECT_EQ(twice.meta.lesion_start_frame, once.meta.lesion_start_frame);
}

TEST(PostAreas, NaNWhereUnregistered) {
    auto post = post_of(small_pullback(6));
    const auto areas = post_areas_in_pre_frames(post, {2, 0}, 6);
    ASSERT_EQ(areas.size(), 6u);
    EXPECT_FALSE(std::isnan(areas[0]));
    EXPECT_TRUE(std::isnan(areas[4]));
    EXPECT_TRUE(std::isnan(areas[5]));
}

}  // namespace
}  // namespace stentx
