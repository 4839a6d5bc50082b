#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stentx {

enum class Phase { pre, post };
enum class Phenotype { nodule, protrusion, sheet };

std::string_view to_string(Phase p);
std::string_view to_string(Phenotype p);
Phase parse_phase(std::string_view s);
Phenotype parse_phenotype(std::string_view s);

/// Per-pixel class labels of a segmented frame.
enum class Label : std::uint8_t { background = 0, lumen = 1, calcification = 2 };

struct PullbackMeta {
    std::string pullback_id;
    Phase phase = Phase::pre;
    int frame_count = 0;
    double frame_pitch_mm = 0.2;
    double pixel_spacing_mm = 0.01;
    int lesion_start_frame = 0;
    int lesion_end_frame = 0;  // inclusive
    std::optional<int> stent_start_frame;
    std::optional<int> stent_end_frame;  // inclusive
    std::optional<Phenotype> phenotype;
    std::string patient_id;

    bool has_stent() const { return stent_start_frame && stent_end_frame; }
    bool operator==(const PullbackMeta&) const = default;
};

/// Cartesian label image, row-major, catheter at the image center.
class FrameMask {
public:
    FrameMask() = default;
    FrameMask(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    Label at(int x, int y) const { return static_cast<Label>(labels_[index(x, y)]); }
    void set(int x, int y, Label l) { labels_[index(x, y)] = static_cast<std::uint8_t>(l); }
    bool is(int x, int y, Label l) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y) == l;
    }

    std::size_t count(Label l) const;

    const std::vector<std::uint8_t>& raw() const noexcept { return labels_; }
    std::vector<std::uint8_t>& raw() noexcept { return labels_; }

    bool operator==(const FrameMask&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> labels_;
};

struct Pullback {
    PullbackMeta meta;
    std::vector<FrameMask> frames;

    bool operator==(const Pullback&) const = default;
};

struct RegistrationTransform {
    int z_offset_frames = 0;
    double rotation_deg = 0.0;
};

/// Throws DataError (with frame index / field name) on any invariant violation.
void validate_meta(const PullbackMeta& meta);
void validate(const Pullback& pullback);

/// Directory layout: meta.txt (key=value) + frame_0000.pgm ... (binary P5).
Pullback load_pullback(const std::filesystem::path& dir);
void save_pullback(const Pullback& pullback, const std::filesystem::path& dir);

PullbackMeta read_meta(const std::filesystem::path& file);
void write_meta(const PullbackMeta& meta, const std::filesystem::path& file);
FrameMask read_pgm(const std::filesystem::path& file, int frame_index = -1);
void write_pgm(const FrameMask& mask, const std::filesystem::path& file);

/// Violations that make a pre/post pair unanalyzable; empty means OK.
std::vector<std::string> validate_pair(const Pullback& pre, const Pullback& post);

/// Rotate labels counter-clockwise (x right, y down as stored) about
/// ((w-1)/2, (h-1)/2) with nearest-neighbor sampling.
FrameMask rotate_mask(const FrameMask& mask, double degrees);

/// Output frame i holds input frame i + z (after rotation); frames whose
/// source is out of range are dropped. Lesion/stent bounds follow the shift.
Pullback align_post_to_pre(const Pullback& post, const RegistrationTransform& t);

/// Pre-pullback frame index corresponding to frame 0 of align_post_to_pre's output.
int aligned_frame_origin(const RegistrationTransform& t);

/// Per pre-frame lumen area (mm^2) from a post pullback under `t`;
/// NaN where the post pullback has no corresponding frame.
std::vector<double> post_areas_in_pre_frames(const Pullback& post, const RegistrationTransform& t,
                                             int pre_frame_count);

/// Lumen area (mm^2) of every frame.
std::vector<double> lumen_areas(const Pullback& pullback);

}  // namespace stentx
