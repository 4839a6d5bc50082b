#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "stentx/pullback.hpp"

namespace stentx {

inline constexpr double kDefaultSeiThreshold = 80.0;
inline constexpr double kReferenceWindowMm = 5.0;

struct ReferencePair {
    double proximal_area_mm2 = 0;
    double distal_area_mm2 = 0;
    int proximal_frame = -1;
    int distal_frame = -1;

    double mean() const { return 0.5 * (proximal_area_mm2 + distal_area_mm2); }
};

enum class ExpansionLabel { under_expanded, well_expanded };
std::string_view to_string(ExpansionLabel l);

struct ExpansionRecord {
    int first_frame = 0;     // pullback frame index of sei[0]
    std::vector<double> sei;  // percent
    double msei = 0;
    int msei_frame = 0;
    ExpansionLabel label = ExpansionLabel::well_expanded;
};

/// Frames searched on each side of the stent: ceil(5 mm / pitch).
int reference_window_frames(double frame_pitch_mm);

/// Largest area within the window beyond each stent edge: proximal
/// (stent_end, stent_end + n], distal [stent_start - n, stent_start).
/// NaN areas are skipped; ties go to the frame nearest the edge.
/// Throws DataError naming the side when it has no usable frame.
ReferencePair find_reference_areas(std::span<const double> areas, int stent_start, int stent_end,
                                   double frame_pitch_mm);
ReferencePair find_reference_areas(const Pullback& pullback, int stent_start, int stent_end);

/// SEI(f) = 100 * area(f) / mean(refs). msei ties resolve to the smallest
/// frame; under-expanded iff msei < threshold. Throws DataError on a
/// non-positive or non-finite area.
ExpansionRecord compute_sei_curve(std::span<const double> post_areas, const ReferencePair& refs,
                                  int first_frame = 0, double threshold = kDefaultSeiThreshold);

ExpansionLabel classify_msei(double msei, double threshold = kDefaultSeiThreshold);

/// `frame,sei` rows.
void write_sei_csv(const ExpansionRecord& r, std::ostream& out);
/// `msei=<v>,msei_frame=<i>,label=<label>`
std::string summary_line(const ExpansionRecord& r);

}  // namespace stentx
