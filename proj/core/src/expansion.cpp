#include "stentx/expansion.hpp"

#include <cmath>
#include <ostream>

#include "stentx/error.hpp"
#include "stentx/features.hpp"

namespace stentx {

std::string_view to_string(ExpansionLabel l) {
    return l == ExpansionLabel::under_expanded ? "under_expanded" : "well_expanded";
}

int reference_window_frames(double frame_pitch_mm) {
    if (!(frame_pitch_mm > 0)) throw DataError("frame pitch must be positive", std::nullopt, "frame_pitch_mm");
    // tolerance keeps 5 / 0.2 at 25 despite binary rounding
    return static_cast<int>(std::ceil(kReferenceWindowMm / frame_pitch_mm - 1e-9));
}

ReferencePair find_reference_areas(std::span<const double> areas, int stent_start, int stent_end,
                                   double frame_pitch_mm) {
    const int n = static_cast<int>(areas.size());
    if (stent_start < 0 || stent_end < stent_start || stent_end >= n)
        throw DataError("stent bounds [" + std::to_string(stent_start) + ", " + std::to_string(stent_end) +
                            "] outside the pullback",
                        std::nullopt, "stent_start_frame");
    const int window = reference_window_frames(frame_pitch_mm);

    ReferencePair r;
    for (int f = stent_end + 1; f <= std::min(n - 1, stent_end + window); ++f) {
        const double a = areas[static_cast<std::size_t>(f)];
        if (a > 0 && (r.proximal_frame < 0 || a > r.proximal_area_mm2)) {
            r.proximal_area_mm2 = a;
            r.proximal_frame = f;
        }
    }
    for (int f = stent_start - 1; f >= std::max(0, stent_start - window); --f) {
        const double a = areas[static_cast<std::size_t>(f)];
        if (a > 0 && (r.distal_frame < 0 || a > r.distal_area_mm2)) {
            r.distal_area_mm2 = a;
            r.distal_frame = f;
        }
    }
    if (r.proximal_frame < 0) throw DataError("no proximal reference frame beyond the stent", stent_end, "proximal");
    if (r.distal_frame < 0) throw DataError("no distal reference frame before the stent", stent_start, "distal");
    return r;
}

ReferencePair find_reference_areas(const Pullback& pullback, int stent_start, int stent_end) {
    const auto areas = lumen_areas(pullback);
    return find_reference_areas(areas, stent_start, stent_end, pullback.meta.frame_pitch_mm);
}

ExpansionLabel classify_msei(double msei, double threshold) {
    return msei < threshold ? ExpansionLabel::under_expanded : ExpansionLabel::well_expanded;
}

ExpansionRecord compute_sei_curve(std::span<const double> post_areas, const ReferencePair& refs, int first_frame,
                                  double threshold) {
    if (post_areas.empty()) throw DataError("empty stented span", std::nullopt, "post_areas");
    const double ref = (refs.proximal_area_mm2 + refs.distal_area_mm2) / 2.0;
    if (!(ref > 0) || !std::isfinite(ref)) throw DataError("reference mean must be positive", std::nullopt, "reference");

    ExpansionRecord r;
    r.first_frame = first_frame;
    r.sei.reserve(post_areas.size());
    for (std::size_t i = 0; i < post_areas.size(); ++i) {
        const double a = post_areas[i];
        const int frame = first_frame + static_cast<int>(i);
        if (!(a > 0) || !std::isfinite(a))
            throw DataError("non-positive post-stent area " + format_number(a) + " at frame " + std::to_string(frame),
                            frame, "post_area_mm2");
        r.sei.push_back(100.0 * a / ref);
        if (i == 0 || r.sei.back() < r.msei) {
            r.msei = r.sei.back();
            r.msei_frame = frame;
        }
    }
    r.label = classify_msei(r.msei, threshold);
    return r;
}

void write_sei_csv(const ExpansionRecord& r, std::ostream& out) {
    out << "frame,sei\n";
    for (std::size_t i = 0; i < r.sei.size(); ++i)
        out << r.first_frame + static_cast<int>(i) << ',' << format_number(r.sei[i]) << '\n';
}

std::string summary_line(const ExpansionRecord& r) {
    return "msei=" + format_number(r.msei) + ",msei_frame=" + std::to_string(r.msei_frame) +
           ",label=" + std::string(to_string(r.label));
}

}  // namespace stentx
