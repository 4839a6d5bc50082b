#include "stentx/fujino.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stentx {

namespace {

struct Extremes {
    double angle = 0;
    double thickness = 0;
};

Extremes extremes(const LesionFeatures& l) {
    Extremes e;
    for (const auto& f : l.frames) {
        e.angle = std::max(e.angle, f.calc.max_arc_angle_deg);
        e.thickness = std::max(e.thickness, f.calc.max_thickness_mm);
    }
    return e;
}

}  // namespace

FujinoScore fujino_score(double max_angle_deg, double max_thickness_mm, double calc_length_mm,
                         const FujinoConfig& c) {
    FujinoScore s;
    s.angle_points = max_angle_deg > c.angle_deg ? c.angle_points : 0;
    s.thickness_points = max_thickness_mm > c.thickness_mm ? c.thickness_points : 0;
    s.length_points = calc_length_mm > c.length_mm ? c.length_points : 0;
    s.points = s.angle_points + s.thickness_points + s.length_points;
    s.high_risk = s.points >= c.high_risk_points;
    return s;
}

FujinoScore fujino_score(const LesionFeatures& lesion, const FujinoConfig& config) {
    const auto e = extremes(lesion);
    return fujino_score(e.angle, e.thickness, lesion.calc3d.length_mm, config);
}

FeatureMatrix fujino_ml_features(std::span<const LesionFeatures> lesions) {
    FeatureMatrix m;
    m.schema = FeatureSchema({{"calc_max_arc_angle", ColumnGroup::calc2d, false},
                              {"calc_max_thickness", ColumnGroup::calc2d, false},
                              {"calc_length", ColumnGroup::calc3d, false}});
    m.values.resize(static_cast<Eigen::Index>(lesions.size()), 3);
    for (std::size_t i = 0; i < lesions.size(); ++i) {
        const auto& l = lesions[i];
        const auto e = extremes(l);
        const auto r = static_cast<Eigen::Index>(i);
        m.values(r, 0) = e.angle;
        m.values(r, 1) = e.thickness;
        m.values(r, 2) = l.calc3d.length_mm;
        double target = std::numeric_limits<double>::quiet_NaN();
        if (!l.post_areas.empty()) {
            const auto [r0, r1] = l.row_span();
            for (int f = r0; f <= r1; ++f) {
                const double a = l.post_areas[static_cast<std::size_t>(f)];
                if (std::isfinite(a) && !(a >= target)) target = a;
            }
        }
        m.target.push_back(target);
        m.group_id.push_back(l.patient_id);
        m.lesion_id.push_back(l.lesion_id);
        m.frame_index.push_back(-1);
    }
    return m;
}

}  // namespace stentx
