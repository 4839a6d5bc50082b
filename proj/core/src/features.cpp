#include "stentx/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "stentx/error.hpp"
#include "stentx/stats.hpp"

namespace stentx {

std::string_view to_string(AssemblyMode m) {
    switch (m) {
        case AssemblyMode::frame: return "frame";
        case AssemblyMode::segmental: return "segmental";
        case AssemblyMode::lesion: return "lesion";
    }
    return "segmental";
}

AssemblyMode parse_mode(std::string_view s) {
    if (s == "frame") return AssemblyMode::frame;
    if (s == "segmental") return AssemblyMode::segmental;
    if (s == "lesion") return AssemblyMode::lesion;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Frame2dSpec {
    std::string_view name;
    ColumnGroup group;
    bool exempt;
};

constexpr Frame2dSpec kFrame2d[] = {
    {"lumen_area", ColumnGroup::lumen2d, true},
    {"lumen_pct_as", ColumnGroup::lumen2d, false},
    {"lumen_major_axis", ColumnGroup::lumen2d, false},
    {"lumen_minor_axis", ColumnGroup::lumen2d, false},
    {"lumen_perimeter", ColumnGroup::lumen2d, false},
    {"lumen_extent", ColumnGroup::lumen2d, false},
    {"lumen_eccentricity", ColumnGroup::lumen2d, false},
    {"lumen_solidity", ColumnGroup::lumen2d, false},
    {"lumen_circularity", ColumnGroup::lumen2d, false},
    {"lumen_below_ref_050", ColumnGroup::lumen2d, false},
    {"lumen_below_ref_070", ColumnGroup::lumen2d, false},
    {"lumen_below_ref_090", ColumnGroup::lumen2d, false},
    {"calc_arc_angle", ColumnGroup::calc2d, false},
    {"calc_thickness", ColumnGroup::calc2d, false},
    {"calc_depth", ColumnGroup::calc2d, false},
    {"calc_area", ColumnGroup::calc2d, true},
    {"calc_major_axis", ColumnGroup::calc2d, false},
    {"calc_minor_axis", ColumnGroup::calc2d, false},
    {"calc_extent", ColumnGroup::calc2d, false},
    {"calc_eccentricity", ColumnGroup::calc2d, false},
    {"calc_perimeter", ColumnGroup::calc2d, false},
    {"calc_solidity", ColumnGroup::calc2d, false},
    {"calc_circularity", ColumnGroup::calc2d, false},
    {"calc_stretch_ratio", ColumnGroup::calc2d, false},
};

constexpr Frame2dSpec kLesion3d[] = {
    {"lumen_volume", ColumnGroup::lumen3d, true},
    {"lumen_equivalent_diameter", ColumnGroup::lumen3d, false},
    {"lumen_extent3d", ColumnGroup::lumen3d, false},
    {"lumen_convex_volume", ColumnGroup::lumen3d, true},
    {"lumen_solidity3d", ColumnGroup::lumen3d, false},
    {"lumen_surface_area", ColumnGroup::lumen3d, true},
    {"calc_volume", ColumnGroup::calc3d, true},
    {"calc_volume_index", ColumnGroup::calc3d, false},
    {"calc_length", ColumnGroup::calc3d, false},
    {"calc_equivalent_diameter", ColumnGroup::calc3d, false},
    {"calc_extent3d", ColumnGroup::calc3d, false},
    {"calc_convex_volume", ColumnGroup::calc3d, true},
    {"calc_solidity3d", ColumnGroup::calc3d, false},
    {"calc_surface_area", ColumnGroup::calc3d, true},
    {"calc_num_deposits", ColumnGroup::calc3d, false},
    {"calc_pct", ColumnGroup::calc3d, false},
};

constexpr std::string_view kPhenotypeColumns[] = {"phenotype_nodule", "phenotype_protrusion", "phenotype_sheet"};

std::vector<double> lesion_values(const LesionFeatures& l) {
    const auto& a = l.lumen3d;
    const auto& c = l.calc3d;
    return {a.volume_mm3,  a.equivalent_diameter_mm, a.extent,
            a.convex_volume_mm3, a.solidity, a.surface_area_mm2,
            c.volume_mm3,  c.volume_index_mm3_per_mm, c.length_mm,
            c.equivalent_diameter_mm, c.extent, c.convex_volume_mm3,
            c.solidity, c.surface_area_mm2, static_cast<double>(c.num_deposits),
            c.calc_pct};
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureColumn> columns) : columns_(std::move(columns)) {
    std::unordered_map<std::string, int> seen;
    for (const auto& c : columns_)
        if (seen[c.name]++) throw std::invalid_argument("duplicate feature column '" + c.name + "'");
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

FeatureSchema FeatureSchema::subset(std::span<const std::string> names) const {
    std::vector<FeatureColumn> cols;
    for (const auto& n : names) {
        auto i = index_of(n);
        if (!i) throw std::invalid_argument("unknown feature column '" + n + "'");
        cols.push_back(columns_[*i]);
    }
    return FeatureSchema(std::move(cols));
}

std::uint64_t FeatureSchema::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& c : columns_) h = fnv1a(c.name + "\n", h);
    return h;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.schema = schema;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(r));
        out.target.push_back(target[r]);
        out.group_id.push_back(group_id[r]);
        out.lesion_id.push_back(lesion_id[r]);
        out.frame_index.push_back(frame_index[r]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
    FeatureMatrix out;
    out.schema = schema.subset(names);
    out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j)
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(*schema.index_of(names[j])));
    out.target = target;
    out.group_id = group_id;
    out.lesion_id = lesion_id;
    out.frame_index = frame_index;
    return out;
}

std::pair<int, int> LesionFeatures::row_span() const {
    return {std::max(lesion_start, stent_start), std::min(lesion_end(), stent_end)};
}

const std::vector<std::string>& frame_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : kFrame2d) v.emplace_back(s.name);
        return v;
    }();
    return names;
}

std::vector<double> frame_feature_values(const FrameFeatures& f) {
    const auto& l = f.lumen;
    const auto& c = f.calc;
    return {l.area_mm2,
            l.pct_area_stenosis,
            l.major_axis_mm,
            l.minor_axis_mm,
            l.perimeter_mm,
            l.extent,
            l.eccentricity,
            l.solidity,
            l.circularity,
            l.below_ref_050 ? 1.0 : 0.0,
            l.below_ref_070 ? 1.0 : 0.0,
            l.below_ref_090 ? 1.0 : 0.0,
            c.max_arc_angle_deg,
            c.max_thickness_mm,
            c.max_depth_mm,
            c.area_mm2,
            c.major_axis_mm,
            c.minor_axis_mm,
            c.extent,
            c.eccentricity,
            c.perimeter_mm,
            c.solidity,
            c.circularity,
            c.stretch_ratio};
}

FeatureSchema make_schema(const AssemblyOptions& opt) {
    std::vector<FeatureColumn> cols;
    if (opt.mode == AssemblyMode::frame) {
        for (const auto& s : kFrame2d) cols.push_back({std::string(s.name), s.group, s.exempt});
    } else {
        for (const auto& s : kFrame2d)
            for (auto stat : kStatNames) {
                // shape statistics of an area are dimensionless
                const bool exempt = s.exempt && (stat != "skewness" && stat != "kurtosis");
                cols.push_back({std::string(s.name) + "_" + std::string(stat), s.group, exempt});
            }
        for (const auto& s : kLesion3d) cols.push_back({std::string(s.name), s.group, s.exempt});
    }
    if (opt.include_phenotype)
        for (auto n : kPhenotypeColumns) cols.push_back({std::string(n), ColumnGroup::phenotype, true});
    return FeatureSchema(std::move(cols));
}

std::vector<std::string> cle_columns(const AssemblyOptions& opt) {
    static constexpr std::string_view kCle2d[] = {"calc_arc_angle", "lumen_area",     "lumen_pct_as",
                                                  "calc_area",      "calc_thickness", "calc_depth"};
    static constexpr std::string_view kCleStats[] = {"mean", "median", "sd", "min", "max"};
    std::vector<std::string> out;
    if (opt.mode == AssemblyMode::frame) {
        for (auto f : kCle2d) out.emplace_back(f);
    } else {
        for (auto f : kCle2d)
            for (auto s : kCleStats) out.push_back(std::string(f) + "_" + std::string(s));
        out.emplace_back("calc_pct");
        out.emplace_back("lumen_volume");
        out.emplace_back("calc_volume");
    }
    if (opt.include_phenotype)
        for (auto n : kPhenotypeColumns) out.emplace_back(n);
    return out;
}

FeatureMatrix assemble(std::span<const LesionFeatures> lesions, const AssemblyOptions& opt) {
    if (opt.segment_length < 1 || opt.segment_length % 2 == 0)
        throw std::invalid_argument("segment_length must be a positive odd integer, got " +
                                    std::to_string(opt.segment_length));
    FeatureMatrix out;
    out.schema = make_schema(opt);
    const auto ncol = static_cast<Eigen::Index>(out.schema.size());
    const std::size_t n2d = frame_feature_names().size();
    std::vector<std::vector<double>> rows;

    for (const auto& les : lesions) {
        if (les.frames.empty()) throw DataError("lesion " + les.lesion_id + " has no frames", std::nullopt, "frames");
        const auto [r0, r1] = les.row_span();
        if (r0 > r1)
            throw DataError("lesion " + les.lesion_id + ": stented span does not overlap the lesion", std::nullopt,
                            "stent_start_frame");
        const bool has_targets = !les.post_areas.empty();
        if (has_targets && static_cast<int>(les.post_areas.size()) <= r1)
            throw DataError("lesion " + les.lesion_id + ": post-stent areas are not registered to the pre pullback",
                            std::nullopt, "post_areas");

        // per-feature series over the lesion frames
        std::vector<std::vector<double>> series(n2d, std::vector<double>(les.frames.size()));
        for (std::size_t f = 0; f < les.frames.size(); ++f) {
            const auto v = frame_feature_values(les.frames[f]);
            for (std::size_t j = 0; j < n2d; ++j) series[j][f] = v[j];
        }
        const auto lesion_part = lesion_values(les);
        std::vector<double> pheno;
        if (opt.include_phenotype) {
            pheno.assign(3, 0.0);
            if (les.phenotype) pheno[static_cast<std::size_t>(*les.phenotype)] = 1.0;
        }

        auto push = [&](std::vector<double> row, double target, int frame) {
            row.insert(row.end(), pheno.begin(), pheno.end());
            rows.push_back(std::move(row));
            out.target.push_back(target);
            out.group_id.push_back(les.patient_id);
            out.lesion_id.push_back(les.lesion_id);
            out.frame_index.push_back(frame);
        };
        auto summarize_range = [&](std::size_t lo, std::size_t hi, std::vector<double>& row) {
            for (std::size_t j = 0; j < n2d; ++j) {
                const auto s = as_array(summarize(std::span(series[j]).subspan(lo, hi - lo + 1)));
                row.insert(row.end(), s.begin(), s.end());
            }
        };
        const double nan = std::numeric_limits<double>::quiet_NaN();

        if (opt.mode == AssemblyMode::lesion) {
            double target = nan;
            if (has_targets) {
                target = std::numeric_limits<double>::infinity();
                for (int f = r0; f <= r1; ++f)
                    if (!std::isnan(les.post_areas[static_cast<std::size_t>(f)]))
                        target = std::min(target, les.post_areas[static_cast<std::size_t>(f)]);
                if (std::isinf(target)) continue;
            }
            std::vector<double> row;
            summarize_range(0, les.frames.size() - 1, row);
            row.insert(row.end(), lesion_part.begin(), lesion_part.end());
            push(std::move(row), target, -1);
            continue;
        }

        const int half = (opt.segment_length - 1) / 2;
        const int last = static_cast<int>(les.frames.size()) - 1;
        for (int f = r0; f <= r1; ++f) {
            const double target = has_targets ? les.post_areas[static_cast<std::size_t>(f)] : nan;
            if (has_targets && std::isnan(target)) continue;
            const int local = f - les.lesion_start;
            std::vector<double> row;
            if (opt.mode == AssemblyMode::frame) {
                for (std::size_t j = 0; j < n2d; ++j) row.push_back(series[j][static_cast<std::size_t>(local)]);
            } else {
                const auto lo = static_cast<std::size_t>(std::max(0, local - half));
                const auto hi = static_cast<std::size_t>(std::min(last, local + half));
                summarize_range(lo, hi, row);
                row.insert(row.end(), lesion_part.begin(), lesion_part.end());
            }
            push(std::move(row), target, f);
        }
    }

    out.values.resize(static_cast<Eigen::Index>(rows.size()), ncol);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < ncol; ++j)
            out.values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return out;
}

NormalizationParams fit_normalizer(const FeatureMatrix& train) {
    if (train.rows() < 2) throw std::invalid_argument("fit_normalizer needs at least 2 rows");
    NormalizationParams p;
    p.names = train.schema.names();
    for (std::size_t j = 0; j < train.schema.size(); ++j) {
        const auto col = train.values.col(static_cast<Eigen::Index>(j));
        p.min.push_back(col.minCoeff());
        p.max.push_back(col.maxCoeff());
        p.exempt.push_back(train.schema[j].exempt);
        if (!p.exempt.back() && p.min.back() == p.max.back())
            p.warnings.push_back("constant column '" + p.names.back() + "' mapped to 0");
    }
    return p;
}

FeatureMatrix apply_normalizer(const NormalizationParams& p, const FeatureMatrix& m) {
    if (m.schema.names() != p.names)
        throw std::invalid_argument("apply_normalizer: schema does not match the fitted columns");
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < p.names.size(); ++j) {
        if (p.exempt[j]) continue;
        auto col = out.values.col(static_cast<Eigen::Index>(j));
        const double span = p.max[j] - p.min[j];
        for (Eigen::Index i = 0; i < col.size(); ++i)
            col(i) = span > 0 ? std::clamp((col(i) - p.min[j]) / span, -0.5, 1.5) : 0.0;
    }
    return out;
}

std::uint64_t NormalizationParams::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t j = 0; j < names.size(); ++j)
        h = fnv1a(names[j] + ":" + format_number(min[j]) + ":" + format_number(max[j]) + (exempt[j] ? "e" : "") + "\n",
                  h);
    return h;
}

void write_csv(const FeatureMatrix& m, std::ostream& out) {
    for (const auto& c : m.schema.columns()) out << c.name << ',';
    out << "target,lesion_id,patient_id,frame_index\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.values.cols(); ++j)
            out << format_number(m.values(static_cast<Eigen::Index>(i), j)) << ',';
        out << format_number(m.target[i]) << ',' << m.lesion_id[i] << ',' << m.group_id[i] << ','
            << m.frame_index[i] << '\n';
    }
}

}  // namespace stentx
