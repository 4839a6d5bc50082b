#include "stentx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "stentx/error.hpp"
#include "stentx/geometry2d.hpp"
#include "stentx/geometry3d.hpp"

namespace fs = std::filesystem;

namespace stentx {

LesionRecord extract_lesion(const Pullback& pre, std::span<const double> post_areas,
                            std::optional<std::string> lesion_id) {
    validate(pre);
    const auto& m = pre.meta;
    if (!post_areas.empty() && static_cast<int>(post_areas.size()) != m.frame_count)
        throw DataError("post-stent areas are not registered to the pre pullback (" +
                            std::to_string(post_areas.size()) + " values for " + std::to_string(m.frame_count) +
                            " frames)",
                        std::nullopt, "post_areas");

    LesionRecord rec;
    auto& lf = rec.features;
    lf.lesion_id = lesion_id.value_or(m.pullback_id);
    lf.patient_id = m.patient_id;
    lf.phenotype = m.phenotype;
    lf.lesion_start = m.lesion_start_frame;
    lf.stent_start = m.stent_start_frame.value_or(m.lesion_start_frame);
    lf.stent_end = m.stent_end_frame.value_or(m.lesion_end_frame);

    const auto areas = lumen_areas(pre);
    rec.pre_refs = find_reference_areas(areas, lf.stent_start, lf.stent_end, m.frame_pitch_mm);
    const double ref = rec.pre_refs.mean();
    for (int f = m.lesion_start_frame; f <= m.lesion_end_frame; ++f) {
        const auto& mask = pre.frames[static_cast<std::size_t>(f)];
        FrameFeatures ff;
        ff.lumen = compute_lumen_frame_features(mask, m.pixel_spacing_mm, ref, f);
        ff.calc = compute_calc_frame_features(mask, m.pixel_spacing_mm, f);
        lf.frames.push_back(ff);
    }
    lf.lumen3d = compute_lumen_lesion_features(pre);
    lf.calc3d = compute_calc_lesion_features(pre);

    if (!post_areas.empty()) {
        lf.post_areas.assign(post_areas.begin(), post_areas.end());
        const auto post_refs = find_reference_areas(post_areas, lf.stent_start, lf.stent_end, m.frame_pitch_mm);
        rec.actual = compute_sei_curve(post_areas.subspan(static_cast<std::size_t>(lf.stent_start),
                                                          static_cast<std::size_t>(lf.stent_end - lf.stent_start + 1)),
                                       post_refs, lf.stent_start);
    }
    return rec;
}

RegistrationTransform read_registration(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string(), std::nullopt, "registration");
    RegistrationTransform t;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed line in " + file.string(), std::nullopt, line);
        const auto key = line.substr(0, eq), value = line.substr(eq + 1);
        try {
            if (key == "z_offset_frames") {
                t.z_offset_frames = std::stoi(value);
            } else if (key == "rotation_deg") {
                t.rotation_deg = std::stod(value);
            } else {
                throw DataError("unknown key '" + key + "' in " + file.string(), std::nullopt, key);
            }
        } catch (const std::logic_error&) {
            throw DataError("invalid value for '" + key + "' in " + file.string(), std::nullopt, key);
        }
    }
    return t;
}

std::vector<TruthRow> read_truth_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string(), std::nullopt, "truth");
    std::string line;
    std::getline(in, line);
    if (line.rfind("lesion_id,frame,post_area_mm2,phenotype", 0) != 0)
        throw DataError("unexpected header in " + file.string(), std::nullopt, "truth");
    std::vector<TruthRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        TruthRow r;
        std::string frame, area;
        if (!std::getline(ss, r.lesion_id, ',') || !std::getline(ss, frame, ',') || !std::getline(ss, area, ','))
            throw DataError("malformed row " + std::to_string(lineno) + " in " + file.string(), std::nullopt, "truth");
        std::getline(ss, r.phenotype);
        try {
            r.frame = std::stoi(frame);
            r.post_area_mm2 = std::stod(area);
        } catch (const std::logic_error&) {
            throw DataError("malformed number on row " + std::to_string(lineno) + " in " + file.string(),
                            std::nullopt, "truth");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<LesionRecord> load_dataset(const fs::path& dir) {
    const auto lesions_dir = dir / "lesions";
    if (!fs::is_directory(lesions_dir)) throw DataError("missing directory " + lesions_dir.string());
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(lesions_dir))
        if (e.is_directory()) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    std::map<std::string, std::vector<std::pair<int, double>>> truth;
    if (fs::exists(dir / "truth.csv"))
        for (const auto& r : read_truth_csv(dir / "truth.csv")) truth[r.lesion_id].emplace_back(r.frame, r.post_area_mm2);

    std::vector<LesionRecord> out;
    for (const auto& path : entries) {
        const auto id = path.filename().string();
        const auto pre = load_pullback(path / "pre");
        std::vector<double> post_areas;
        if (fs::exists(path / "post")) {
            auto post = load_pullback(path / "post");
            const auto problems = validate_pair(pre, post);
            if (!problems.empty()) throw DataError("lesion " + id + ": " + problems.front());
            RegistrationTransform t;
            if (fs::exists(path / "registration.txt")) t = read_registration(path / "registration.txt");
            post_areas = post_areas_in_pre_frames(post, t, pre.meta.frame_count);
            if (!pre.meta.has_stent()) {
                // stent bounds live in post coordinates: pre p <-> post p + z
                auto pre_with_stent = pre;
                const int lo = std::max(0, *post.meta.stent_start_frame - t.z_offset_frames);
                const int hi = std::min(pre.meta.frame_count - 1, *post.meta.stent_end_frame - t.z_offset_frames);
                if (lo > hi) throw DataError("lesion " + id + ": stent lies outside the registered pre pullback");
                pre_with_stent.meta.stent_start_frame = lo;
                pre_with_stent.meta.stent_end_frame = hi;
                out.push_back(extract_lesion(pre_with_stent, post_areas, id));
                continue;
            }
        } else if (auto it = truth.find(id); it != truth.end()) {
            post_areas.assign(static_cast<std::size_t>(pre.meta.frame_count), std::numeric_limits<double>::quiet_NaN());
            for (const auto& [f, a] : it->second) {
                if (f < 0 || f >= pre.meta.frame_count)
                    throw DataError("truth frame outside lesion " + id, f, "frame");
                post_areas[static_cast<std::size_t>(f)] = a;
            }
        }
        out.push_back(extract_lesion(pre, post_areas, id));
    }
    return out;
}

std::vector<LesionFeatures> lesion_features(std::span<const LesionRecord> records) {
    std::vector<LesionFeatures> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.features);
    return out;
}

}  // namespace stentx
