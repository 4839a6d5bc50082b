#include "stentx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <stdexcept>

#include "stentx/error.hpp"
#include "stentx/geometry2d.hpp"
#include "stentx/rng.hpp"

namespace fs = std::filesystem;

namespace stentx {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    return a - kPi;
}

std::string padded(char prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%04d", prefix, i);
    return buf;
}

struct Deposit {
    int first = 0;  // pullback frames, inclusive
    int last = 0;
    double center_rad = 0;
    double arc_deg = 0;
    double thickness_mm = 0;
    double gap_mm = 0;          // sheets
    double protrusion = 0;      // fraction of the local lumen radius
};

struct DepositFrame {
    bool present = false;
    double half_arc_rad = 0;
    double thickness_mm = 0;
};

struct Geometry {
    double radius_mm = 0;
    double ellipticity = 0;
    double orientation_rad = 0;
    std::vector<double> stenosis;  // per frame area loss
    std::vector<Deposit> deposits;
    std::vector<std::vector<DepositFrame>> frames;  // [deposit][frame]
};

// Polar coordinates of every pixel about the image center.
struct PolarGrid {
    std::vector<double> rho, phi;
};

PolarGrid polar_grid(int size, double spacing) {
    PolarGrid g;
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = (x - c) * spacing, dy = (y - c) * spacing;
            g.rho.push_back(std::hypot(dx, dy));
            g.phi.push_back(std::atan2(dy, dx));
        }
    return g;
}

FrameMask rasterize(const SynthConfig& c, const Geometry& g, Phenotype phenotype, int frame, const PolarGrid& grid) {
    const int n = c.image_size_px;
    FrameMask m(n, n);
    const double shrink = std::sqrt(1.0 - g.stenosis[static_cast<std::size_t>(frame)]);
    const double a = g.radius_mm / std::sqrt(1.0 - g.ellipticity) * shrink;
    const double b = g.radius_mm * std::sqrt(1.0 - g.ellipticity) * shrink;
    auto& raw = m.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double rho = grid.rho[i], phi = grid.phi[i];
        const double t = phi - g.orientation_rad;
        const double edge = a * b / std::hypot(b * std::cos(t), a * std::sin(t));
        Label label = rho < edge ? Label::lumen : Label::background;
        for (std::size_t d = 0; d < g.deposits.size(); ++d) {
            const auto& df = g.frames[d][static_cast<std::size_t>(frame)];
            if (!df.present) continue;
            const auto& dep = g.deposits[d];
            const double off = std::abs(wrap_angle(phi - dep.center_rad));
            if (off > df.half_arc_rad) continue;
            double inner;
            if (phenotype == Phenotype::sheet) {
                inner = edge + dep.gap_mm;
            } else {
                const double u = df.half_arc_rad > 0 ? off / df.half_arc_rad : 0;
                const double shape = phenotype == Phenotype::nodule ? std::sqrt(std::max(0.0, 1 - u * u))
                                                                    : std::min(1.0, 3 * (1 - u));
                inner = edge * (1 - dep.protrusion * shape);
            }
            if (rho >= inner && rho < inner + df.thickness_mm) label = Label::calcification;
            else if (phenotype != Phenotype::sheet && rho >= inner && label == Label::lumen) label = Label::background;
        }
        raw[i] = static_cast<std::uint8_t>(label);
    }
    return m;
}

Geometry plan_geometry(const SynthConfig& c, const SynthPlanEntry& plan, int lesion_len, Rng& rng) {
    Geometry g;
    const int frames = lesion_len + 2 * c.margin_frames;
    const int ls = c.margin_frames, le = ls + lesion_len - 1;
    g.radius_mm = uniform(rng, c.lumen_radius_min_mm, c.lumen_radius_max_mm);
    g.ellipticity = uniform(rng, 0, c.ellipticity_max);
    g.orientation_rad = uniform(rng, -kPi, kPi);

    g.stenosis.assign(static_cast<std::size_t>(frames), 0.0);
    const double peak = uniform(rng, c.stenosis_min, c.stenosis_max);
    const int bumps = uniform01(rng) < 0.5 ? 1 : 2;
    for (int k = 0; k < bumps; ++k) {
        const double center = uniform(rng, ls + 0.2 * lesion_len, le - 0.2 * lesion_len);
        const double width = lesion_len * uniform(rng, 0.15, 0.3);
        const double amp = k == 0 ? 1.0 : uniform(rng, 0.5, 1.0);
        for (int f = ls; f <= le; ++f) {
            const double z = (f - center) / width;
            auto& s = g.stenosis[static_cast<std::size_t>(f)];
            s = std::max(s, peak * amp * std::exp(-0.5 * z * z));
        }
    }

    if (!plan.calcified) return g;
    const int n_dep = static_cast<int>(uniform_int(rng, c.deposits_min, c.deposits_max));
    for (int d = 0; d < n_dep; ++d) {
        Deposit dep;
        const int len = static_cast<int>(
            uniform_int(rng, c.deposit_frames_min, std::min(c.deposit_frames_max, lesion_len)));
        dep.first = static_cast<int>(uniform_int(rng, ls, le - len + 1));
        dep.last = dep.first + len - 1;
        dep.center_rad = uniform(rng, -kPi, kPi);
        dep.arc_deg = uniform(rng, c.arc_min_deg, c.arc_max_deg);
        dep.thickness_mm = uniform(rng, c.thickness_min_mm, c.thickness_max_mm);
        dep.gap_mm = uniform(rng, 0, c.sheet_gap_max_mm);
        dep.protrusion = plan.phenotype == Phenotype::nodule ? uniform(rng, 0.2, 0.4) : uniform(rng, 0.08, 0.2);

        std::vector<DepositFrame> per(static_cast<std::size_t>(frames));
        for (int f = dep.first; f <= dep.last; ++f) {
            const double taper = std::sqrt(std::sin(kPi * (f - dep.first + 0.5) / len));
            const double jitter = uniform(rng, -c.arc_jitter, c.arc_jitter);
            const double tj = uniform(rng, -0.15, 0.15);
            if (uniform01(rng) < c.frame_dropout) continue;
            auto& df = per[static_cast<std::size_t>(f)];
            df.present = true;
            const double arc = std::clamp(dep.arc_deg * taper * (1 + jitter), 5.0, 360.0);
            df.half_arc_rad = arc / 360.0 * kPi;
            df.thickness_mm = std::max(c.pixel_spacing_mm, dep.thickness_mm * (0.8 + 0.2 * taper) * (1 + tj));
        }
        g.deposits.push_back(dep);
        g.frames.push_back(std::move(per));
    }
    return g;
}

}  // namespace

SynthConfig SynthConfig::phenotype_sensitive() {
    SynthConfig c;
    c.phenotype_gain = {1.6, 1.3, 0.7};
    return c;
}

void validate(const SynthConfig& c) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("synth config: " + m); };
    if (c.n_lesions < 1) fail("n_lesions must be positive");
    if (c.image_size_px < 16) fail("image size too small");
    if (!(c.pixel_spacing_mm > 0) || !(c.frame_pitch_mm > 0)) fail("spacing and pitch must be positive");
    if (c.lesion_frames_min < 1 || c.lesion_frames_max < c.lesion_frames_min) fail("bad lesion frame range");
    if (c.margin_frames < 1) fail("margin_frames must be positive");
    if (!(c.lumen_radius_min_mm > 0) || c.lumen_radius_max_mm < c.lumen_radius_min_mm) fail("bad lumen radius range");
    if (c.stenosis_min < 0 || c.stenosis_max < c.stenosis_min) fail("bad stenosis range");
    if (c.stenosis_max >= 1) fail("stenosis depth must stay below the lumen radius (area loss < 1)");
    if (c.ellipticity_max < 0 || c.ellipticity_max >= 1) fail("ellipticity must lie in [0, 1)");
    if (c.calc_probability < 0 || c.calc_probability > 1) fail("calc_probability must lie in [0, 1]");
    if (c.deposits_min < 1 || c.deposits_max < c.deposits_min) fail("bad deposit count range");
    if (c.deposit_frames_min < 1 || c.deposit_frames_max < c.deposit_frames_min) fail("bad deposit length range");
    if (c.deposit_frames_min > c.lesion_frames_min) fail("deposits longer than the shortest lesion");
    if (!(c.arc_min_deg > 0) || c.arc_max_deg < c.arc_min_deg || c.arc_max_deg > 360) fail("bad arc range");
    if (c.arc_jitter < 0 || c.arc_jitter >= 1) fail("arc_jitter must lie in [0, 1)");
    if (c.frame_dropout < 0 || c.frame_dropout >= 1) fail("frame_dropout must lie in [0, 1)");
    if (!(c.thickness_min_mm > 0) || c.thickness_max_mm < c.thickness_min_mm) fail("bad thickness range");
    if (c.sheet_gap_max_mm < 0) fail("sheet gap must be non-negative");
    double mix = 0;
    for (double p : c.phenotype_mix) {
        if (p < 0) fail("phenotype proportions must be non-negative");
        mix += p;
    }
    if (std::abs(mix - 1) > 1e-9) fail("phenotype proportions must sum to 1");
    for (double g : c.phenotype_gain)
        if (g < 0) fail("phenotype gains must be non-negative");
    if (c.second_lesion_probability < 0 || c.second_lesion_probability > 1) fail("bad second-lesion probability");
    if (c.noise_sd_fraction < 0 || (c.noise_sd_mm2 && *c.noise_sd_mm2 < 0)) fail("noise must be non-negative");
    if (c.surrogate.beta < 0 || c.surrogate.beta >= 1) fail("beta must lie in [0, 1)");
    if (!(c.surrogate.thickness_ref_mm > 0) || !(c.surrogate.depth_ref_mm > 0) || c.surrogate.window_w < 0)
        fail("bad surrogate parameters");
    const double outer = c.lumen_radius_max_mm / std::sqrt(1 - c.ellipticity_max) + c.sheet_gap_max_mm +
                         c.thickness_max_mm * 1.15;
    if (outer >= (c.image_size_px / 2 - 1) * c.pixel_spacing_mm) fail("vessel does not fit in the image");
}

std::vector<double> surrogate_post_area(std::span<const double> arc, std::span<const double> thick,
                                        std::span<const double> depth, double ref_area, const SurrogateParams& p,
                                        double gain) {
    if (arc.size() != thick.size() || arc.size() != depth.size())
        throw std::invalid_argument("surrogate inputs differ in length");
    const auto n = static_cast<int>(arc.size());
    std::vector<double> term(arc.size());
    for (std::size_t g = 0; g < arc.size(); ++g)
        term[g] = (arc[g] / 360.0) * std::min(thick[g] / p.thickness_ref_mm, 1.0) *
                  (1.0 - 0.5 * std::min(depth[g] / p.depth_ref_mm, 1.0));
    std::vector<double> out(arc.size());
    for (int f = 0; f < n; ++f) {
        const int lo = std::max(0, f - p.window_w), hi = std::min(n - 1, f + p.window_w);
        double sum = 0;
        for (int g = lo; g <= hi; ++g) sum += term[static_cast<std::size_t>(g)];
        const double r = sum / (hi - lo + 1);
        out[static_cast<std::size_t>(f)] = ref_area * (1.0 - p.beta * std::min(gain * r, 1.0));
    }
    return out;
}

std::vector<SynthPlanEntry> plan_dataset(const SynthConfig& c) {
    validate(c);
    std::vector<SynthPlanEntry> plan;
    Rng rng(derive_seed(c.seed, 0xfeed));
    // golden-ratio sequence keeps realized phenotype shares close to the mix
    double u = uniform01(rng);
    int patient = 0;
    while (static_cast<int>(plan.size()) < c.n_lesions) {
        const int count = uniform01(rng) < c.second_lesion_probability ? 2 : 1;
        for (int k = 0; k < count && static_cast<int>(plan.size()) < c.n_lesions; ++k) {
            SynthPlanEntry e;
            const int i = static_cast<int>(plan.size());
            e.lesion_id = padded('L', i);
            e.patient_id = padded('P', patient);
            e.seed = derive_seed(c.seed, static_cast<std::uint64_t>(i));
            u = std::fmod(u + 0.6180339887498949, 1.0);
            e.phenotype = u < c.phenotype_mix[0]                        ? Phenotype::nodule
                          : u < c.phenotype_mix[0] + c.phenotype_mix[1] ? Phenotype::protrusion
                                                                        : Phenotype::sheet;
            e.calcified = uniform01(rng) < c.calc_probability;
            plan.push_back(std::move(e));
        }
        ++patient;
    }
    return plan;
}

SynthLesion generate_lesion(const SynthConfig& c, const SynthPlanEntry& plan) {
    validate(c);
    Rng rng(plan.seed);
    const int lesion_len = static_cast<int>(uniform_int(rng, c.lesion_frames_min, c.lesion_frames_max));
    const int frames = lesion_len + 2 * c.margin_frames;
    const int ls = c.margin_frames, le = ls + lesion_len - 1;
    const auto geom = plan_geometry(c, plan, lesion_len, rng);

    SynthLesion out;
    auto& meta = out.pre.meta;
    meta.pullback_id = plan.lesion_id;
    meta.phase = Phase::pre;
    meta.frame_count = frames;
    meta.frame_pitch_mm = c.frame_pitch_mm;
    meta.pixel_spacing_mm = c.pixel_spacing_mm;
    meta.lesion_start_frame = ls;
    meta.lesion_end_frame = le;
    meta.stent_start_frame = ls;
    meta.stent_end_frame = le;
    if (plan.calcified) meta.phenotype = plan.phenotype;
    meta.patient_id = plan.patient_id;

    const auto grid = polar_grid(c.image_size_px, c.pixel_spacing_mm);
    for (int f = 0; f < frames; ++f) out.pre.frames.push_back(rasterize(c, geom, plan.phenotype, f, grid));

    const auto areas = lumen_areas(out.pre);
    out.reference_area_mm2 = areas.front();
    out.noise_sd_mm2 = c.noise_sd_mm2.value_or(c.noise_sd_fraction * out.reference_area_mm2);

    std::vector<double> arc, thick, depth;
    for (int f = ls; f <= le; ++f) {
        const auto cf = compute_calc_frame_features(out.pre.frames[static_cast<std::size_t>(f)], c.pixel_spacing_mm, f);
        arc.push_back(cf.max_arc_angle_deg);
        thick.push_back(cf.max_thickness_mm);
        depth.push_back(cf.max_depth_mm);
    }
    const double gain = plan.calcified ? c.phenotype_gain[static_cast<std::size_t>(plan.phenotype)] : 1.0;
    const auto surrogate = surrogate_post_area(arc, thick, depth, out.reference_area_mm2, c.surrogate, gain);

    Rng noise(derive_seed(plan.seed, 1));
    out.surrogate = areas;
    out.post_areas = areas;
    for (int f = ls; f <= le; ++f) {
        const double s = surrogate[static_cast<std::size_t>(f - ls)];
        out.surrogate[static_cast<std::size_t>(f)] = s;
        // floor keeps heavy noise from producing a non-positive area
        out.post_areas[static_cast<std::size_t>(f)] =
            std::max(0.05 * out.reference_area_mm2, s + out.noise_sd_mm2 * standard_normal(noise));
    }
    return out;
}

SynthDataset synthesize_records(const SynthConfig& c) {
    SynthDataset ds;
    for (const auto& p : plan_dataset(c)) {
        const auto lesion = generate_lesion(c, p);
        ds.records.push_back(extract_lesion(lesion.pre, lesion.post_areas, p.lesion_id));
        ds.noise_sd.push_back(lesion.noise_sd_mm2);
    }
    return ds;
}

std::string config_json(const SynthConfig& c) {
    nlohmann::json j;
    j["n_lesions"] = c.n_lesions;
    j["seed"] = c.seed;
    j["image_size_px"] = c.image_size_px;
    j["pixel_spacing_mm"] = c.pixel_spacing_mm;
    j["frame_pitch_mm"] = c.frame_pitch_mm;
    j["lesion_frames"] = {c.lesion_frames_min, c.lesion_frames_max};
    j["margin_frames"] = c.margin_frames;
    j["lumen_radius_mm"] = {c.lumen_radius_min_mm, c.lumen_radius_max_mm};
    j["stenosis"] = {c.stenosis_min, c.stenosis_max};
    j["ellipticity_max"] = c.ellipticity_max;
    j["calc_probability"] = c.calc_probability;
    j["deposits"] = {c.deposits_min, c.deposits_max};
    j["deposit_frames"] = {c.deposit_frames_min, c.deposit_frames_max};
    j["arc_deg"] = {c.arc_min_deg, c.arc_max_deg};
    j["arc_jitter"] = c.arc_jitter;
    j["frame_dropout"] = c.frame_dropout;
    j["thickness_mm"] = {c.thickness_min_mm, c.thickness_max_mm};
    j["sheet_gap_max_mm"] = c.sheet_gap_max_mm;
    j["phenotype_mix"] = c.phenotype_mix;
    j["phenotype_gain"] = c.phenotype_gain;
    j["second_lesion_probability"] = c.second_lesion_probability;
    j["noise_sd_fraction"] = c.noise_sd_fraction;
    j["noise_sd_mm2"] = c.noise_sd_mm2 ? nlohmann::json(*c.noise_sd_mm2) : nlohmann::json(nullptr);
    j["surrogate"] = {{"beta", c.surrogate.beta},
                      {"thickness_ref_mm", c.surrogate.thickness_ref_mm},
                      {"depth_ref_mm", c.surrogate.depth_ref_mm},
                      {"window_w", c.surrogate.window_w}};
    return j.dump(2);
}

void generate_dataset(const SynthConfig& c, const fs::path& out) {
    const auto plan = plan_dataset(c);
    fs::create_directories(out / "lesions");
    std::ofstream truth(out / "truth.csv", std::ios::binary);
    if (!truth) throw DataError("cannot write " + (out / "truth.csv").string());
    truth << "lesion_id,frame,post_area_mm2,phenotype\n";
    for (const auto& p : plan) {
        const auto lesion = generate_lesion(c, p);
        save_pullback(lesion.pre, out / "lesions" / p.lesion_id / "pre");
        const std::string pheno = lesion.pre.meta.phenotype ? std::string(to_string(*lesion.pre.meta.phenotype)) : "";
        for (std::size_t f = 0; f < lesion.post_areas.size(); ++f)
            truth << p.lesion_id << ',' << f << ',' << format_number(lesion.post_areas[f]) << ',' << pheno << '\n';
    }
    nlohmann::json echo;
    echo["command"] = "synth";
    echo["config"] = nlohmann::json::parse(config_json(c));
    std::ofstream(out / "config_echo.json", std::ios::binary) << echo.dump(2) << '\n';
}

}  // namespace stentx
