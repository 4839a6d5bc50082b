#include "stentx/pullback.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include "stentx/error.hpp"

namespace fs = std::filesystem;

namespace stentx {

std::string_view to_string(Phase p) { return p == Phase::pre ? "pre" : "post"; }

std::string_view to_string(Phenotype p) {
    switch (p) {
        case Phenotype::nodule: return "nodule";
        case Phenotype::protrusion: return "protrusion";
        case Phenotype::sheet: return "sheet";
    }
    return "sheet";
}

Phase parse_phase(std::string_view s) {
    if (s == "pre") return Phase::pre;
    if (s == "post") return Phase::post;
    throw DataError("invalid phase '" + std::string(s) + "'", std::nullopt, "phase");
}

Phenotype parse_phenotype(std::string_view s) {
    if (s == "nodule") return Phenotype::nodule;
    if (s == "protrusion") return Phenotype::protrusion;
    if (s == "sheet") return Phenotype::sheet;
    throw DataError("invalid phenotype '" + std::string(s) + "'", std::nullopt, "phenotype");
}

FrameMask::FrameMask(int width, int height)
    : width_(width), height_(height),
      labels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("FrameMask: non-positive size");
}

std::size_t FrameMask::count(Label l) const {
    const auto v = static_cast<std::uint8_t>(l);
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), v));
}

void validate_meta(const PullbackMeta& m) {
    if (m.frame_count <= 0) throw DataError("frame_count must be positive", std::nullopt, "frame_count");
    if (!(m.frame_pitch_mm > 0)) throw DataError("frame_pitch_mm must be > 0", std::nullopt, "frame_pitch_mm");
    if (!(m.pixel_spacing_mm > 0))
        throw DataError("pixel_spacing_mm must be > 0", std::nullopt, "pixel_spacing_mm");
    if (m.lesion_start_frame < 0)
        throw DataError("lesion_start_frame must be >= 0", std::nullopt, "lesion_start_frame");
    if (m.lesion_end_frame < m.lesion_start_frame)
        throw DataError("lesion_end_frame precedes lesion_start_frame", std::nullopt, "lesion_end_frame");
    if (m.lesion_end_frame >= m.frame_count)
        throw DataError("lesion_end_frame beyond frame_count", std::nullopt, "lesion_end_frame");
    if (m.stent_start_frame.has_value() != m.stent_end_frame.has_value())
        throw DataError("stent bounds must be given together", std::nullopt,
                        m.stent_start_frame ? "stent_end_frame" : "stent_start_frame");
    if (m.phase == Phase::post && !m.has_stent())
        throw DataError("post-stent pullback requires stent bounds", std::nullopt, "stent_start_frame");
    if (m.has_stent()) {
        if (*m.stent_start_frame < 0 || *m.stent_start_frame >= m.frame_count)
            throw DataError("stent_start_frame out of range", std::nullopt, "stent_start_frame");
        if (*m.stent_end_frame < *m.stent_start_frame || *m.stent_end_frame >= m.frame_count)
            throw DataError("stent_end_frame out of range", std::nullopt, "stent_end_frame");
    }
}

void validate(const Pullback& p) {
    validate_meta(p.meta);
    if (static_cast<int>(p.frames.size()) != p.meta.frame_count)
        throw DataError("frame count mismatch: meta says " + std::to_string(p.meta.frame_count) +
                            ", have " + std::to_string(p.frames.size()),
                        std::nullopt, "frame_count");
    for (int i = 0; i < p.meta.frame_count; ++i) {
        const auto& f = p.frames[static_cast<std::size_t>(i)];
        if (f.width() != p.frames.front().width() || f.height() != p.frames.front().height())
            throw DataError("frame " + std::to_string(i) + " size differs from frame 0", i, "frames");
        for (auto v : f.raw())
            if (v > 2)
                throw DataError("frame " + std::to_string(i) + " has label value " + std::to_string(v), i,
                                "labels");
        if (i >= p.meta.lesion_start_frame && i <= p.meta.lesion_end_frame && f.count(Label::lumen) == 0)
            throw DataError("frame " + std::to_string(i) + " inside the lesion has no lumen", i, "labels");
    }
}

namespace {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw DataError("field '" + key + "' is not an integer: '" + v + "'", std::nullopt, key);
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw DataError("field '" + key + "' is not a number: '" + v + "'", std::nullopt, key);
    }
}

std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    const auto e = s.find_last_not_of(ws);
    s.erase(e == std::string::npos ? 0 : e + 1);
    return s;
}

std::string frame_filename(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.pgm", i);
    return buf;
}

}  // namespace

PullbackMeta read_meta(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string(), std::nullopt, "meta.txt");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed meta line: '" + line + "'", std::nullopt, "meta.txt");
        auto key = trim(line.substr(0, eq));
        if (kv.contains(key)) throw DataError("duplicate meta key '" + key + "'", std::nullopt, key);
        kv[key] = trim(line.substr(eq + 1));
    }

    PullbackMeta m;
    auto take = [&](const std::string& key, bool required) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) {
            if (required) throw DataError("missing meta field '" + key + "'", std::nullopt, key);
            if (it != kv.end()) kv.erase(it);
            return std::nullopt;
        }
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    m.pullback_id = *take("pullback_id", true);
    m.phase = parse_phase(*take("phase", true));
    m.frame_count = parse_int("frame_count", *take("frame_count", true));
    if (auto v = take("frame_pitch_mm", false)) m.frame_pitch_mm = parse_real("frame_pitch_mm", *v);
    m.pixel_spacing_mm = parse_real("pixel_spacing_mm", *take("pixel_spacing_mm", true));
    m.lesion_start_frame = parse_int("lesion_start_frame", *take("lesion_start_frame", true));
    m.lesion_end_frame = parse_int("lesion_end_frame", *take("lesion_end_frame", true));
    if (auto v = take("stent_start_frame", false)) m.stent_start_frame = parse_int("stent_start_frame", *v);
    if (auto v = take("stent_end_frame", false)) m.stent_end_frame = parse_int("stent_end_frame", *v);
    if (auto v = take("phenotype", false)) m.phenotype = parse_phenotype(*v);
    m.patient_id = take("patient_id", false).value_or("");
    if (!kv.empty()) throw DataError("unknown meta field '" + kv.begin()->first + "'", std::nullopt, kv.begin()->first);
    validate_meta(m);
    return m;
}

void write_meta(const PullbackMeta& m, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << "pullback_id=" << m.pullback_id << '\n'
        << "phase=" << to_string(m.phase) << '\n'
        << "frame_count=" << m.frame_count << '\n'
        << "frame_pitch_mm=" << format_real(m.frame_pitch_mm) << '\n'
        << "pixel_spacing_mm=" << format_real(m.pixel_spacing_mm) << '\n'
        << "lesion_start_frame=" << m.lesion_start_frame << '\n'
        << "lesion_end_frame=" << m.lesion_end_frame << '\n';
    if (m.stent_start_frame) out << "stent_start_frame=" << *m.stent_start_frame << '\n';
    if (m.stent_end_frame) out << "stent_end_frame=" << *m.stent_end_frame << '\n';
    if (m.phenotype) out << "phenotype=" << to_string(*m.phenotype) << '\n';
    out << "patient_id=" << m.patient_id << '\n';
}

FrameMask read_pgm(const fs::path& file, int frame_index) {
    const std::optional<int> frame = frame_index >= 0 ? std::optional<int>(frame_index) : std::nullopt;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open " + file.string(), frame, "frames");

    auto next_token = [&]() {
        std::string tok;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(c);
        }
        return tok;
    };
    if (next_token() != "P5") throw DataError(file.string() + " is not a binary PGM (P5)", frame, "frames");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw DataError(file.string() + ": malformed PGM header", frame, "frames");
    }
    if (w <= 0 || h <= 0 || maxval != 255)
        throw DataError(file.string() + ": unsupported PGM geometry or maxval", frame, "frames");

    FrameMask mask(w, h);
    in.read(reinterpret_cast<char*>(mask.raw().data()), static_cast<std::streamsize>(mask.raw().size()));
    if (in.gcount() != static_cast<std::streamsize>(mask.raw().size()))
        throw DataError(file.string() + ": truncated pixel data", frame, "frames");
    for (auto v : mask.raw())
        if (v > 2)
            throw DataError("frame " + std::to_string(frame_index) + " has label value " + std::to_string(v),
                            frame, "labels");
    return mask;
}

void write_pgm(const FrameMask& mask, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.raw().data()), static_cast<std::streamsize>(mask.raw().size()));
}

Pullback load_pullback(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a pullback directory: " + dir.string());
    Pullback p;
    p.meta = read_meta(dir / "meta.txt");

    static const std::regex frame_re(R"(frame_(\d{4})\.pgm)");
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (std::regex_match(name, m, frame_re)) {
            const int idx = std::stoi(m[1].str());
            if (idx >= p.meta.frame_count)
                throw DataError("extra frame file " + name + " (index " + std::to_string(idx) + ")", idx, "frames");
        }
    }
    p.frames.reserve(static_cast<std::size_t>(p.meta.frame_count));
    for (int i = 0; i < p.meta.frame_count; ++i) {
        const auto f = dir / frame_filename(i);
        if (!fs::exists(f))
            throw DataError("missing frame file " + frame_filename(i) + " (index " + std::to_string(i) + ")", i,
                            "frames");
        p.frames.push_back(read_pgm(f, i));
    }
    validate(p);
    return p;
}

void save_pullback(const Pullback& p, const fs::path& dir) {
    validate(p);
    fs::create_directories(dir);
    write_meta(p.meta, dir / "meta.txt");
    for (int i = 0; i < p.meta.frame_count; ++i) write_pgm(p.frames[static_cast<std::size_t>(i)], dir / frame_filename(i));
}

std::vector<std::string> validate_pair(const Pullback& pre, const Pullback& post) {
    std::vector<std::string> report;
    if (pre.meta.patient_id != post.meta.patient_id)
        report.push_back("patient_id mismatch: '" + pre.meta.patient_id + "' vs '" + post.meta.patient_id + "'");
    if (pre.meta.pixel_spacing_mm != post.meta.pixel_spacing_mm)
        report.push_back("pixel_spacing_mm mismatch: " + format_real(pre.meta.pixel_spacing_mm) + " vs " +
                         format_real(post.meta.pixel_spacing_mm));
    if (!post.meta.has_stent()) report.push_back("post pullback lacks stent bounds");
    if (pre.meta.phase != Phase::pre) report.push_back("first pullback is not a pre-stent acquisition");
    if (post.meta.phase != Phase::post) report.push_back("second pullback is not a post-stent acquisition");
    return report;
}

FrameMask rotate_mask(const FrameMask& mask, double degrees) {
    const double r = std::fmod(degrees, 360.0);
    if (r == 0.0) return mask;
    const double rad = r * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double cx = (mask.width() - 1) / 2.0, cy = (mask.height() - 1) / 2.0;
    FrameMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            // inverse map: source = R(-theta) * (dst - c) + c
            const double dx = x - cx, dy = y - cy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            const auto ix = static_cast<int>(std::lround(sx));
            const auto iy = static_cast<int>(std::lround(sy));
            if (ix >= 0 && iy >= 0 && ix < mask.width() && iy < mask.height()) out.set(x, y, mask.at(ix, iy));
        }
    }
    return out;
}

int aligned_frame_origin(const RegistrationTransform& t) { return std::max(0, -t.z_offset_frames); }

Pullback align_post_to_pre(const Pullback& post, const RegistrationTransform& t) {
    const int n = post.meta.frame_count;
    const int z = t.z_offset_frames;
    if (std::abs(z) >= n)
        throw DataError("z offset magnitude " + std::to_string(std::abs(z)) + " >= frame_count " + std::to_string(n),
                        std::nullopt, "z_offset_frames");
    if (!(t.rotation_deg >= 0.0 && t.rotation_deg < 360.0))
        throw DataError("rotation_deg must lie in [0, 360)", std::nullopt, "rotation_deg");

    // Pre frame p <-> input frame p + z; keep p with p + z in range, renumber from origin.
    const int origin = aligned_frame_origin(t);
    const int first_src = origin + z;
    const int count = n - std::abs(z);

    Pullback out;
    out.meta = post.meta;
    out.meta.frame_count = count;
    out.frames.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.frames.push_back(rotate_mask(post.frames[static_cast<std::size_t>(first_src + i)], t.rotation_deg));

    auto shift = [&](int src) { return src - first_src; };
    auto clamp_range = [&](int a, int b, const char* field) {
        a = shift(a);
        b = shift(b);
        if (b < 0 || a >= count)
            throw DataError(std::string(field) + " falls outside the aligned frame range", std::nullopt, field);
        return std::pair{std::max(a, 0), std::min(b, count - 1)};
    };
    auto [ls, le] = clamp_range(post.meta.lesion_start_frame, post.meta.lesion_end_frame, "lesion_start_frame");
    out.meta.lesion_start_frame = ls;
    out.meta.lesion_end_frame = le;
    if (post.meta.has_stent()) {
        auto [ss, se] = clamp_range(*post.meta.stent_start_frame, *post.meta.stent_end_frame, "stent_start_frame");
        out.meta.stent_start_frame = ss;
        out.meta.stent_end_frame = se;
    }
    return out;
}

std::vector<double> post_areas_in_pre_frames(const Pullback& post, const RegistrationTransform& t,
                                             int pre_frame_count) {
    const double px = post.meta.pixel_spacing_mm * post.meta.pixel_spacing_mm;
    std::vector<double> out(static_cast<std::size_t>(pre_frame_count), std::numeric_limits<double>::quiet_NaN());
    for (int p = 0; p < pre_frame_count; ++p) {
        const int src = p + t.z_offset_frames;
        if (src >= 0 && src < post.meta.frame_count)
            out[static_cast<std::size_t>(p)] =
                static_cast<double>(post.frames[static_cast<std::size_t>(src)].count(Label::lumen)) * px;
    }
    return out;
}

std::vector<double> lumen_areas(const Pullback& pullback) {
    const double px = pullback.meta.pixel_spacing_mm * pullback.meta.pixel_spacing_mm;
    std::vector<double> out;
    out.reserve(pullback.frames.size());
    for (const auto& f : pullback.frames) out.push_back(static_cast<double>(f.count(Label::lumen)) * px);
    return out;
}

}  // namespace stentx
