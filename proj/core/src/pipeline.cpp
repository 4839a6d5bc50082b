#include "stentx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "binio.hpp"
#include "stentx/error.hpp"
#include "stentx/rng.hpp"

namespace stentx {

std::string_view to_string(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::all: return "all";
        case FeatureGroup::lasso_selected: return "lasso_selected";
        case FeatureGroup::cle: return "cle";
        case FeatureGroup::cle_top20: return "cle_top20";
    }
    return "cle";
}

FeatureGroup parse_feature_group(std::string_view s) {
    if (s == "all") return FeatureGroup::all;
    if (s == "lasso_selected") return FeatureGroup::lasso_selected;
    if (s == "cle") return FeatureGroup::cle;
    if (s == "cle_top20") return FeatureGroup::cle_top20;
    throw std::invalid_argument("unknown feature group '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> phenotype_names(const FeatureSchema& s) {
    std::vector<std::string> out;
    for (const auto& c : s.columns())
        if (c.group == ColumnGroup::phenotype) out.push_back(c.name);
    return out;
}

std::vector<std::string> without_phenotype(const std::vector<std::string>& names, const FeatureSchema& s) {
    std::vector<std::string> out;
    for (const auto& n : names)
        if (s[*s.index_of(n)].group != ColumnGroup::phenotype) out.push_back(n);
    return out;
}

}  // namespace

FittedPipeline fit_pipeline(std::span<const LesionRecord> train, const PipelineConfig& config, std::uint64_t seed) {
    if (train.empty()) throw std::invalid_argument("fit_pipeline: no training lesions");
    FittedPipeline p;
    p.config = config;
    p.schema_fingerprint = make_schema(config.assembly).fingerprint();

    const auto lesions = lesion_features(train);
    FeatureMatrix x;
    try {
        x = assemble(lesions, config.assembly);
    } catch (const DataError& e) {
        throw StageError("assemble", e.what());
    }
    if (x.rows() < 2) throw StageError("assemble", "fewer than 2 training rows with known targets");
    p.normalizer = fit_normalizer(x);
    const auto xn = apply_normalizer(p.normalizer, x);

    const auto pheno = phenotype_names(xn.schema);
    auto with_pheno = [&](std::vector<std::string> cols) {
        cols.insert(cols.end(), pheno.begin(), pheno.end());
        return cols;
    };
    auto ranked_lasso = [&](const std::vector<std::string>& cols) {
        const auto sub = xn.select_columns(cols);
        auto model = fit_lasso(sub, {}, derive_seed(seed, 101), config.lasso);
        p.lasso_ranking = rank_features(model);
        return model;
    };
    switch (config.group) {
        case FeatureGroup::all: p.selected = xn.schema.names(); break;
        case FeatureGroup::cle: p.selected = cle_columns(config.assembly); break;
        case FeatureGroup::lasso_selected: {
            const auto model = ranked_lasso(without_phenotype(xn.schema.names(), xn.schema));
            auto active = model.active_set;
            if (active.empty()) active.push_back(p.lasso_ranking.front());
            p.selected = with_pheno(active);
            break;
        }
        case FeatureGroup::cle_top20: {
            ranked_lasso(without_phenotype(cle_columns(config.assembly), xn.schema));
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.top_k), p.lasso_ranking.size());
            p.selected = with_pheno({p.lasso_ranking.begin(), p.lasso_ranking.begin() + static_cast<std::ptrdiff_t>(k)});
            break;
        }
    }
    try {
        p.model = fit_model(config.model, xn.select_columns(p.selected), config.model_config, derive_seed(seed, 202));
    } catch (const std::exception& e) {
        throw StageError("fit", e.what());
    }
    return p;
}

FeatureMatrix design_matrix(const FittedPipeline& p, std::span<const LesionFeatures> lesions) {
    const auto x = assemble(lesions, p.config.assembly);
    return apply_normalizer(p.normalizer, x).select_columns(p.selected);
}

std::vector<LesionPrediction> predict_lesions(const FittedPipeline& p, std::span<const LesionRecord> lesions,
                                              double threshold) {
    std::vector<LesionPrediction> out;
    for (const auto& rec : lesions) {
        LesionFeatures lf = rec.features;
        const auto post = std::move(lf.post_areas);
        lf.post_areas.clear();
        const auto x = design_matrix(p, std::span(&lf, 1));
        const Eigen::VectorXd pred = predict(p.model, x);

        LesionPrediction lp;
        lp.lesion_id = lf.lesion_id;
        const auto [r0, r1] = lf.row_span();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const int f = x.frame_index[i];
            lp.frames.push_back(f);
            lp.predicted_area.push_back(pred(static_cast<Eigen::Index>(i)));
            double actual = std::numeric_limits<double>::quiet_NaN();
            if (!post.empty()) {
                if (f >= 0) {
                    actual = post[static_cast<std::size_t>(f)];
                } else {
                    for (int g = r0; g <= r1; ++g) {
                        const double a = post[static_cast<std::size_t>(g)];
                        if (std::isfinite(a) && !(a >= actual)) actual = a;
                    }
                }
            }
            lp.actual_area.push_back(actual);
        }
        std::vector<double> positive;
        for (double a : lp.predicted_area) positive.push_back(std::max(a, 1e-9));
        lp.predicted = compute_sei_curve(positive, rec.pre_refs, lp.frames.front() >= 0 ? lp.frames.front() : r0,
                                         threshold);
        out.push_back(std::move(lp));
    }
    return out;
}

namespace {
constexpr char kMagic[4] = {'S', 'T', 'X', 'M'};
constexpr std::uint64_t kVersion = 1;
}  // namespace

void write_pipeline(const FittedPipeline& p, std::ostream& out) {
    using namespace binio;
    out.write(kMagic, 4);
    put_u64(out, kVersion);
    put_u64(out, p.schema_fingerprint);
    put_str(out, std::string(to_string(p.config.assembly.mode)));
    put_i64(out, p.config.assembly.segment_length);
    put_u64(out, p.config.assembly.include_phenotype ? 1 : 0);
    put_str(out, std::string(to_string(p.config.group)));
    put_strs(out, p.normalizer.names);
    put_doubles(out, p.normalizer.min);
    put_doubles(out, p.normalizer.max);
    put_u64(out, p.normalizer.exempt.size());
    for (bool e : p.normalizer.exempt) put_u64(out, e ? 1 : 0);
    put_strs(out, p.selected);
    put_strs(out, p.lasso_ranking);
    write_model(p.model, out);
}

FittedPipeline read_pipeline(std::istream& in) {
    using namespace binio;
    char magic[4];
    if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw DataError("not a stentx pipeline file");
    if (const auto v = get_u64(in); v != kVersion)
        throw DataError("unsupported pipeline file version " + std::to_string(v));
    FittedPipeline p;
    p.schema_fingerprint = get_u64(in);
    try {
        p.config.assembly.mode = parse_mode(get_str(in));
        p.config.assembly.segment_length = static_cast<int>(get_i64(in));
        p.config.assembly.include_phenotype = get_u64(in) != 0;
        p.config.group = parse_feature_group(get_str(in));
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("corrupt pipeline file: ") + e.what());
    }
    if (make_schema(p.config.assembly).fingerprint() != p.schema_fingerprint)
        throw DataError("pipeline file was written for a different feature schema");
    p.normalizer.names = get_strs(in);
    p.normalizer.min = get_doubles(in);
    p.normalizer.max = get_doubles(in);
    p.normalizer.exempt.resize(get_size(in));
    for (std::size_t i = 0; i < p.normalizer.exempt.size(); ++i) p.normalizer.exempt[i] = get_u64(in) != 0;
    p.selected = get_strs(in);
    p.lasso_ranking = get_strs(in);
    p.model = read_model(in);
    p.config.model = p.model.kind;
    const auto n = p.normalizer.names.size();
    if (p.normalizer.min.size() != n || p.normalizer.max.size() != n || p.normalizer.exempt.size() != n ||
        p.normalizer.names != make_schema(p.config.assembly).names())
        throw DataError("pipeline normalizer does not match its feature schema");
    if (p.model.feature_names != p.selected) throw DataError("pipeline model does not match its selected columns");
    return p;
}

void save_pipeline(const FittedPipeline& p, const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    write_pipeline(p, out);
}

FittedPipeline load_pipeline(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open " + file.string());
    return read_pipeline(in);
}

}  // namespace stentx
