#include "stentx/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>

#include "stentx/error.hpp"
#include "stentx/rng.hpp"
#include "stentx/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace stentx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
std::vector<T> pick(std::span<const T> items, std::span<const std::size_t> idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(items[i]);
    return out;
}

std::vector<std::string> ids_of(std::span<const LesionRecord> recs) {
    std::vector<std::string> out;
    for (const auto& r : recs) out.push_back(r.features.lesion_id);
    return out;
}

struct Scored {
    RegressionMetrics regression;
    ClassificationMetrics classification;
    std::vector<LesionPrediction> predictions;
    std::vector<double> predicted_msei, actual_msei;
};

Scored score(const FittedPipeline& p, std::span<const LesionRecord> recs, double threshold) {
    Scored s;
    s.predictions = predict_lesions(p, recs, threshold);
    std::vector<double> actual, predicted;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& lp = s.predictions[i];
        for (std::size_t k = 0; k < lp.frames.size(); ++k)
            if (std::isfinite(lp.actual_area[k])) {
                actual.push_back(lp.actual_area[k]);
                predicted.push_back(lp.predicted_area[k]);
            }
        s.predicted_msei.push_back(lp.predicted.msei);
        s.actual_msei.push_back(recs[i].actual->msei);
    }
    s.regression = regression_metrics(actual, predicted);
    s.classification = classification_metrics(s.predicted_msei, s.actual_msei, threshold);
    return s;
}

double auc_or_nan(std::span<const double> scores, std::span<const double> actual_msei, double threshold) {
    std::vector<int> labels;
    for (double m : actual_msei) labels.push_back(m < threshold ? 1 : 0);
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) return kNaN;
    return roc_auc(scores, labels).auc;
}

// Fujino-ML: the three rule inputs regressed on the measured mSEI. They
// carry no vessel-size information, so an absolute area target would
// mostly fit reference-area spread.
std::vector<double> fujino_ml_predict(std::span<const LesionRecord> train, std::span<const LesionRecord> test,
                                      const ExperimentConfig& c, std::uint64_t seed) {
    auto x = fujino_ml_features(lesion_features(train));
    for (std::size_t i = 0; i < train.size(); ++i) x.target[i] = train[i].actual->msei;
    const auto model = fit_model(c.pipeline.model, x, c.pipeline.model_config, seed);
    auto test_features = lesion_features(test);
    for (auto& lf : test_features) lf.post_areas.clear();
    const Eigen::VectorXd pred = predict(model, fujino_ml_features(test_features));
    return {pred.data(), pred.data() + pred.size()};
}

std::vector<double> fujino_points(std::span<const LesionRecord> recs, const FujinoConfig& c) {
    std::vector<double> out;
    for (const auto& r : recs) out.push_back(fujino_score(r.features, c).points);
    return out;
}

json metrics_json(const RegressionMetrics& m) {
    return {{"rmse_mm2", m.rmse_mm2},
            {"pearson_r", m.pearson_r},
            {"pearson_undefined", m.pearson_undefined},
            {"bias_mm2", m.bias_mm2},
            {"residual_sd_mm2", m.residual_sd_mm2},
            {"n", m.n}};
}

json metrics_json(const ClassificationMetrics& m) {
    json roc = json::array();
    for (const auto& [x, y] : m.roc_points) roc.push_back({x, y});
    return {{"accuracy", m.accuracy}, {"sensitivity", m.sensitivity}, {"specificity", m.specificity},
            {"auc", m.auc},           {"tp", m.tp},                   {"fp", m.fp},
            {"tn", m.tn},             {"fn", m.fn},                   {"roc_points", roc}};
}

json mean_sd_json(const std::pair<double, double>& v) { return {{"mean", v.first}, {"sd", v.second}}; }

std::string hex(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json config_json(const ExperimentConfig& c) {
    const auto& p = c.pipeline;
    json g = {{"starts", p.model_config.gpr.starts},
              {"max_evaluations", p.model_config.gpr.max_evaluations},
              {"max_active_rows", p.model_config.gpr.max_active_rows},
              {"max_search_rows", p.model_config.gpr.max_search_rows},
              {"noise_variance", p.model_config.gpr.noise_variance ? json(*p.model_config.gpr.noise_variance)
                                                                   : json(nullptr)}};
    return {{"mode", std::string(to_string(p.assembly.mode))},
            {"segment_length", p.assembly.segment_length},
            {"include_phenotype", p.assembly.include_phenotype},
            {"feature_group", std::string(to_string(p.group))},
            {"model_kind", std::string(to_string(p.model))},
            {"ridge", p.model_config.ridge},
            {"gpr", g},
            {"tree", {{"min_leaf", p.model_config.tree.min_leaf}, {"max_depth", p.model_config.tree.max_depth}}},
            {"bagged_trees", p.model_config.bagged_trees},
            {"top_k", p.top_k},
            {"seed", c.seed},
            {"folds", c.folds},
            {"train_fraction", c.train_fraction},
            {"threshold", c.threshold},
            {"fujino",
             {{"angle_deg", c.fujino.angle_deg},
              {"thickness_mm", c.fujino.thickness_mm},
              {"length_mm", c.fujino.length_mm},
              {"angle_points", c.fujino.angle_points},
              {"thickness_points", c.fujino.thickness_points},
              {"length_points", c.fujino.length_points},
              {"high_risk_points", c.fujino.high_risk_points}}},
            {"baselines", c.baselines},
            {"data", c.data_source}};
}

}  // namespace

ExperimentReport run_experiment(std::span<const LesionRecord> lesions, const ExperimentConfig& c) {
    for (const auto& r : lesions)
        if (!r.actual) throw StageError("evaluate", "lesion " + r.features.lesion_id + " has no post-stent areas");

    ExperimentReport rep;
    rep.config = c;
    std::vector<std::string> groups;
    for (const auto& r : lesions) groups.push_back(r.features.patient_id);

    HoldoutSplit split;
    try {
        split = holdout_split(groups, c.train_fraction, derive_seed(c.seed, 1));
    } catch (const std::invalid_argument& e) {
        throw StageError("split", e.what());
    }
    const auto train = pick(lesions, split.train);
    const auto heldout = pick(lesions, split.heldout);
    if (train.empty() || heldout.empty()) throw StageError("split", "train/held-out split left one side empty");
    rep.train_lesions = ids_of(train);
    rep.heldout_lesions = ids_of(heldout);

    std::vector<std::string> train_groups;
    for (const auto& r : train) train_groups.push_back(r.features.patient_id);
    FoldAssignment folds;
    try {
        folds = split_grouped_kfold(train_groups, c.folds, derive_seed(c.seed, 2));
    } catch (const std::invalid_argument& e) {
        throw StageError("split", e.what());
    }

    std::vector<double> rmse, r, bias, auc, acc;
    for (int f = 0; f < c.folds; ++f) {
        const auto tr_idx = folds.train_indices(f);
        const auto va_idx = folds.validation_indices(f);
        const auto tr = pick(std::span<const LesionRecord>(train), tr_idx);
        const auto va = pick(std::span<const LesionRecord>(train), va_idx);

        FoldResult fr;
        fr.fold = f;
        fr.train_lesions = ids_of(tr);
        fr.validation_lesions = ids_of(va);
        const auto p = fit_pipeline(tr, c.pipeline, derive_seed(c.seed, 100 + static_cast<std::uint64_t>(f)));
        const auto s = score(p, va, c.threshold);
        fr.regression = s.regression;
        fr.classification = s.classification;
        fr.normalizer_fingerprint = p.normalizer.fingerprint();
        fr.selected = p.selected;
        fr.fujino_rule_auc = fr.fujino_ml_auc = kNaN;
        if (c.baselines) {
            fr.fujino_rule_auc = auc_or_nan(fujino_points(va, c.fujino), s.actual_msei, c.threshold);
            auto ml = fujino_ml_predict(tr, va, c, derive_seed(c.seed, 200 + static_cast<std::uint64_t>(f)));
            for (auto& v : ml) v = -v;
            fr.fujino_ml_auc = auc_or_nan(ml, s.actual_msei, c.threshold);
            rep.fujino_rule.fold_auc.push_back(fr.fujino_rule_auc);
            rep.fujino_ml.fold_auc.push_back(fr.fujino_ml_auc);
        }
        rmse.push_back(s.regression.rmse_mm2);
        r.push_back(s.regression.pearson_r);
        bias.push_back(s.regression.bias_mm2);
        auc.push_back(s.classification.auc);
        acc.push_back(s.classification.accuracy);
        rep.folds.push_back(std::move(fr));
    }
    rep.cv_rmse = mean_sd(rmse);
    rep.cv_pearson = mean_sd(r);
    rep.cv_bias = mean_sd(bias);
    rep.cv_auc = mean_sd(auc);
    rep.cv_accuracy = mean_sd(acc);

    const auto final_pipeline = fit_pipeline(train, c.pipeline, derive_seed(c.seed, 3));
    rep.final_normalizer_fingerprint = final_pipeline.normalizer.fingerprint();
    rep.final_selected = final_pipeline.selected;
    rep.lasso_ranking = final_pipeline.lasso_ranking;
    auto s = score(final_pipeline, heldout, c.threshold);
    rep.heldout_regression = s.regression;
    rep.heldout_classification = s.classification;

    std::vector<double> points(heldout.size(), 0), ml(heldout.size(), kNaN);
    if (c.baselines) {
        rep.fujino_rule.cv_auc = mean_sd(rep.fujino_rule.fold_auc);
        rep.fujino_ml.cv_auc = mean_sd(rep.fujino_ml.fold_auc);
        points = fujino_points(heldout, c.fujino);
        ml = fujino_ml_predict(train, heldout, c, derive_seed(c.seed, 4));
        // points act as a risk score; fewer points read as a higher predicted SEI
        std::vector<double> rule_msei;
        for (double pt : points) rule_msei.push_back(-pt);
        rep.fujino_rule.heldout = classification_metrics(rule_msei, s.actual_msei, c.threshold);
        rep.fujino_ml.heldout = classification_metrics(ml, s.actual_msei, c.threshold);
        // rule labels: high risk <=> under-expanded
        auto& h = rep.fujino_rule.heldout;
        h.tp = h.fp = h.tn = h.fn = 0;
        for (std::size_t i = 0; i < heldout.size(); ++i) {
            const bool actual = s.actual_msei[i] < c.threshold;
            const bool predicted = fujino_score(heldout[i].features, c.fujino).high_risk;
            h.tp += actual && predicted;
            h.fn += actual && !predicted;
            h.fp += !actual && predicted;
            h.tn += !actual && !predicted;
        }
        const int n = h.tp + h.fp + h.tn + h.fn;
        h.accuracy = n ? static_cast<double>(h.tp + h.tn) / n : kNaN;
        h.sensitivity = h.tp + h.fn ? static_cast<double>(h.tp) / (h.tp + h.fn) : kNaN;
        h.specificity = h.tn + h.fp ? static_cast<double>(h.tn) / (h.tn + h.fp) : kNaN;
    }

    for (std::size_t i = 0; i < heldout.size(); ++i) {
        LesionOutcome o;
        const auto& lf = heldout[i].features;
        o.lesion_id = lf.lesion_id;
        o.patient_id = lf.patient_id;
        o.phenotype = lf.phenotype ? std::string(to_string(*lf.phenotype)) : "";
        o.actual_msei = s.actual_msei[i];
        o.predicted_msei = s.predicted_msei[i];
        o.fujino_points = static_cast<int>(points[i]);
        o.fujino_ml_msei = ml[i];
        rep.heldout_outcomes.push_back(std::move(o));
    }
    rep.heldout_predictions = std::move(s.predictions);
    return rep;
}

std::string config_echo_json(const ExperimentConfig& c) { return config_json(c).dump(2); }

std::string report_json(const ExperimentReport& rep) {
    json j;
    j["config_echo"] = config_json(rep.config);
    j["train_lesions"] = rep.train_lesions;
    j["heldout_lesions"] = rep.heldout_lesions;
    json folds = json::array();
    for (const auto& f : rep.folds) {
        folds.push_back({{"fold", f.fold},
                         {"train_lesions", f.train_lesions},
                         {"validation_lesions", f.validation_lesions},
                         {"regression", metrics_json(f.regression)},
                         {"classification", metrics_json(f.classification)},
                         {"normalizer_fingerprint", hex(f.normalizer_fingerprint)},
                         {"selected_features", f.selected},
                         {"fujino_rule_auc", f.fujino_rule_auc},
                         {"fujino_ml_auc", f.fujino_ml_auc}});
    }
    j["folds"] = folds;
    j["cv"] = {{"rmse_mm2", mean_sd_json(rep.cv_rmse)},
               {"pearson_r", mean_sd_json(rep.cv_pearson)},
               {"bias_mm2", mean_sd_json(rep.cv_bias)},
               {"auc", mean_sd_json(rep.cv_auc)},
               {"accuracy", mean_sd_json(rep.cv_accuracy)}};
    j["heldout"] = {{"regression", metrics_json(rep.heldout_regression)},
                    {"classification", metrics_json(rep.heldout_classification)}};
    // flat aliases of the headline numbers
    j["rmse"] = rep.heldout_regression.rmse_mm2;
    j["r"] = rep.heldout_regression.pearson_r;
    j["auc"] = rep.heldout_classification.auc;
    json lesions = json::array();
    for (const auto& o : rep.heldout_outcomes) {
        lesions.push_back({{"lesion_id", o.lesion_id},
                           {"patient_id", o.patient_id},
                           {"phenotype", o.phenotype},
                           {"actual_msei", o.actual_msei},
                           {"predicted_msei", o.predicted_msei},
                           {"actual_label", std::string(to_string(classify_msei(o.actual_msei, rep.config.threshold)))},
                           {"predicted_label",
                            std::string(to_string(classify_msei(o.predicted_msei, rep.config.threshold)))},
                           {"fujino_points", o.fujino_points},
                           {"fujino_ml_msei", o.fujino_ml_msei}});
    }
    j["heldout_lesion_outcomes"] = lesions;
    auto baseline = [](const BaselineSummary& b) {
        return json{{"fold_auc", b.fold_auc}, {"cv_auc", mean_sd_json(b.cv_auc)}, {"heldout", metrics_json(b.heldout)}};
    };
    j["baselines"] = {{"fujino_rule", baseline(rep.fujino_rule)}, {"fujino_ml", baseline(rep.fujino_ml)}};
    j["final_normalizer_fingerprint"] = hex(rep.final_normalizer_fingerprint);
    j["final_selected_features"] = rep.final_selected;
    j["lasso_ranking"] = rep.lasso_ranking;
    return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& rep, std::span<const LesionRecord> lesions, const fs::path& dir) {
    fs::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    };
    open("report.json") << report_json(rep);

    {
        auto out = open("heldout_lesions.csv");
        out << "lesion_id,patient_id,phenotype,actual_msei,predicted_msei,actual_label,predicted_label,fujino_points,"
               "fujino_ml_msei\n";
        for (const auto& o : rep.heldout_outcomes)
            out << o.lesion_id << ',' << o.patient_id << ',' << o.phenotype << ',' << format_number(o.actual_msei)
                << ',' << format_number(o.predicted_msei) << ','
                << to_string(classify_msei(o.actual_msei, rep.config.threshold)) << ','
                << to_string(classify_msei(o.predicted_msei, rep.config.threshold)) << ',' << o.fujino_points << ','
                << format_number(o.fujino_ml_msei) << '\n';
    }
    {
        auto out = open("heldout_predictions.csv");
        out << "lesion_id,frame,predicted_area_mm2,actual_area_mm2\n";
        for (const auto& p : rep.heldout_predictions)
            for (std::size_t k = 0; k < p.frames.size(); ++k)
                out << p.lesion_id << ',' << p.frames[k] << ',' << format_number(p.predicted_area[k]) << ','
                    << format_number(p.actual_area[k]) << '\n';
    }

    SvgSeries scatter{"held-out rows", {}, SvgStyle::markers};
    SvgSeries residual{"held-out rows", {}, SvgStyle::markers};
    for (const auto& p : rep.heldout_predictions)
        for (std::size_t k = 0; k < p.frames.size(); ++k)
            if (std::isfinite(p.actual_area[k])) {
                scatter.points.emplace_back(p.actual_area[k], p.predicted_area[k]);
                residual.points.emplace_back(p.actual_area[k], p.predicted_area[k] - p.actual_area[k]);
            }
    open("scatter.svg") << render_svg({"Predicted vs actual post-stent lumen area", "actual area (mm^2)",
                                       "predicted area (mm^2)", {scatter}, true, std::nullopt});
    open("residuals.svg") << render_svg({"Residuals", "actual area (mm^2)", "predicted - actual (mm^2)", {residual},
                                         false, 0.0});

    SvgSeries actual_bars{"actual mSEI", {}, SvgStyle::bars}, predicted_bars{"predicted mSEI", {}, SvgStyle::bars};
    for (std::size_t i = 0; i < rep.heldout_outcomes.size(); ++i) {
        actual_bars.points.emplace_back(static_cast<double>(i), rep.heldout_outcomes[i].actual_msei);
        predicted_bars.points.emplace_back(static_cast<double>(i), rep.heldout_outcomes[i].predicted_msei);
    }
    open("msei_bars.svg") << render_svg({"Minimum SEI per held-out lesion", "lesion", "mSEI (%)",
                                         {actual_bars, predicted_bars}, false, rep.config.threshold});

    std::map<std::string, const LesionRecord*> by_id;
    for (const auto& l : lesions) by_id[l.features.lesion_id] = &l;
    SvgPlot curves{"Lumen area along the stented span", "frame", "area (mm^2)", {}, false, std::nullopt};
    for (std::size_t i = 0; i < std::min<std::size_t>(2, rep.heldout_predictions.size()); ++i) {
        const auto& p = rep.heldout_predictions[i];
        const auto it = by_id.find(p.lesion_id);
        if (it == by_id.end() || p.frames.front() < 0) continue;
        const auto& lf = it->second->features;
        SvgSeries pre{p.lesion_id + " pre", {}, SvgStyle::line}, act{p.lesion_id + " post", {}, SvgStyle::line},
            pred{p.lesion_id + " predicted", {}, SvgStyle::line};
        for (std::size_t k = 0; k < p.frames.size(); ++k) {
            const int f = p.frames[k];
            pre.points.emplace_back(f, lf.frames[static_cast<std::size_t>(f - lf.lesion_start)].lumen.area_mm2);
            if (std::isfinite(p.actual_area[k])) act.points.emplace_back(f, p.actual_area[k]);
            pred.points.emplace_back(f, p.predicted_area[k]);
        }
        curves.series.push_back(std::move(pre));
        curves.series.push_back(std::move(act));
        curves.series.push_back(std::move(pred));
    }
    open("lumen_curves.svg") << render_svg(curves);

    SvgPlot roc{"ROC, held-out lesions", "1 - specificity", "sensitivity", {}, true, std::nullopt};
    auto add_roc = [&](const std::string& name, const ClassificationMetrics& m) {
        if (m.roc_points.empty()) return;
        roc.series.push_back({name + " (AUC " + format_number(std::round(m.auc * 1000) / 1000) + ")",
                              m.roc_points, SvgStyle::line});
    };
    add_roc("pipeline", rep.heldout_classification);
    if (rep.config.baselines) {
        add_roc("Fujino ML", rep.fujino_ml.heldout);
        add_roc("Fujino score", rep.fujino_rule.heldout);
    }
    open("roc.svg") << render_svg(roc);
}

}  // namespace stentx
