#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "stentx/dataset.hpp"
#include "stentx/error.hpp"
#include "stentx/experiment.hpp"
#include "stentx/fujino.hpp"
#include "stentx/pipeline.hpp"
#include "stentx/svg.hpp"
#include "stentx/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace stentx::cli {

namespace {

struct RunConfig {
    std::string subcommand;
    std::string data;
    std::string out;
    std::string model_file;
    std::string pullback;
    std::string mode = "segmental";
    int segment_length = 31;
    std::string features = "cle";
    std::string model = "gpr";
    bool include_phenotype = false;
    std::uint64_t seed = 7;
    double threshold = kDefaultSeiThreshold;
    int n = 120;
    bool phenotype_sensitive = false;
    std::optional<double> noise_fraction;
    int folds = 5;
    double train_fraction = kDefaultTrainFraction;
    bool baselines = true;
    FujinoConfig fujino;
};

json echo(const RunConfig& c) {
    json j = {{"subcommand", c.subcommand}, {"seed", c.seed}, {"threshold", c.threshold}};
    auto path = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = v;
    };
    path("data", c.data);
    path("out", c.out);
    path("model_file", c.model_file);
    path("pullback", c.pullback);
    if (c.subcommand == "synth" || (c.subcommand == "evaluate" && c.data.empty())) {
        j["n"] = c.n;
        j["phenotype_sensitive"] = c.phenotype_sensitive;
        j["noise_fraction"] = c.noise_fraction ? json(*c.noise_fraction) : json(nullptr);
    }
    if (c.subcommand == "extract" || c.subcommand == "train" || c.subcommand == "evaluate") {
        j["mode"] = c.mode;
        j["segment_length"] = c.segment_length;
        j["include_phenotype"] = c.include_phenotype;
    }
    if (c.subcommand == "train" || c.subcommand == "evaluate") {
        j["features"] = c.features;
        j["model"] = c.model;
    }
    if (c.subcommand == "evaluate") {
        j["folds"] = c.folds;
        j["train_fraction"] = c.train_fraction;
        j["baselines"] = c.baselines;
    }
    if (c.subcommand == "baseline" || c.subcommand == "evaluate") {
        j["fujino"] = {{"angle_deg", c.fujino.angle_deg},
                       {"thickness_mm", c.fujino.thickness_mm},
                       {"length_mm", c.fujino.length_mm}};
    }
    return j;
}

std::ofstream open_out(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    return out;
}

void write_echo(const RunConfig& c, const fs::path& dir) {
    open_out(dir / "config_echo.json") << json{{"config_echo", echo(c)}}.dump(2) << '\n';
}

PipelineConfig pipeline_config(const RunConfig& c) {
    PipelineConfig p;
    p.assembly.mode = parse_mode(c.mode);
    p.assembly.segment_length = c.segment_length;
    p.assembly.include_phenotype = c.include_phenotype;
    p.group = parse_feature_group(c.features);
    p.model = parse_model_kind(c.model);
    return p;
}

SynthConfig synth_config(const RunConfig& c) {
    SynthConfig s = c.phenotype_sensitive ? SynthConfig::phenotype_sensitive() : SynthConfig{};
    s.n_lesions = c.n;
    s.seed = c.seed;
    if (c.noise_fraction) s.noise_sd_fraction = *c.noise_fraction;
    return s;
}

std::vector<LesionRecord> load_records(const RunConfig& c) {
    if (!c.data.empty()) return load_dataset(c.data);
    return synthesize_records(synth_config(c)).records;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
    const auto s = synth_config(c);
    validate(s);
    generate_dataset(s, c.out);
    write_echo(c, c.out);
    out << "wrote " << s.n_lesions << " lesions to " << c.out << '\n';
    return kExitOk;
}

int cmd_extract(const RunConfig& c, std::ostream& out) {
    const auto records = load_dataset(c.data);
    const auto p = pipeline_config(c);
    const auto m = assemble(lesion_features(records), p.assembly);
    auto csv = open_out(fs::path(c.out) / "features.csv");
    write_csv(m, csv);
    write_echo(c, c.out);
    out << "rows=" << m.rows() << ",columns=" << m.schema.size() << '\n';
    return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
    const auto records = load_dataset(c.data);
    const auto fitted = fit_pipeline(records, pipeline_config(c), c.seed);
    save_pipeline(fitted, fs::path(c.out) / "model.stx");
    write_echo(c, c.out);
    {
        auto f = open_out(fs::path(c.out) / "selected_features.txt");
        for (const auto& name : fitted.selected) f << name << '\n';
    }
    out << "features=" << fitted.selected.size() << ",training_rmse=" << format_number(fitted.model.training_rmse)
        << '\n';
    return kExitOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
    const auto fitted = load_pipeline(c.model_file);
    const auto pre = load_pullback(c.pullback);
    const std::vector<LesionRecord> records{extract_lesion(pre)};
    const auto pred = predict_lesions(fitted, records, c.threshold).front();
    const auto line = summary_line(pred.predicted);
    out << line << '\n';
    if (c.out.empty()) return kExitOk;

    const fs::path dir = c.out;
    write_echo(c, dir);
    open_out(dir / "summary.txt") << line << '\n';
    {
        auto f = open_out(dir / "sei.csv");
        write_sei_csv(pred.predicted, f);
    }
    {
        auto f = open_out(dir / "predicted_areas.csv");
        f << "frame,predicted_area_mm2\n";
        for (std::size_t k = 0; k < pred.frames.size(); ++k)
            f << pred.frames[k] << ',' << format_number(pred.predicted_area[k]) << '\n';
    }
    SvgSeries sei{"predicted SEI", {}, SvgStyle::line};
    for (std::size_t k = 0; k < pred.predicted.sei.size(); ++k)
        sei.points.emplace_back(pred.predicted.first_frame + static_cast<int>(k), pred.predicted.sei[k]);
    if (sei.points.size() == 1) sei.style = SvgStyle::markers;
    open_out(dir / "sei.svg") << render_svg({"Predicted stent expansion index", "frame", "SEI (%)", {sei}, false,
                                             c.threshold});
    return kExitOk;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
    const auto records = load_records(c);
    ExperimentConfig e;
    e.pipeline = pipeline_config(c);
    e.seed = c.seed;
    e.folds = c.folds;
    e.train_fraction = c.train_fraction;
    e.threshold = c.threshold;
    e.fujino = c.fujino;
    e.baselines = c.baselines;
    e.data_source = c.data.empty() ? "synthetic" : c.data;
    const auto report = run_experiment(records, e);
    write_report(report, records, c.out);
    write_echo(c, c.out);
    out << "rmse=" << format_number(report.heldout_regression.rmse_mm2)
        << ",r=" << format_number(report.heldout_regression.pearson_r)
        << ",auc=" << format_number(report.heldout_classification.auc)
        << ",cv_auc=" << format_number(report.cv_auc.first) << '\n';
    return kExitOk;
}

int cmd_baseline(const RunConfig& c, std::ostream& out) {
    const auto records = load_dataset(c.data);
    auto f = open_out(fs::path(c.out) / "fujino.csv");
    f << "lesion_id,patient_id,angle_points,thickness_points,length_points,points,high_risk,actual_msei\n";
    int high = 0;
    for (const auto& r : records) {
        const auto s = fujino_score(r.features, c.fujino);
        high += s.high_risk;
        f << r.features.lesion_id << ',' << r.features.patient_id << ',' << s.angle_points << ','
          << s.thickness_points << ',' << s.length_points << ',' << s.points << ',' << (s.high_risk ? 1 : 0) << ','
          << (r.actual ? format_number(r.actual->msei) : std::string("nan")) << '\n';
    }
    write_echo(c, c.out);
    out << "lesions=" << records.size() << ",high_risk=" << high << '\n';
    return kExitOk;
}

void add_model_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--mode", c.mode, "frame | segmental | lesion")
        ->check(CLI::IsMember({"frame", "segmental", "lesion"}));
    app->add_option("--segment-length", c.segment_length, "frames per moving segment")
        ->check(CLI::IsMember({1, 3, 7, 15, 31, 63}));
    app->add_flag("--include-phenotype", c.include_phenotype, "append phenotype indicator columns");
}

void add_learn_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--features", c.features, "all | lasso_selected | cle | cle_top20")
        ->check(CLI::IsMember({"all", "lasso_selected", "cle", "cle_top20"}));
    app->add_option("--model", c.model, "linear | gpr | tree | bagged")
        ->check(CLI::IsMember({"linear", "gpr", "tree", "bagged"}));
}

void add_fujino_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--fujino-angle", c.fujino.angle_deg, "arc threshold (deg)")->check(CLI::NonNegativeNumber);
    app->add_option("--fujino-thickness", c.fujino.thickness_mm, "thickness threshold (mm)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--fujino-length", c.fujino.length_mm, "length threshold (mm)")->check(CLI::NonNegativeNumber);
}

const CLI::Validator kThreshold(
    [](std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (const std::exception&) {
            return "threshold must be a number";
        }
        return v > 0 && v < 100 ? std::string() : "threshold must lie in (0, 100)";
    },
    "(0,100)");

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Post-stent lumen area and under-expansion prediction from pre-stent IVOCT masks", "stentx"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--seed", c.seed, "master seed");
    app.add_option("--threshold", c.threshold, "SEI under-expansion threshold (%)")->check(kThreshold);

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--n", c.n, "number of lesions")->check(CLI::PositiveNumber);
    synth->add_option("--out", c.out, "output directory")->required();
    synth->add_flag("--phenotype-sensitive", c.phenotype_sensitive, "phenotype alters the expansion response");
    synth->add_option("--noise-fraction", c.noise_fraction, "noise SD as a fraction of the reference area")
        ->check(CLI::NonNegativeNumber);

    auto* extract = app.add_subcommand("extract", "write the assembled feature matrix as CSV");
    extract->add_option("--data", c.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    extract->add_option("--out", c.out, "output directory")->required();
    add_model_flags(extract, c);

    auto* train = app.add_subcommand("train", "fit and serialize a model");
    train->add_option("--data", c.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--out", c.out, "output directory")->required();
    add_model_flags(train, c);
    add_learn_flags(train, c);

    auto* predict = app.add_subcommand("predict", "predict the SEI curve of one pre-stent pullback");
    predict->add_option("--model", c.model_file, "model.stx written by train")->required()->check(CLI::ExistingFile);
    predict->add_option("--pullback", c.pullback, "pre-stent pullback directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    predict->add_option("--out", c.out, "output directory (optional)");

    auto* evaluate = app.add_subcommand("evaluate", "cross-validated experiment with held-out scoring");
    evaluate->add_option("--data", c.data, "dataset directory; omit to use the synthetic benchmark")
        ->check(CLI::ExistingDirectory);
    evaluate->add_option("--n", c.n, "synthetic lesions when --data is absent")->check(CLI::PositiveNumber);
    evaluate->add_flag("--phenotype-sensitive", c.phenotype_sensitive, "synthetic phenotype-sensitive variant");
    evaluate->add_option("--noise-fraction", c.noise_fraction, "synthetic noise SD fraction")
        ->check(CLI::NonNegativeNumber);
    evaluate->add_option("--out", c.out, "output directory")->required();
    evaluate->add_option("--folds", c.folds, "cross-validation folds")->check(CLI::Range(2, 100));
    evaluate->add_option("--train-fraction", c.train_fraction, "share of lesions used for training")
        ->check(CLI::Range(0.05, 0.95));
    evaluate->add_flag("--baselines,!--no-baselines", c.baselines, "score the calcium-score baselines");
    add_model_flags(evaluate, c);
    add_learn_flags(evaluate, c);
    add_fujino_flags(evaluate, c);

    auto* baseline = app.add_subcommand("baseline", "calcium score table");
    baseline->add_option("--data", c.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    baseline->add_option("--out", c.out, "output directory")->required();
    add_fujino_flags(baseline, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    try {
        if (c.subcommand == "synth") return cmd_synth(c, out);
        if (c.subcommand == "extract") return cmd_extract(c, out);
        if (c.subcommand == "train") return cmd_train(c, out);
        if (c.subcommand == "predict") return cmd_predict(c, out);
        if (c.subcommand == "evaluate") return cmd_evaluate(c, out);
        return cmd_baseline(c, out);
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace stentx::cli
