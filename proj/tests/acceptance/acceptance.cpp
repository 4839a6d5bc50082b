// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fail.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "datasets.hpp"
#include "fixtures.hpp"
#include "leakage.hpp"
#include "oracles.hpp"
#include "stentx/expansion.hpp"
#include "stentx/experiment.hpp"
#include "stentx/geometry2d.hpp"
#include "stentx/gpr.hpp"
#include "stentx/lasso.hpp"
#include "stentx/metrics.hpp"
#include "stentx/rng.hpp"
#include "stentx/synth.hpp"

namespace fs = std::filesystem;
using namespace stentx;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += ' ';
        detail += what + (ok ? "" : "(!)");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// --- 1 -------------------------------------------------------------------

Outcome sei_exactness() {
    const auto t0 = Clock::now();
    Outcome o;
    Rng rng(1);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 40));
        std::vector<double> areas(n);
        for (auto& a : areas) a = uniform(rng, 0.5, 12);
        ReferencePair refs;
        refs.proximal_area_mm2 = uniform(rng, 2, 12);
        refs.distal_area_mm2 = uniform(rng, 2, 12);
        const auto rec = compute_sei_curve(areas, refs);
        double m = INFINITY;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = oracle::sei(areas[k], refs.proximal_area_mm2, refs.distal_area_mm2);
            worst = std::max(worst, std::abs(rec.sei[k] - e));
            m = std::min(m, e);
        }
        worst = std::max(worst, std::abs(rec.msei - m));
    }
    o.check(worst < 1e-12, "max_dev=" + fmt("%.3g", worst));
    const std::vector<double> boundary{8.0};
    const auto rec = compute_sei_curve(boundary, ReferencePair{10, 10, 0, 0});
    o.check(rec.msei == 80 && rec.label == ExpansionLabel::well_expanded, "msei80=" + std::string(to_string(rec.label)));
    const double t = seconds_since(t0);
    o.check(t < 1.0, "time=" + fmt("%.3fs", t));
    return o;
}

// --- 2 -------------------------------------------------------------------

Outcome geometry_oracles() {
    const auto t0 = Clock::now();
    Outcome o;
    Rng rng(2);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = testing::random_mask(rng, 64);
        const auto f = compute_lumen_frame_features(m, 0.01, 1.0);
        const auto c = oracle::count_region(m, Label::lumen);
        worst = std::max({worst, std::abs(f.area_mm2 - c.area_px * 1e-4) / (c.area_px * 1e-4),
                          std::abs(f.extent - c.extent) / c.extent, std::abs(f.solidity - c.solidity) / c.solidity});
    }
    o.check(worst <= 1e-9, "oracle_rel=" + fmt("%.3g", worst));

    const double r = 50;
    const auto disc = compute_lumen_frame_features(testing::disc(121, r), 0.01, 1.0);
    const double expected = std::numbers::pi * r * r * 1e-4;
    const double disc_err = std::abs(disc.area_mm2 - expected) / expected;
    o.check(disc_err <= 0.02, "disc_err=" + fmt("%.4f", disc_err));

    const auto ell = compute_lumen_frame_features(testing::ellipse(101, 40, 20), 0.01, 1.0);
    const double ratio = ell.major_axis_mm / ell.minor_axis_mm;
    o.check(std::abs(ratio - 2) <= 0.06, "axis_ratio=" + fmt("%.4f", ratio));

    auto wedge = testing::disc(201, 40);
    testing::stamp_wedge(wedge, 50.5, 80.5, 0, 90);
    const auto w = compute_calc_frame_features(wedge, 0.01);
    o.check(std::abs(w.max_arc_angle_deg - 90) <= 2, "wedge_arc=" + fmt("%.2f", w.max_arc_angle_deg));
    const double t = seconds_since(t0);
    o.check(t < 30, "time=" + fmt("%.2fs", t));
    return o;
}

// --- 3 -------------------------------------------------------------------

Eigen::MatrixXd gaussian(Rng& rng, int n, int p) {
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = standard_normal(rng);
    return x;
}

Outcome lasso_oracles() {
    Outcome o;
    Rng rng(3);
    double soft = 0, ols = 0;
    bool null_exact = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(uniform_int(rng, 20, 60));
        const int p = static_cast<int>(uniform_int(rng, 2, 8));
        // centered orthonormal columns scaled so that X'X/n = I
        Eigen::MatrixXd a(n, p + 1);
        a << Eigen::VectorXd::Ones(n), gaussian(rng, n, p);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                                  Eigen::MatrixXd::Identity(n, p + 1);
        const Eigen::MatrixXd x = q.rightCols(p) * std::sqrt(static_cast<double>(n));
        Eigen::VectorXd y = gaussian(rng, n, 1).col(0) * 2 + x.col(0) * 1.5;
        y.array() += 4;
        const Eigen::VectorXd z = x.transpose() * (y.array() - y.mean()).matrix() / n;
        const double lambda = uniform(rng, 0, z.cwiseAbs().maxCoeff());
        const std::vector<double> grid{lambda};
        const auto path = lasso_path(x, y, grid);
        for (int j = 0; j < p; ++j)
            soft = std::max(soft, std::abs(path.coefficients[0](j) - oracle::soft_threshold(z(j), lambda)));

        const auto g = gaussian(rng, n, p);
        Eigen::VectorXd yg = g * Eigen::VectorXd::LinSpaced(p, -1, 2);
        yg += gaussian(rng, n, 1).col(0) * 0.5;
        const std::vector<double> zero{0.0};
        const auto fit = lasso_path(g, yg, zero);
        Eigen::MatrixXd design(n, p + 1);
        design << Eigen::VectorXd::Ones(n), g;
        const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(yg);
        ols = std::max(ols, std::abs(fit.intercepts[0] - beta(0)));
        for (int j = 0; j < p; ++j) ols = std::max(ols, std::abs(fit.coefficients[0](j) - beta(j + 1)));

        const double top = lambda_max(g, yg);
        const std::vector<double> above{top * 2, top};
        for (const auto& c : lasso_path(g, yg, above).coefficients)
            if (c.cwiseAbs().maxCoeff() != 0.0) null_exact = false;
    }
    o.check(soft < 1e-6, "soft_dev=" + fmt("%.3g", soft));
    o.check(ols < 1e-6, "ols_dev=" + fmt("%.3g", ols));
    o.check(null_exact, std::string("null_model=") + (null_exact ? "exact" : "nonzero"));
    return o;
}

// --- 4 -------------------------------------------------------------------

Outcome gpr_properties() {
    Outcome o;
    double interp = 0, revert = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Rng rng(seed);
        const int n = 12;
        Eigen::MatrixXd x(n, 1);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = i + uniform(rng, -0.2, 0.2);
            y(i) = std::sin(0.7 * x(i, 0)) + 3;
        }
        GprOptions opt;
        opt.noise_variance = 1e-8;
        const auto m = fit_gpr(x, y, opt, seed);
        interp = std::max(interp, (gpr_predict(m, x) - y).cwiseAbs().maxCoeff());
        // 10 length scales beyond the farthest training point, in z-scored units
        const double far_z = m.inputs.cwiseAbs().maxCoeff() + 10 * m.hyper.length_scale;
        Eigen::MatrixXd q(1, 1);
        q << m.input_mean(0) + far_z * m.input_scale(0);
        revert = std::max(revert, std::abs(gpr_predict(m, q)(0) - y.mean()));
    }
    o.check(interp < 1e-6, "interp_dev=" + fmt("%.3g", interp));
    o.check(revert < 1e-3, "reversion_dev=" + fmt("%.3g", revert));

    bool monotone = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(100 + seed);
        Eigen::MatrixXd x(30, 2);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            x(i, 0) = uniform(rng, 0, 4);
            x(i, 1) = uniform(rng, 0, 4);
            y(i) = std::sin(x(i, 0)) * std::cos(x(i, 1)) + 0.1 * standard_normal(rng);
        }
        double previous = -INFINITY;
        for (int starts = 1; starts <= 4; ++starts) {
            GprOptions opt;
            opt.starts = starts;
            const auto m = fit_gpr(x, y, opt, seed);
            double best = -INFINITY;
            for (const auto& s : m.starts) {
                for (std::size_t k = 1; k < s.trace.size(); ++k)
                    if (s.trace[k] < s.trace[k - 1]) monotone = false;
                best = std::max(best, s.best_lml);
            }
            if (m.lml != best || m.lml < previous) monotone = false;
            previous = m.lml;
        }
    }
    o.check(monotone, std::string("best_of_starts=") + (monotone ? "monotone" : "violated"));
    return o;
}

// --- 5 -------------------------------------------------------------------

Outcome auc_equivalence() {
    Outcome o;
    Rng rng(5);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 80));
        const int levels = static_cast<int>(uniform_int(rng, 2, 12));  // few levels force ties
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = static_cast<double>(uniform_int(rng, 0, levels)) * 0.25;
            labels[i] = uniform01(rng) < 0.4 ? 1 : 0;
        }
        labels[0] = 1;
        labels[1] = 0;
        worst = std::max(worst, std::abs(roc_auc(scores, labels).auc - oracle::mann_whitney_auc(scores, labels)));
    }
    o.check(worst < 1e-12, "max_dev=" + fmt("%.3g", worst));
    return o;
}

// --- 6, 7 ----------------------------------------------------------------

ExperimentConfig benchmark_config(AssemblyMode mode, bool baselines) {
    ExperimentConfig c;
    c.seed = 7;
    c.pipeline.assembly.mode = mode;
    c.pipeline.assembly.segment_length = 31;
    c.pipeline.group = FeatureGroup::cle;
    c.pipeline.model = ModelKind::gpr;
    c.baselines = baselines;
    return c;
}

struct Benchmark {
    SynthDataset data;
    ExperimentReport segmental;
    double generation_s = 0;
    double segmental_s = 0;
};

Outcome end_to_end(const Benchmark& b) {
    Outcome o;
    const auto& r = b.segmental;
    std::map<std::string, double> noise;
    for (std::size_t i = 0; i < b.data.records.size(); ++i) noise[b.data.records[i].features.lesion_id] = b.data.noise_sd[i];
    double sum = 0;
    std::size_t count = 0;
    for (const auto& p : r.heldout_predictions)
        for (double a : p.actual_area)
            if (std::isfinite(a)) {
                sum += noise.at(p.lesion_id) * noise.at(p.lesion_id);
                ++count;
            }
    const double floor = std::sqrt(sum / static_cast<double>(count));
    o.check(r.heldout_regression.pearson_r >= 0.90, "r=" + fmt("%.4f", r.heldout_regression.pearson_r));
    o.check(r.heldout_classification.auc >= 0.85, "auc=" + fmt("%.4f", r.heldout_classification.auc));
    o.check(r.heldout_regression.rmse_mm2 <= 1.2 * floor,
            "rmse=" + fmt("%.4f", r.heldout_regression.rmse_mm2) + " floor=" + fmt("%.4f", floor));
    const double t = b.generation_s + b.segmental_s;
    o.check(t < 300, "time=" + fmt("%.1fs", t));
    return o;
}

Outcome method_ordering(const Benchmark& b) {
    Outcome o;
    const double seg = b.segmental.cv_auc.first;
    const double frame = run_experiment(b.data.records, benchmark_config(AssemblyMode::frame, false)).cv_auc.first;
    const double lesion = run_experiment(b.data.records, benchmark_config(AssemblyMode::lesion, false)).cv_auc.first;
    const double ml = b.segmental.fujino_ml.cv_auc.first;
    const double rule = b.segmental.fujino_rule.cv_auc.first;
    o.check(seg - frame >= 0.02, "segmental=" + fmt("%.4f", seg) + " frame=" + fmt("%.4f", frame));
    o.check(seg - lesion >= 0.02, "lesion=" + fmt("%.4f", lesion));
    o.check(seg - ml >= 0.02, "fujino_ml=" + fmt("%.4f", ml));
    o.check(ml - rule >= 0.02, "fujino_rule=" + fmt("%.4f", rule));
    return o;
}

// --- 8 -------------------------------------------------------------------

Outcome phenotype_direction() {
    Outcome o;
    double with = 0, without = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto s = SynthConfig::phenotype_sensitive();
        s.seed = seed;
        const auto data = synthesize_records(s);
        auto c = benchmark_config(AssemblyMode::lesion, false);
        c.seed = seed;
        const double a = run_experiment(data.records, c).cv_auc.first;
        c.pipeline.assembly.include_phenotype = true;
        const double b = run_experiment(data.records, c).cv_auc.first;
        without += a / 5;
        with += b / 5;
        per_seed += (per_seed.empty() ? "" : ",") + fmt("%+.3f", b - a);
    }
    o.check(with >= without - 0.02,
            "with=" + fmt("%.4f", with) + " without=" + fmt("%.4f", without) + " per_seed_delta=" + per_seed);
    return o;
}

// --- 9 -------------------------------------------------------------------

std::map<std::string, std::string> read_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (ext != ".json" && ext != ".csv" && ext != ".svg") continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return out;
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::path(STENTX_TEST_TMP) / "determinism";
    fs::remove_all(root);
    std::vector<std::map<std::string, std::string>> runs;
    // Same argv both times: the output directory is echoed into the config.
    const auto dir = (root / "run").string();
    for (const char* name : {"a", "b"}) {
        fs::remove_all(dir);
        const char* argv[] = {"stentx", "--seed", "7", "evaluate", "--n", "30", "--out", dir.c_str()};
        std::ostringstream out, err;
        const int code = cli::run(8, argv, out, err);
        o.check(code == 0, std::string("exit_") + name + "=" + std::to_string(code));
        runs.push_back(read_outputs(dir));
    }
    std::size_t differing = 0;
    for (const auto& [name, bytes] : runs[0])
        if (!runs[1].count(name) || runs[1].at(name) != bytes) ++differing;
    const bool has_core = runs[0].count("report.json") && runs[0].count("heldout_lesions.csv");
    o.check(has_core && differing == 0 && runs[0].size() == runs[1].size(),
            "files=" + std::to_string(runs[0].size()) + " differing=" + std::to_string(differing));
    return o;
}

// --- 10 ------------------------------------------------------------------

Outcome leakage(const Benchmark& b) {
    Outcome o;
    const auto& recs = testing::small_records();
    ExperimentConfig c;
    c.seed = 5;
    c.pipeline.assembly.segment_length = 7;
    c.pipeline.group = FeatureGroup::lasso_selected;
    c.pipeline.model = ModelKind::linear;
    const auto base = run_experiment(recs, c);
    const auto held = run_experiment(testing::mutate_lesions(recs, base.heldout_lesions), c);
    o.check(testing::learned_state(held) == testing::learned_state(base), "heldout_mutation=ignored");
    const auto train = run_experiment(testing::mutate_lesions(recs, {base.train_lesions.front()}), c);
    o.check(train.final_normalizer_fingerprint != base.final_normalizer_fingerprint, "train_mutation=detected");
    const auto& fold = base.folds[1];
    const auto val = run_experiment(testing::mutate_lesions(recs, fold.validation_lesions), c);
    o.check(val.folds[1].normalizer_fingerprint == fold.normalizer_fingerprint &&
                val.folds[1].selected == fold.selected,
            "validation_mutation=ignored_by_its_fold");
    const auto small = testing::patient_overlap(base, recs);
    const auto bench = testing::patient_overlap(b.segmental, b.data.records);
    o.check(small.empty() && bench.empty(), "patient_overlap=" + (small + bench).substr(0, 60) +
                                                (small.empty() && bench.empty() ? "none" : ""));
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %d %s: %s %s [%.1fs]\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    };

    report(1, "sei_formula", sei_exactness);
    report(2, "geometry_oracles", geometry_oracles);
    report(3, "lasso", lasso_oracles);
    report(4, "gpr", gpr_properties);
    report(5, "auc_equivalence", auc_equivalence);

    Benchmark bench;
    {
        auto t0 = Clock::now();
        bench.data = synthesize_records(SynthConfig{});
        bench.generation_s = seconds_since(t0);
        t0 = Clock::now();
        bench.segmental = run_experiment(bench.data.records, benchmark_config(AssemblyMode::segmental, true));
        bench.segmental_s = seconds_since(t0);
    }
    report(6, "end_to_end_benchmark", [&] { return end_to_end(bench); });
    report(7, "method_ordering", [&] { return method_ordering(bench); });
    report(8, "phenotype_direction", phenotype_direction);
    report(9, "determinism", determinism);
    report(10, "leakage_guards", [&] { return leakage(bench); });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
