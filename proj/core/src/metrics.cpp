#include "stentx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stentx {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

RegressionMetrics regression_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty() || actual.size() != predicted.size())
        throw std::invalid_argument("regression_metrics needs equal, nonzero lengths");
    const auto n = static_cast<double>(actual.size());
    RegressionMetrics m;
    m.n = actual.size();

    double sse = 0, sum_res = 0, mean_a = 0, mean_p = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double r = predicted[i] - actual[i];
        sse += r * r;
        sum_res += r;
        mean_a += actual[i];
        mean_p += predicted[i];
    }
    mean_a /= n;
    mean_p /= n;
    m.rmse_mm2 = std::sqrt(sse / n);
    m.bias_mm2 = sum_res / n;

    double saa = 0, spp = 0, sap = 0, srr = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double da = actual[i] - mean_a, dp = predicted[i] - mean_p;
        const double dr = predicted[i] - actual[i] - m.bias_mm2;
        saa += da * da;
        spp += dp * dp;
        sap += da * dp;
        srr += dr * dr;
    }
    m.residual_sd_mm2 = actual.size() > 1 ? std::sqrt(srr / (n - 1)) : 0.0;
    if (saa > 0 && spp > 0) {
        m.pearson_r = std::clamp(sap / std::sqrt(saa * spp), -1.0, 1.0);
    } else {
        m.pearson_undefined = true;
    }
    return m;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
    const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
    const auto neg = static_cast<double>(labels.size()) - pos;
    if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auc needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    RocCurve c;
    c.points.emplace_back(0.0, 0.0);
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? tp : fp) += 1;
        const auto [x0, y0] = c.points.back();
        const double x1 = fp / neg, y1 = tp / pos;
        c.auc += (x1 - x0) * (y0 + y1) / 2;
        c.points.emplace_back(x1, y1);
    }
    return c;
}

ClassificationMetrics classification_metrics(std::span<const double> predicted_msei,
                                             std::span<const double> actual_msei, double threshold) {
    if (predicted_msei.size() != actual_msei.size())
        throw std::invalid_argument("classification_metrics: length mismatch");
    ClassificationMetrics m;
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < actual_msei.size(); ++i) {
        const bool actual = actual_msei[i] < threshold;
        const bool predicted = predicted_msei[i] < threshold;
        m.tp += actual && predicted;
        m.fn += actual && !predicted;
        m.fp += !actual && predicted;
        m.tn += !actual && !predicted;
        scores.push_back(-predicted_msei[i]);
        labels.push_back(actual ? 1 : 0);
    }
    const int n = m.tp + m.fp + m.tn + m.fn;
    m.accuracy = n ? static_cast<double>(m.tp + m.tn) / n : kNaN;
    m.sensitivity = m.tp + m.fn ? static_cast<double>(m.tp) / (m.tp + m.fn) : kNaN;
    m.specificity = m.tn + m.fp ? static_cast<double>(m.tn) / (m.tn + m.fp) : kNaN;
    if (m.tp + m.fn > 0 && m.tn + m.fp > 0) {
        auto roc = roc_auc(scores, labels);
        m.auc = roc.auc;
        m.roc_points = std::move(roc.points);
    } else {
        m.auc = kNaN;
    }
    return m;
}

std::pair<double, double> mean_sd(std::span<const double> values) {
    double sum = 0;
    int n = 0;
    for (double v : values)
        if (std::isfinite(v)) sum += v, ++n;
    if (n == 0) return {kNaN, kNaN};
    const double mean = sum / n;
    double ss = 0;
    for (double v : values)
        if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    return {mean, n > 1 ? std::sqrt(ss / (n - 1)) : 0.0};
}

}  // namespace stentx
