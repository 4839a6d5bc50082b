#include "stentx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stentx {

StatSummary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty input");
    const auto n = static_cast<double>(values.size());

    StatSummary s;
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / n;

    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s.sd = values.size() > 1 ? std::sqrt(m2 / (n - 1)) : 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const auto mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    // constant input: rounding in the mean must not produce spurious spread
    if (s.min == s.max) {
        s.sd = 0;
        s.skewness = 0;
        s.kurtosis = 0;
        s.mean = s.min;
    }
    return s;
}

std::array<double, 7> as_array(const StatSummary& s) {
    return {s.mean, s.median, s.sd, s.min, s.max, s.skewness, s.kurtosis};
}

}  // namespace stentx
