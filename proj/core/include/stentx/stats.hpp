#pragma once

#include <array>
#include <span>
#include <string_view>

namespace stentx {

/// First-order statistics of a sample.
///
/// sd uses the n-1 denominator (0 for n = 1). skewness is g1 = m3 / m2^1.5
/// and kurtosis is the non-excess Pearson m4 / m2^2, both computed from
/// biased central moments and defined as 0 when m2 == 0.
struct StatSummary {
    double mean = 0;
    double median = 0;
    double sd = 0;
    double min = 0;
    double max = 0;
    double skewness = 0;
    double kurtosis = 0;
};

inline constexpr std::array<std::string_view, 7> kStatNames = {"mean", "median", "sd", "min",
                                                               "max",  "skewness", "kurtosis"};

/// Throws std::invalid_argument on empty input.
StatSummary summarize(std::span<const double> values);

/// Values in kStatNames order.
std::array<double, 7> as_array(const StatSummary& s);

}  // namespace stentx
