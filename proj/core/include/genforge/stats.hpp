#pragma once

#include <span>

namespace genforge {

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator). Zero for fewer than two
/// values.
double sample_std(std::span<const double> values);

/// Quantile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted data). `sorted` must be ascending
/// and nonempty; q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace genforge
