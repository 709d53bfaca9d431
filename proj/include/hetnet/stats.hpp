#pragma once

#include <cmath>
#include <cstddef>

namespace hetnet {

// Welford running mean and population variance.
struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
  // Falls back to 1 until there is spread to measure.
  double stddev_or_one() const {
    double s = std::sqrt(variance());
    return s > 1e-8 ? s : 1.0;
  }
  double normalize(double x) const { return (x - mean) / stddev_or_one(); }
};

}  // namespace hetnet
