#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace toomqca {

struct Estimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes in n trials (z = 1.96 by default).
Estimate wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.96);

// Mean with a normal-approximation CI over `batches` contiguous batch means.
Estimate batched_means(std::span<const double> samples, int batches = 10, double z = 1.96);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t points = 0;
};

// Weighted least squares y = a + b x.
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y,
                       std::span<const double> w);

// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// One-sample KS test of the samples against Exp(rate).
KSResult ks_exponential(std::vector<double> samples, double rate);

struct MedianEstimate {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool censored = false;  // the median itself is at or beyond the cap
};

// Sample median with a distribution-free order-statistic CI. Values >= cap
// count as right-censored.
MedianEstimate median_with_ci(std::vector<double> values, double cap, double z = 1.96);

}  // namespace toomqca
