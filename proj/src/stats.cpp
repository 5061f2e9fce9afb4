#include "toomqca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace toomqca {

Estimate wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  return {phat, std::max(0.0, center - half), std::min(1.0, center + half)};
}

Estimate batched_means(std::span<const double> samples, int batches, double z) {
  if (samples.empty()) return {};
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  const std::size_t per = samples.size() / static_cast<std::size_t>(batches);
  if (batches < 2 || per == 0) return {mean, mean, mean};
  std::vector<double> bm;
  for (int b = 0; b < batches; ++b) {
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(b * per);
    bm.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(per), 0.0) / per);
  }
  const double bmean = std::accumulate(bm.begin(), bm.end(), 0.0) / bm.size();
  double var = 0.0;
  for (double v : bm) var += (v - bmean) * (v - bmean);
  var /= static_cast<double>(bm.size() - 1);
  const double half = z * std::sqrt(var / bm.size());
  return {mean, mean - half, mean + half};
}

LinearFit weighted_fit(std::span<const double> x, std::span<const double> y,
                       std::span<const double> w) {
  LinearFit fit;
  fit.points = x.size();
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sw += w[k];
    sx += w[k] * x[k];
    sy += w[k] * y[k];
  }
  if (x.size() < 2 || sw <= 0) return fit;
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += w[k] * (x[k] - mx) * (x[k] - mx);
    sxy += w[k] * (x[k] - mx) * (y[k] - my);
  }
  if (sxx <= 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // With inverse-variance weights the slope variance is 1 / sxx.
  fit.slope_se = std::sqrt(1.0 / sxx);
  return fit;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_exponential(std::vector<double> samples, double rate) {
  KSResult r;
  r.n = samples.size();
  if (samples.empty()) return r;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double F = 1.0 - std::exp(-rate * samples[k]);
    d = std::max({d, (k + 1) / n - F, F - k / n});
  }
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

MedianEstimate median_with_ci(std::vector<double> values, double cap, double z) {
  MedianEstimate m;
  if (values.empty()) return m;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  m.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const double half = z * std::sqrt(static_cast<double>(n)) / 2.0;
  const auto lo_rank = static_cast<std::ptrdiff_t>(std::floor(n / 2.0 - half));
  const auto hi_rank = static_cast<std::ptrdiff_t>(std::ceil(n / 2.0 + half));
  m.lo = values[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(lo_rank - 1, 0, n - 1))];
  m.hi = values[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(hi_rank - 1, 0, n - 1))];
  m.censored = m.median >= cap;
  return m;
}

}  // namespace toomqca
