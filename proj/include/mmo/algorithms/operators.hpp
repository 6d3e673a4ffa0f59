#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mmo/core.hpp"
#include "mmo/random.hpp"

namespace mmo {

/// Bounded simulated binary crossover (Deb & Agrawal). With probability `prob`
/// the pair is recombined; each coordinate is then blended with probability
/// one half. Children are clamped to `bounds`.
inline std::pair<std::vector<double>, std::vector<double>> sbx_crossover(const std::vector<double>& p1,
                                                                         const std::vector<double>& p2,
                                                                         const Bounds& bounds, double eta, double prob,
                                                                         RandomStream& rng) {
  std::vector<double> c1 = p1;
  std::vector<double> c2 = p2;
  if (rng.uniform() >= prob) return {std::move(c1), std::move(c2)};
  const double exponent = 1.0 / (eta + 1.0);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (rng.uniform() > 0.5) continue;
    if (std::abs(p1[i] - p2[i]) <= 1e-14) continue;
    const double y1 = std::min(p1[i], p2[i]);
    const double y2 = std::max(p1[i], p2[i]);
    const double lo = bounds.lower[i];
    const double hi = bounds.upper[i];
    const double u = rng.uniform();

    double beta = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    double betaq = u <= 1.0 / alpha ? std::pow(u * alpha, exponent) : std::pow(1.0 / (2.0 - u * alpha), exponent);
    double a = 0.5 * ((y1 + y2) - betaq * (y2 - y1));

    beta = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    betaq = u <= 1.0 / alpha ? std::pow(u * alpha, exponent) : std::pow(1.0 / (2.0 - u * alpha), exponent);
    double b = 0.5 * ((y1 + y2) + betaq * (y2 - y1));

    a = std::clamp(a, lo, hi);
    b = std::clamp(b, lo, hi);
    if (rng.uniform() <= 0.5) std::swap(a, b);
    c1[i] = a;
    c2[i] = b;
  }
  return {std::move(c1), std::move(c2)};
}

/// Bounded polynomial mutation; each coordinate mutates with probability `prob`.
inline std::vector<double> polynomial_mutation(std::vector<double> x, const Bounds& bounds, double eta, double prob,
                                               RandomStream& rng) {
  const double exponent = 1.0 / (eta + 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.uniform() >= prob) continue;
    const double lo = bounds.lower[i];
    const double hi = bounds.upper[i];
    const double span = hi - lo;
    const double d1 = (x[i] - lo) / span;
    const double d2 = (hi - x[i]) / span;
    const double u = rng.uniform();
    double deltaq;
    if (u <= 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
      deltaq = std::pow(v, exponent) - 1.0;
    } else {
      const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
      deltaq = 1.0 - std::pow(v, exponent);
    }
    x[i] = std::clamp(x[i] + deltaq * span, lo, hi);
  }
  return x;
}

}  // namespace mmo
