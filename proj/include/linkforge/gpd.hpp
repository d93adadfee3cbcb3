#pragma once
// Generalized Pareto peaks-over-threshold fitting.
//
// Maximum likelihood uses the profile likelihood in theta = xi / sigma, for
// which the conditional MLE of xi is closed form:
//   xi(theta)    = mean(log(1 + theta * y))
//   sigma(theta) = xi(theta) / theta
//   l(theta)     = -n * log(sigma) - n * (1 + xi)
// The one-dimensional maximization is seeded by probability-weighted moments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "linkforge/error.hpp"

namespace linkforge::gpd {

struct Params {
  double sigma = 1.0;
  double xi = 0.0;
};

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7) on ascending data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

// Upper-tail quantile function: y such that P(Y > y) = tail.
inline double tail_quantile(const Params& p, double tail) {
  if (std::abs(p.xi) < 1e-12) return -p.sigma * std::log(tail);
  return p.sigma / p.xi * (std::pow(tail, -p.xi) - 1.0);
}

inline double log_likelihood(std::span<const double> y, const Params& p) {
  if (p.sigma <= 0) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(y.size());
  double acc = 0;
  if (std::abs(p.xi) < 1e-12) {
    for (double v : y) acc += v;
    return -n * std::log(p.sigma) - acc / p.sigma;
  }
  for (double v : y) {
    const double z = 1.0 + p.xi * v / p.sigma;
    if (z <= 0) return -std::numeric_limits<double>::infinity();
    acc += std::log(z);
  }
  return -n * std::log(p.sigma) - (1.0 + 1.0 / p.xi) * acc;
}

// Probability-weighted-moment estimator (Hosking and Wallis) on ascending
// exceedances.
inline std::optional<Params> pwm(std::span<const double> y_sorted) {
  const std::size_t n = y_sorted.size();
  if (n < 2) return std::nullopt;
  double a0 = 0, a1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i + 1) - 0.35) / static_cast<double>(n);
    a0 += y_sorted[i];
    a1 += (1.0 - p) * y_sorted[i];
  }
  a0 /= static_cast<double>(n);
  a1 /= static_cast<double>(n);
  const double denom = a0 - 2.0 * a1;
  if (!(std::abs(denom) > 0)) return std::nullopt;
  Params out{2.0 * a0 * a1 / denom, 2.0 - a0 / denom};
  if (!(out.sigma > 0) || !std::isfinite(out.xi)) return std::nullopt;
  return out;
}

struct MleResult {
  Params params;
  double log_likelihood = 0;
  bool converged = false;
};

namespace detail {

struct Profile {
  std::span<const double> y;
  double mean = 0, mean_sq = 0, ymax = 0;

  explicit Profile(std::span<const double> ys) : y(ys) {
    for (double v : y) {
      mean += v;
      mean_sq += v * v;
      ymax = std::max(ymax, v);
    }
    mean /= static_cast<double>(y.size());
    mean_sq /= static_cast<double>(y.size());
  }

  // Returns (xi, sigma) for a given theta, or nullopt outside the support.
  std::optional<Params> at(double theta) const {
    if (std::abs(theta) * ymax < 1e-7) {
      // second-order expansion around the exponential case
      const double xi = theta * mean - 0.5 * theta * theta * mean_sq;
      const double sigma = mean - 0.5 * theta * mean_sq;
      if (!(sigma > 0)) return std::nullopt;
      return Params{sigma, xi};
    }
    double acc = 0;
    for (double v : y) {
      const double z = 1.0 + theta * v;
      if (z <= 0) return std::nullopt;
      acc += std::log1p(theta * v);
    }
    const double xi = acc / static_cast<double>(y.size());
    const double sigma = xi / theta;
    if (!(sigma > 0) || !std::isfinite(sigma)) return std::nullopt;
    return Params{sigma, xi};
  }

  double value(double theta) const {
    auto p = at(theta);
    if (!p || p->xi <= -1.0) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(y.size());
    return -n * std::log(p->sigma) - n * (1.0 + p->xi);
  }
};

}  // namespace detail

// Maximum likelihood fit on positive exceedances. Searches phi = asinh(theta *
// mean(y)); fails (converged = false) when the maximum runs into the support
// boundary or xi <= -1, where the likelihood is unbounded.
inline MleResult fit_mle(std::span<const double> y_sorted) {
  MleResult out;
  if (y_sorted.size() < 2 || !(y_sorted.front() > 0)) return out;
  const detail::Profile prof(y_sorted);
  const double scale = prof.mean;
  const double phi_min = std::asinh(-scale / prof.ymax);
  const double phi_max = std::asinh(1e8);
  auto theta_of = [&](double phi) { return std::sinh(phi) / scale; };
  auto f = [&](double phi) {
    if (phi <= phi_min) return -std::numeric_limits<double>::infinity();
    return prof.value(theta_of(phi));
  };

  double phi0 = 0.0;
  if (auto init = pwm(y_sorted); init && init->xi > -1.0)
    phi0 = std::clamp(std::asinh(init->xi / init->sigma * scale), phi_min + 1e-6, phi_max);
  if (!std::isfinite(f(phi0))) phi0 = 0.0;

  // Bracket the maximum by stepping uphill with growing steps.
  const double fa = f(phi0);
  double h = 0.25;
  const double fr = f(phi0 + h), fl = f(phi0 - h);
  double lo = phi0 - h, hi = phi0 + h;
  if (fr > fa || fl > fa) {
    const double dir = fr > fl ? 1.0 : -1.0;
    double prev = phi0, cur = phi0 + dir * h, fcur = std::max(fr, fl);
    for (int it = 0;; ++it) {
      if (it == 200) return out;
      h *= 1.6;
      double next = cur + dir * h;
      if (next <= phi_min) next = 0.5 * (cur + phi_min);
      if (next > phi_max) return out;
      const double fnext = f(next);
      if (!(fnext > fcur)) {
        lo = std::min(prev, next);
        hi = std::max(prev, next);
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
      if (cur - phi_min < 1e-10) return out;
    }
  }
  lo = std::max(lo, phi_min + 1e-12);

  // Golden-section refinement.
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-11 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  const double phi = 0.5 * (lo + hi);
  const auto p = prof.at(theta_of(phi));
  if (!p || !(p->xi > -1.0 + 1e-6) || !std::isfinite(p->sigma)) return out;
  if (phi - phi_min < 1e-8) return out;
  out.params = *p;
  out.log_likelihood = log_likelihood(y_sorted, *p);
  out.converged = std::isfinite(out.log_likelihood);
  return out;
}

inline MleResult fit_mle(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  return fit_mle(std::span<const double>(y));
}

}  // namespace linkforge::gpd
