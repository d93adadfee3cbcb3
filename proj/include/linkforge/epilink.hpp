#pragma once
// EpiLink scoring: field frequencies, error rates from the weight vector,
// the epiweight aggregate and the Pareto-tail classification threshold.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "linkforge/error.hpp"
#include "linkforge/gpd.hpp"
#include "linkforge/records.hpp"
#include "linkforge/similarity.hpp"

namespace linkforge {

using FieldVector = std::array<double, kFieldCount>;

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kMinQuantile = 0.90;
inline constexpr double kMaxQuantile = 0.99;

struct MatchConfig {
  FieldVector weights{};  // first, middle, last, age, village, sex, honorific
  double exceedance_quantile = 0.95;

  static MatchConfig uniform(double q = 0.95) {
    MatchConfig c;
    c.weights.fill(1.0 / static_cast<double>(kFieldCount));
    c.exceedance_quantile = q;
    return c;
  }

  void validate() const {
    double sum = 0;
    for (double w : weights) {
      if (!(w >= 0.0)) fail(ErrorKind::config, "match config: weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance)
      fail(ErrorKind::config, "match config: weights must sum to 1");
    if (!(exceedance_quantile >= kMinQuantile - 1e-12 && exceedance_quantile <= kMaxQuantile + 1e-12))
      fail(ErrorKind::config, "match config: exceedance quantile must lie in [0.90, 0.99]");
  }

  bool operator==(const MatchConfig&) const = default;
};

struct FrequencyResult {
  double f = 1.0;
  bool degenerate = false;  // every value missing
};

// 1 / (number of distinct non-missing values).
template <typename Range>
FrequencyResult average_frequency(const Range& values) {
  std::set<std::decay_t<decltype(**std::begin(values))>> distinct;
  for (const auto& v : values)
    if (v) distinct.insert(*v);
  if (distinct.empty()) return {1.0, true};
  return {1.0 / static_cast<double>(distinct.size()), false};
}

// Per-field frequencies over residents and contacts combined.
struct FrequencyTable {
  FieldVector f{};
  std::array<bool, kFieldCount> degenerate{};
};

inline FrequencyTable field_frequencies(const std::vector<ResidentRecord>& residents,
                                        const std::vector<ContactRecord>& contacts) {
  std::array<std::vector<std::optional<std::string>>, kFieldCount> cols;
  auto add_name = [&](const NameParts& n) {
    if (!n.usable) return;
    const auto f = name_fields(n.components);
    if (f.has_first) cols[0].push_back(f.first);
    if (f.has_middle) cols[1].push_back(f.middle);
    if (f.has_last) cols[2].push_back(f.last);
  };
  auto add = [&](Field fld, std::optional<std::string> v) { cols[static_cast<std::size_t>(fld)].push_back(std::move(v)); };
  auto opt_str = [](const std::optional<int>& v) { return v ? std::optional<std::string>(std::to_string(*v)) : std::nullopt; };
  auto sex_str = [](const std::optional<Sex>& v) { return v ? std::optional<std::string>(std::string(to_string(*v))) : std::nullopt; };
  auto village = [](std::string_view v) {
    auto k = village_key(v);
    return k.empty() ? std::nullopt : std::optional<std::string>(k);
  };

  for (const auto& r : residents) {
    add_name(r.name);
    add(Field::age, opt_str(r.age));
    add(Field::village, village(r.village));
    add(Field::sex, sex_str(r.sex));
    add(Field::honorific, detail::honorific_string(r.name));
  }
  for (const auto& c : contacts) {
    add_name(c.name);
    add(Field::age, opt_str(c.reported_age));
    add(Field::village, c.reported_village ? village(*c.reported_village) : std::nullopt);
    add(Field::sex, sex_str(c.imputed_sex));
    add(Field::honorific, detail::honorific_string(c.name));
  }
  FrequencyTable out;
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    const auto r = average_frequency(cols[i]);
    out.f[i] = r.f;
    out.degenerate[i] = r.degenerate;
  }
  return out;
}

// Closed-form minimizer of sum (e_i - w_i)^2 subject to e_i <= 1 - f_i.
inline FieldVector solve_error_rates(const FieldVector& w, const FieldVector& f) {
  FieldVector e{};
  for (std::size_t i = 0; i < kFieldCount; ++i) e[i] = std::min(w[i], 1.0 - f[i]);
  return e;
}

struct FieldStats {
  FieldVector f{};
  FieldVector e{};
  FieldVector p{};  // log2((1 - e) / f)
};

inline FieldStats field_stats(const FieldVector& w, const FieldVector& f) {
  FieldStats s;
  s.f = f;
  s.e = solve_error_rates(w, f);
  for (std::size_t i = 0; i < kFieldCount; ++i) s.p[i] = std::max(0.0, std::log2((1.0 - s.e[i]) / f[i]));
  return s;
}

// Weighted mean of the present similarities; missing fields leave both sums.
// nullopt when no present field carries positive weight.
inline std::optional<double> epiweight(const FieldSimilarities& sims, const FieldVector& p) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    if (!((sims.present >> i) & 1u)) continue;
    num += p[i] * sims.value[i];
    den += p[i];
  }
  if (!(den > 0)) return std::nullopt;
  return std::clamp(num / den, 0.0, 1.0);
}

inline std::optional<double> epiweight(const FieldSimilarities& sims, const FieldStats& stats) {
  return epiweight(sims, stats.p);
}

// Threshold estimation -------------------------------------------------------

inline constexpr double kThresholdTailQuantile = 0.95;
inline constexpr std::size_t kMinScoresForFit = 100;
inline constexpr std::size_t kMinExceedances = 30;

struct ThresholdFit {
  double u = 0;      // exceedance threshold
  double sigma = 0;  // GPD scale
  double xi = 0;     // GPD shape
  double t = 0;      // classification threshold
  std::size_t n_scores = 0;
  std::size_t n_exceedances = 0;
  double log_likelihood = 0;
  bool fallback = false;
  double quantile = 0;

  bool operator==(const ThresholdFit&) const = default;
};

// Fits on scores whose suffix from sorted_from is ascending and bounds every
// earlier element from above; the q-quantile must fall inside that suffix.
// Requires at least 100 scores unless allow_small, in which case smaller
// samples take the empirical fallback path directly.
inline ThresholdFit fit_gpd_threshold_partial(std::span<const double> sorted, std::size_t sorted_from, double q,
                                              bool allow_small = false) {
  require(q >= kMinQuantile - 1e-12 && q <= kMaxQuantile + 1e-12, "exceedance quantile must lie in [0.90, 0.99]");
  if (sorted.size() < kMinScoresForFit && !allow_small)
    fail(ErrorKind::insufficient_data,
         "threshold fit needs at least 100 scores, got " + std::to_string(sorted.size()));
  ThresholdFit fit;
  fit.quantile = q;
  fit.n_scores = sorted.size();
  if (sorted.empty()) {
    fit.fallback = true;
    fit.t = 1.0;
    return fit;
  }
  require(sorted_from <= static_cast<std::size_t>(std::floor((static_cast<double>(sorted.size()) - 1.0) * q)),
          "quantile position precedes the sorted suffix");
  fit.u = gpd::quantile_sorted(sorted, q);
  const auto first_exceed =
      std::upper_bound(sorted.begin() + static_cast<std::ptrdiff_t>(sorted_from), sorted.end(), fit.u);
  const std::span<const double> tail(first_exceed, sorted.end());
  fit.n_exceedances = tail.size();

  auto empirical = [&] {
    fit.fallback = true;
    fit.sigma = 0;
    fit.xi = 0;
    fit.log_likelihood = 0;
    fit.t = tail.empty() ? fit.u : gpd::quantile_sorted(tail, kThresholdTailQuantile);
  };
  if (sorted.size() < kMinScoresForFit || tail.size() < kMinExceedances) {
    empirical();
    return fit;
  }
  std::vector<double> y(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) y[i] = tail[i] - fit.u;
  const auto mle = gpd::fit_mle(std::span<const double>(y));
  if (!mle.converged) {
    empirical();
    return fit;
  }
  fit.sigma = mle.params.sigma;
  fit.xi = mle.params.xi;
  fit.log_likelihood = mle.log_likelihood;
  fit.t = fit.u + gpd::tail_quantile(mle.params, 1.0 - kThresholdTailQuantile);
  return fit;
}

// Fits on ascending scores.
inline ThresholdFit fit_gpd_threshold_sorted(std::span<const double> sorted, double q, bool allow_small = false) {
  return fit_gpd_threshold_partial(sorted, 0, q, allow_small);
}

inline ThresholdFit fit_gpd_threshold(std::vector<double> scores, double q, bool allow_small = false) {
  std::sort(scores.begin(), scores.end());
  return fit_gpd_threshold_sorted(scores, q, allow_small);
}

}  // namespace linkforge
