#include <gtest/gtest.h>

#include <random>

#include "linkforge/epilink.hpp"
#include "linkforge/gpd.hpp"

namespace lf = linkforge;

namespace {

// Inverse-CDF sampling from GPD(sigma, xi).
std::vector<double> sample_gpd(double sigma, double xi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) {
    const double p = u(rng);
    v = std::abs(xi) < 1e-12 ? -sigma * std::log1p(-p) : sigma / xi * (std::pow(1.0 - p, -xi) - 1.0);
  }
  return y;
}

}  // namespace

TEST(Quantile, Type7) {
  std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(lf::gpd::quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(lf::gpd::quantile(v, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(lf::gpd::quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(lf::gpd::quantile(std::vector<double>{7}, 0.3), 7.0);
}

TEST(GpdMle, RecoversHeavyTail) {
  const auto y = sample_gpd(1.0, 0.1, 10000, 1);
  const auto fit = lf::gpd::fit_mle(y);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.params.sigma, 1.0, 0.1);
  EXPECT_NEAR(fit.params.xi, 0.1, 0.05);
}

TEST(GpdMle, RecoversBoundedTail) {
  const auto y = sample_gpd(0.5, -0.3, 20000, 2);
  const auto fit = lf::gpd::fit_mle(y);
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.params.sigma, 0.5, 0.05);
  EXPECT_NEAR(fit.params.xi, -0.3, 0.05);
}

TEST(GpdMle, BeatsNeighbouringParameters) {
  const auto y = sample_gpd(2.0, 0.2, 3000, 3);
  const auto fit = lf::gpd::fit_mle(y);
  ASSERT_TRUE(fit.converged);
  const double best = lf::gpd::log_likelihood(y, fit.params);
  for (double ds : {-0.01, 0.0, 0.01})
    for (double dx : {-0.01, 0.0, 0.01}) {
      const lf::gpd::Params p{fit.params.sigma * (1 + ds), fit.params.xi + dx};
      EXPECT_LE(lf::gpd::log_likelihood(y, p), best + 1e-9);
    }
}

TEST(GpdMle, MeanOfReplicatesIsUnbiasedEnough) {
  double s_sum = 0, x_sum = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    const auto fit = lf::gpd::fit_mle(sample_gpd(1.0, 0.1, 10000, 100 + r));
    ASSERT_TRUE(fit.converged);
    s_sum += fit.params.sigma;
    x_sum += fit.params.xi;
  }
  EXPECT_NEAR(s_sum / reps, 1.0, 0.02);
  EXPECT_NEAR(x_sum / reps, 0.1, 0.01);
}

TEST(GpdMle, PwmInitializerIsReasonable) {
  auto y = sample_gpd(1.0, 0.1, 20000, 9);
  std::sort(y.begin(), y.end());
  const auto p = lf::gpd::pwm(y);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->sigma, 1.0, 0.1);
  EXPECT_NEAR(p->xi, 0.1, 0.1);
}

TEST(ThresholdFit, ExponentialTailClosedForm) {
  // Exponential scores are memoryless: exceedances over any u are Exp(1).
  std::mt19937_64 rng(77);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> scores(100000);
  for (auto& v : scores) v = ex(rng);
  const auto fit = lf::fit_gpd_threshold(scores, 0.9);
  ASSERT_FALSE(fit.fallback);
  const double expected = fit.u + std::log(20.0);
  EXPECT_NEAR(fit.t, expected, 0.02 * expected);
  EXPECT_GE(fit.t, fit.u);
}

TEST(ThresholdFit, FallbackWithFewExceedances) {
  // 480 tied scores put u at 0.1 and leave 20 exceedances, below the minimum.
  std::vector<double> tied(480, 0.1);
  for (int i = 0; i < 20; ++i) tied.push_back(0.5 + i * 0.01);
  const auto fit = lf::fit_gpd_threshold(tied, 0.95);
  EXPECT_TRUE(fit.fallback);
  EXPECT_LT(fit.n_exceedances, lf::kMinExceedances);
  std::vector<double> tail(tied.end() - static_cast<long>(fit.n_exceedances), tied.end());
  EXPECT_DOUBLE_EQ(fit.t, lf::gpd::quantile(tail, 0.95));
}

TEST(ThresholdFit, InsufficientData) {
  std::vector<double> s(99, 0.5);
  try {
    lf::fit_gpd_threshold(s, 0.95);
    FAIL();
  } catch (const lf::Error& e) {
    EXPECT_EQ(e.kind(), lf::ErrorKind::insufficient_data);
  }
  EXPECT_NO_THROW(lf::fit_gpd_threshold(s, 0.95, /*allow_small=*/true));
}

TEST(ThresholdFit, DeterministicAndAboveU) {
  std::mt19937_64 rng(12);
  std::gamma_distribution<double> g(2.0, 1.0);
  std::vector<double> s(5000);
  for (auto& v : s) v = 1.0 - std::exp(-g(rng));
  const auto a = lf::fit_gpd_threshold(s, 0.95);
  const auto b = lf::fit_gpd_threshold(s, 0.95);
  EXPECT_EQ(a, b);
  EXPECT_GE(a.t, a.u);
}

TEST(ThresholdFit, FallbackThresholdMonotoneInQuantile) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> s(60 + rng() % 40);
    for (auto& v : s) v = u(rng);
    double prev = -1;
    for (double q = 0.90; q <= 0.99 + 1e-9; q += 0.01) {
      const auto fit = lf::fit_gpd_threshold(s, q, true);
      ASSERT_TRUE(fit.fallback);
      ASSERT_GE(fit.t, prev);
      prev = fit.t;
    }
  }
}
