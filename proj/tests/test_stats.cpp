#include <doctest.h>

#include <cmath>
#include <limits>

#include "lgp/errors.hpp"
#include "lgp/stats.hpp"

using namespace lgp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double truncnorm_mean(double mu, double sigma, double lower, double upper) {
  const double a = (lower - mu) / sigma;
  const double b = (upper - mu) / sigma;
  const double pa = std::isinf(a) ? 0.0 : normal_cdf(a);
  const double pb = std::isinf(b) ? 1.0 : normal_cdf(b);
  const double da = std::isinf(a) ? 0.0 : normal_pdf(a);
  const double db = std::isinf(b) ? 0.0 : normal_pdf(b);
  return mu + sigma * (da - db) / (pb - pa);
}
}  // namespace

TEST_CASE("normal cdf and quantile invert each other") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  for (double x = -5.5; x <= 5.5; x += 0.11) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-8));
  }
  // The left tail keeps full relative precision through erfc.
  CHECK(normal_quantile(normal_cdf(-8.0)) == doctest::Approx(-8.0).epsilon(1e-9));
}

TEST_CASE("truncnorm without bounds is a plain normal draw") {
  Rng rng(101);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_truncnorm(1.5, 1.0, -kInf, kInf, rng);
  CHECK(sum / n == doctest::Approx(1.5).epsilon(0.015));
}

TEST_CASE("half-normal mean matches sqrt(2/pi)") {
  Rng rng(202);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_truncnorm(0.0, 1.0, 0.0, kInf, rng);
    REQUIRE(z >= 0.0);
    sum += z;
  }
  CHECK(sum / n == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.0125));
}

TEST_CASE("far tail draws stay finite and inside the region") {
  Rng rng(303);
  for (int i = 0; i < 100000; ++i) {
    const double z = sample_truncnorm(0.0, 1.0, 10.0, kInf, rng);
    REQUIRE(std::isfinite(z));
    REQUIRE(z > 10.0);
  }
}

TEST_CASE("two-sided truncation matches the analytic mean") {
  Rng rng(404);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_truncnorm(0.0, 1.0, -1.0, 0.5, rng);
  CHECK(sum / n == doctest::Approx(truncnorm_mean(0.0, 1.0, -1.0, 0.5)).epsilon(0.01));
}

TEST_CASE("draws always respect randomized bounds") {
  Rng rng(505);
  for (int i = 0; i < 2000; ++i) {
    const double mu = 4.0 * (rng.uniform() - 0.5);
    const double sigma = 0.1 + 2.0 * rng.uniform();
    const double lo = mu - 6.0 * rng.uniform();
    const double hi = lo + 0.05 + 4.0 * rng.uniform();
    const double z = sample_truncnorm(mu, sigma, lo, hi, rng);
    REQUIRE(z >= lo);
    REQUIRE(z <= hi);
  }
}

TEST_CASE("invalid truncnorm arguments") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_truncnorm(0.0, 0.0, 0.0, 1.0, rng), ValidationError);
  CHECK_THROWS_AS(sample_truncnorm(0.0, -1.0, 0.0, 1.0, rng), ValidationError);
  CHECK_THROWS_AS(sample_truncnorm(0.0, 1.0, 2.0, 1.0, rng), ValidationError);
}

TEST_CASE("rng is reproducible and derive decorrelates streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng::derive(7, 0) != Rng::derive(7, 1));
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const int v = c.uniform_int(2, 4);
    REQUIRE(v >= 2);
    REQUIRE(v <= 4);
  }
}
