#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "cpr/degree.hpp"

using cpr::DegreeDistribution;

namespace {

// Independent oracle: plain power sum evaluated term by term in long double.
long double brute_eval(const std::vector<double>& coeffs, long double x) {
  long double acc = 0.0L;
  for (std::size_t l = 0; l < coeffs.size(); ++l) acc += coeffs[l] * std::pow(x, (long double)l);
  return acc;
}

long double brute_derivative(const std::vector<double>& coeffs, long double x) {
  long double acc = 0.0L;
  for (std::size_t l = 1; l < coeffs.size(); ++l)
    acc += (long double)l * coeffs[l] * std::pow(x, (long double)(l - 1));
  return acc;
}

DegreeDistribution mix4() {
  return DegreeDistribution::from_coeffs({0, 0, 0.5102, 0, 0.4898});
}

// Random distribution over degrees 1..8 (optionally forcing degree-1 mass to
// zero), normalized exactly.
DegreeDistribution random_dist(std::mt19937_64& rng, bool min_two) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(9, 0.0);
  double sum = 0.0;
  for (std::size_t l = min_two ? 2 : 1; l < c.size(); ++l) {
    c[l] = u(rng);
    sum += c[l];
  }
  for (auto& x : c) x /= sum;
  double acc = 0.0;
  for (std::size_t l = 1; l + 1 < c.size(); ++l) acc += c[l];
  c.back() = 1.0 - acc;  // absorb rounding so the sum is exactly 1
  return DegreeDistribution::from_coeffs(c);
}

}  // namespace

TEST_CASE("generating function values") {
  const auto x5 = DegreeDistribution::monomial(5);
  CHECK(x5.eval(1.0) == 1.0);
  CHECK(x5.eval(0.0) == 0.0);
  // 0.5102*x^2 + 0.4898*x^4 at 0.5: brute oracle gives 0.1581625
  const auto m = mix4();
  CHECK(m.eval(0.5) == doctest::Approx(0.1581625).epsilon(1e-12));
  CHECK(m.eval(0.5) ==
        doctest::Approx((double)brute_eval(m.coeffs(), 0.5L)).epsilon(1e-14));
  CHECK_THROWS_AS(m.eval(-0.1), std::domain_error);
  CHECK_THROWS_AS(m.eval(1.1), std::domain_error);
}

TEST_CASE("mean degree") {
  CHECK(DegreeDistribution::monomial(5).mean_degree() == 5.0);
  CHECK(mix4().mean_degree() == doctest::Approx(2.9796).epsilon(1e-13));
  // soliton-like mean via brute-force sum over coefficients
  const auto s = DegreeDistribution::soliton_like(100);
  long double brute = 0.0L;
  for (std::size_t l = 0; l < s.coeffs().size(); ++l) brute += (long double)l * s.coeffs()[l];
  CHECK(s.mean_degree() == doctest::Approx((double)brute).epsilon(1e-13));
}

TEST_CASE("excess distribution") {
  const auto x5 = DegreeDistribution::monomial(5);
  CHECK(x5.excess(0.5) == doctest::Approx(0.0625).epsilon(1e-13));  // x^4 at 0.5
  const auto m = mix4();
  CHECK(m.excess(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // (1.0204*0.5 + 1.9592*0.125)/2.9796
  CHECK(m.excess(0.5) ==
        doctest::Approx((1.0204 * 0.5 + 1.9592 * 0.125) / 2.9796).epsilon(1e-13));
}

TEST_CASE("inverse excess") {
  const auto x5 = DegreeDistribution::monomial(5);
  CHECK(x5.inverse_excess(0.0625) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(x5.inverse_excess(0.0) == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(x5.inverse_excess(1.0) == doctest::Approx(1.0).epsilon(1e-11));
  const auto deg1 = DegreeDistribution::from_coeffs({0, 0.5, 0.5});
  CHECK_THROWS_AS(deg1.inverse_excess(0.5), std::logic_error);
}

TEST_CASE("erasure transform") {
  const auto x2 = DegreeDistribution::monomial(2);
  const auto t = x2.erasure_transform(0.5);  // (0.5 + 0.5x)^2
  REQUIRE(t.coeffs().size() == 3);
  CHECK(t.coeff(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t.coeff(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.coeff(2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t.erased());

  const auto id = x2.erasure_transform(0.0);
  CHECK(id.coeff(2) == 1.0);
  CHECK_FALSE(id.erased());

  const auto all = x2.erasure_transform(1.0);
  CHECK(all.coeff(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all.mean_degree() == 0.0);
}

TEST_CASE("soliton-like construction") {
  const auto s1 = DegreeDistribution::soliton_like(1);
  CHECK(s1.coeff(2) == doctest::Approx(1.0).epsilon(1e-15));
  const auto s2 = DegreeDistribution::soliton_like(2);
  CHECK(s2.coeff(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s2.coeff(3) == doctest::Approx(0.5).epsilon(1e-15));
  for (int k : {1, 2, 7, 55, 300}) {
    const auto s = DegreeDistribution::soliton_like(k);
    double sum = 0.0;
    for (double c : s.coeffs()) sum += c;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.min_degree_two());
  }
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(DegreeDistribution::from_coeffs({0.1, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::from_coeffs({0, 0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::from_coeffs({0, -0.5, 1.5}), std::invalid_argument);
}

TEST_CASE("property: eval stays in [0,1] and is nondecreasing") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dist(rng, rep % 2 == 0);
    for (int i = 0; i < 100; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const double fa = d.eval(a), fb = d.eval(b);
      CHECK(fa >= 0.0);
      CHECK(fb <= 1.0);
      CHECK(fa <= fb + 1e-15);
    }
  }
}

TEST_CASE("property: excess * mean equals derivative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dist(rng, false);
    for (int i = 0; i < 50; ++i) {
      const double x = u(rng);
      CHECK(d.excess(x) * d.mean_degree() ==
            doctest::Approx(d.derivative(x)).epsilon(1e-12));
      CHECK(d.derivative(x) ==
            doctest::Approx((double)brute_derivative(d.coeffs(), x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: inverse_excess is a right inverse on [0,1]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_dist(rng, true);
    for (int i = 0; i < 40; ++i) {
      const double x = u(rng);
      CHECK(d.inverse_excess(d.excess(x)) == doctest::Approx(x).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: erasure thinning scales the mean") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dist(rng, false);
    const double p = u(rng);
    const auto t = d.erasure_transform(p);
    CHECK(t.mean_degree() == doctest::Approx((1.0 - p) * d.mean_degree()).epsilon(1e-12));
    // generating-function identity at a few points
    for (double x : {0.0, 0.3, 0.9, 1.0})
      CHECK(t.eval(x) == doctest::Approx(d.eval(p + (1 - p) * x)).epsilon(1e-12));
  }
}
