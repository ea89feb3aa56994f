#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "cpr/receivers.hpp"

using cpr::LoadVector;
using cpr::ReceiverModel;

TEST_CASE("d-fold closed forms") {
  const auto sa = ReceiverModel::slotted_aloha();
  CHECK(sa.success_prob({0.0})[0] == 1.0);
  CHECK(sa.success_prob({1.0})[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  const auto d2 = ReceiverModel::d_fold(2);
  CHECK(d2.success_prob({0.0})[0] == 1.0);
  CHECK(d2.success_prob({1.0})[0] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));

  const auto err = ReceiverModel::d_fold_with_errors(1, 0.01);
  CHECK(err.success_prob({0.0})[0] == 0.99);

  // multi-class: same value per class, driven by the total load
  const auto d3 = ReceiverModel::d_fold(3, 2);
  const auto p = d3.success_prob({0.4, 0.8});
  const auto q = d3.success_prob({1.2, 0.0});
  CHECK(p[0] == p[1]);
  CHECK(p[0] == doctest::Approx(q[0]).epsilon(1e-15));

  CHECK_THROWS_AS(sa.success_prob({0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(sa.success_prob({-0.5}), std::domain_error);
}

TEST_CASE("cooperative receivers") {
  const auto coop = ReceiverModel::cooperative_sa();
  const auto at0 = coop.success_prob({0.0, 0.0});
  CHECK(at0[0] == 1.0);
  CHECK(at0[1] == 1.0);
  const auto p = coop.success_prob({0.0, 2.0});
  CHECK(p[0] == doctest::Approx(2 * std::exp(-1.0) - std::exp(-2.0)).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("rayleigh floors") {
  const auto r20 = ReceiverModel::rayleigh_capture(20, 3);
  const double b = std::pow(10.0, 0.3);
  CHECK(r20.success_prob({0.0})[0] == doctest::Approx(std::exp(-b / 100.0)).epsilon(1e-12));
  CHECK(r20.success_prob({0.0})[0] == doctest::Approx(0.980245).epsilon(1e-6));
  const auto r5 = ReceiverModel::rayleigh_capture(5, 3);
  CHECK(r5.success_prob({0.0})[0] ==
        doctest::Approx(std::exp(-b / std::pow(10.0, 0.5))).epsilon(1e-12));
  CHECK(r5.success_prob({0.0})[0] == doctest::Approx(0.532082).epsilon(1e-6));
}

TEST_CASE("rayleigh expected decodes") {
  CHECK(cpr::rayleigh_expected_decodes(0, 10, 3) == 0.0);
  const double b = std::pow(10.0, 0.3), g = std::pow(10.0, 1.0);
  CHECK(cpr::rayleigh_expected_decodes(1, 10, 3) ==
        doctest::Approx(std::exp(-b / g)).epsilon(1e-13));
}

TEST_CASE("rayleigh expected decodes matches an SINR-SIC simulation") {
  // Independent oracle: draw unit-mean exponential fades, peel strongest
  // first while the SINR threshold holds.
  const double g = std::pow(10.0, 1.0), b = std::pow(10.0, 0.3);
  std::mt19937_64 rng(424242);
  std::exponential_distribution<double> expo(1.0);
  const int trials = 1000000, n = 3;
  long total = 0;
  long sq = 0;
  for (int t = 0; t < trials; ++t) {
    double x[n];
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += (x[i] = expo(rng));
    std::sort(x, x + n, std::greater<>());
    int k = 0;
    while (k < n && x[k] >= b * (sum - x[k] + 1.0 / g)) {
      sum -= x[k];
      ++k;
    }
    total += k;
    sq += (long)k * k;
  }
  const double mean = (double)total / trials;
  const double var = ((double)sq / trials - mean * mean);
  const double sigma = std::sqrt(var / trials);
  CHECK(std::fabs(cpr::rayleigh_expected_decodes(n, 10, 3) - mean) <= 3.0 * sigma);
}

TEST_CASE("rayleigh load mixture consistency") {
  // Poisson mixture of the per-count mean decode formula, divided by the
  // load, reproduces the tagged-packet success probability.
  for (double gamma_db : {5.0, 10.0, 20.0}) {
    const auto model = ReceiverModel::rayleigh_capture(gamma_db, 3);
    for (double rho : {0.3, 1.0, 3.0}) {
      double mixture = 0.0, pmf = std::exp(-rho);
      for (int n = 0; n < 200; ++n) {
        if (n > 0) pmf *= rho / n;
        mixture += pmf * cpr::rayleigh_expected_decodes(n, gamma_db, 3);
      }
      CHECK(model.success_prob({rho})[0] == doctest::Approx(mixture / rho).epsilon(1e-6));
    }
  }
}

TEST_CASE("property: success probabilities are componentwise nonincreasing") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  const ReceiverModel models[] = {
      ReceiverModel::slotted_aloha(), ReceiverModel::d_fold(3),
      ReceiverModel::d_fold_with_errors(2, 0.1), ReceiverModel::cooperative_sa(),
      ReceiverModel::rayleigh_capture(10, 3)};
  for (const auto& m : models) {
    CHECK(m.monotonicity_violation(6.0, 1000, rng()) <= 1e-9);
  }
}

TEST_CASE("boundary: floor-free models are exactly 1 at zero load") {
  CHECK(ReceiverModel::slotted_aloha().success_prob({0.0})[0] == 1.0);
  CHECK(ReceiverModel::d_fold(4).success_prob({0.0})[0] == 1.0);
  const auto coop = ReceiverModel::cooperative_sa().success_prob({0.0, 0.0});
  CHECK(coop[0] == 1.0);
  CHECK(coop[1] == 1.0);
}
