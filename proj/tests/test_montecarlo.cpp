#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "cpr/montecarlo.hpp"
#include "cpr/stability.hpp"

using namespace cpr;

namespace {

SystemConfig single_irsa(DegreeDistribution d, double p_sic = 0.0, double p_era = 0.0) {
  return make_system_config({std::move(d)}, {ReceiverModel::slotted_aloha(1)}, {1.0}, {{1.0}},
                            p_sic, p_era);
}

}  // namespace

TEST_CASE("instance construction") {
  const auto c = single_irsa(DegreeDistribution::monomial(5));
  const auto empty = build_instance(c, {0.0}, 100, 1);
  CHECK(empty.users.empty());
  CHECK(empty.receivers.size() == 100);

  const auto inst = build_instance(c, {0.5}, 10000, 7);
  CHECK(inst.users.size() == 5000);
  for (const auto& u : inst.users) CHECK(u.copies.size() == 5);
  CHECK(inst.copies.size() == 25000);

  // determinism given the seed
  const auto again = build_instance(c, {0.5}, 10000, 7);
  REQUIRE(again.copies.size() == inst.copies.size());
  for (std::size_t i = 0; i < inst.copies.size(); ++i)
    CHECK(again.copies[i].receiver == inst.copies[i].receiver);

  // receiver apportionment sums to T even with awkward fractions
  const auto c3 = make_system_config(
      {DegreeDistribution::monomial(3)}, {ReceiverModel::slotted_aloha(1),
      ReceiverModel::slotted_aloha(1), ReceiverModel::slotted_aloha(1)},
      {1.0 / 3, 1.0 / 3, 1.0 / 3}, {{0.4, 0.3, 0.3}});
  const auto i3 = build_instance(c3, {0.2}, 1000, 3);
  CHECK(i3.receivers.size() == 1000);
}

TEST_CASE("per-receiver load is Poisson in the large-T limit") {
  const auto c = single_irsa(DegreeDistribution::monomial(5));
  const int T = 100000;
  const auto inst = build_instance(c, {0.5}, T, 99);
  std::vector<int> hist(32, 0);
  for (const auto& r : inst.receivers) hist[std::min<std::size_t>(r.copies.size(), 31)]++;
  // chi-square against Poisson(2.5), bins 0..11 plus tail
  const double rho = 2.5;
  double chi2 = 0.0;
  double pmf = std::exp(-rho), cum = 0.0;
  for (int k = 0; k <= 11; ++k) {
    if (k > 0) pmf *= rho / k;
    cum += pmf;
    int observed = k < 11 ? hist[k] : 0;
    if (k == 11)
      for (std::size_t m = 11; m < hist.size(); ++m) observed += hist[m];
    const double expected = T * (k < 11 ? pmf : 1.0 - (cum - pmf));
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  // 12 bins, 11 dof: 0.999 quantile is 31.3
  CHECK(chi2 < 31.3);
}

TEST_CASE("peeling resolves everything well below threshold") {
  const auto c = single_irsa(DegreeDistribution::monomial(5));
  const auto inst = build_instance(c, {0.5}, 10000, 11);
  const auto out = peel(inst, 500);
  CHECK(out.success_fraction[0] == doctest::Approx(1.0).epsilon(1e-6));
  // resolved counts grow monotonically across iterations
  for (std::size_t i = 1; i < out.resolved_per_iteration.size(); ++i)
    CHECK(out.resolved_per_iteration[i] >= out.resolved_per_iteration[i - 1]);
  // vacuous convention
  const auto none = peel(build_instance(c, {0.0}, 100, 1), 10);
  CHECK(none.success_fraction[0] == 1.0);
}

TEST_CASE("success drops sharply across the percolation threshold") {
  const auto c = single_irsa(DegreeDistribution::from_coeffs({0, 0, 0.5102, 0, 0.4898}));
  const auto below = run_trials(c, {0.80}, 10000, 10, 500, 21, 2);
  const auto above = run_trials(c, {0.95}, 10000, 10, 500, 21, 2);
  CHECK(below.success_fraction[0] > 0.99);
  CHECK(above.success_fraction[0] < 0.8);
}

TEST_CASE("perfect SIC leaves no copies of resolved users") {
  // run at a load past the threshold so both resolved and unresolved users
  // appear in the residual graph
  const auto c = single_irsa(DegreeDistribution::monomial(3));
  const auto inst = build_instance(c, {0.9}, 4000, 5);
  const auto out = peel(inst, 500);
  REQUIRE(out.copy_states.size() == inst.copies.size());
  int resolved = 0;
  for (std::size_t u = 0; u < inst.users.size(); ++u) {
    if (out.user_resolved[u]) {
      ++resolved;
      for (auto cidx : inst.users[u].copies)
        CHECK(out.copy_states[cidx] != CopyState::Present);
    } else {
      for (auto cidx : inst.users[u].copies)
        CHECK(out.copy_states[cidx] == CopyState::Present);
    }
  }
  CHECK(resolved > 0);
  CHECK(resolved < (int)inst.users.size());
}

TEST_CASE("order independence of the peeling fixpoint") {
  for (double p_sic : {0.0, 0.2}) {
    const auto c = make_system_config(
        {DegreeDistribution::monomial(3), DegreeDistribution::monomial(4)},
        {ReceiverModel::slotted_aloha(2), ReceiverModel::d_fold(2, 2)}, {0.5, 0.5},
        {{0.5, 0.5}, {0.3, 0.7}}, p_sic, 0.0);
    const auto inst = build_instance(c, {0.35, 0.3}, 3000, 17);
    const auto base = peel(inst, 500);
    for (std::uint64_t shuffle : {1ULL, 2ULL, 3ULL}) {
      const auto shuffled = peel(inst, 500, shuffle);
      CHECK(shuffled.success_fraction == base.success_fraction);
    }
  }
}

TEST_CASE("erasure thinning reaches the decoder") {
  const auto c = single_irsa(DegreeDistribution::monomial(5), 0.0, 0.3);
  const auto inst = build_instance(c, {0.5}, 20000, 23);
  double copies_per_user = double(inst.copies.size()) / inst.users.size();
  CHECK(copies_per_user == doctest::Approx(0.7 * 5).epsilon(0.02));
}

TEST_CASE("sticky copies persist with p_sic = 1") {
  // with p_sic = 1 every removal fails, so peeling reduces to per-receiver
  // decoding only; with x^2 users at moderate load many users stay unresolved
  const auto c = single_irsa(DegreeDistribution::monomial(2), 1.0);
  const auto out = run_trials(c, {0.45}, 5000, 5, 200, 29, 2);
  const auto perfect = run_trials(single_irsa(DegreeDistribution::monomial(2), 0.0),
                                  {0.45}, 5000, 5, 200, 29, 2);
  CHECK(out.success_fraction[0] < perfect.success_fraction[0] - 0.02);
}

TEST_CASE("rayleigh slot statistics match the closed-form mean") {
  // isolated slot: T=1, n degree-1 users, one peeling iteration
  const int n = 3;
  const auto c = make_system_config({DegreeDistribution::from_coeffs({0, 1.0})},
                                    {ReceiverModel::rayleigh_capture(10, 3, 1)}, {1.0},
                                    {{1.0}});
  const int trials = 100000;
  const auto out = run_trials(c, {double(n)}, 1, trials, 1, 31, 2);
  const double mean_resolved = out.success_fraction[0] * n;
  const double sigma = out.fraction_stderr[0] * n;
  const double expect = rayleigh_expected_decodes(n, 10, 3);
  CHECK(std::fabs(mean_resolved - expect) <= 3.0 * sigma);
}

TEST_CASE("cooperative unit follows the exchange rule") {
  // deterministic miniature: one unit, one class-0 user (both sub-slots) and
  // one class-1 user; the class-1 copy blocks one sub-slot, the other decodes
  // the class-0 packet, the exchange clears its duplicate, then the class-1
  // packet decodes.
  const auto c = make_system_config(
      {DegreeDistribution::from_coeffs({0, 1.0}), DegreeDistribution::from_coeffs({0, 1.0})},
      {ReceiverModel::cooperative_sa()}, {1.0}, {{1.0}, {1.0}});
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto inst = build_instance(c, {1.0, 1.0}, 1, seed);
    REQUIRE(inst.users.size() == 2);
    const auto out = peel(inst, 10);
    CHECK(out.success_fraction[0] == 1.0);
    CHECK(out.success_fraction[1] == 1.0);
  }
}

TEST_CASE("trial averaging and seed derivation") {
  const auto c = single_irsa(DegreeDistribution::monomial(3));
  const auto one = run_trials(c, {0.7}, 2000, 1, 500, 123, 1);
  const auto direct = peel(build_instance(c, {0.7}, 2000, derive_seed(123, 0)), 500);
  CHECK(one.success_fraction == direct.success_fraction);

  // well above threshold trials vary smoothly, so the stderr is positive and
  // quadrupling trials roughly halves it
  const auto few = run_trials(c, {0.95}, 2000, 25, 500, 123, 2);
  const auto many = run_trials(c, {0.95}, 2000, 100, 500, 123, 2);
  CHECK(few.fraction_stderr[0] > 0.0);
  CHECK(many.fraction_stderr[0] == doctest::Approx(few.fraction_stderr[0] / 2).epsilon(0.5));
  // workers do not change the outcome
  const auto serial = run_trials(c, {0.95}, 2000, 25, 500, 123, 1);
  CHECK(serial.success_fraction == few.success_fraction);
  CHECK(serial.fraction_stderr == few.fraction_stderr);
}

TEST_CASE("monte carlo agrees with density evolution") {
  // one spot check per receiver family at a comfortably stable load
  struct Case {
    SystemConfig config;
    std::vector<double> load;
  };
  const std::vector<Case> cases = {
      {single_irsa(DegreeDistribution::monomial(5)), {0.5}},
      {make_system_config({DegreeDistribution::monomial(3)}, {ReceiverModel::d_fold(2, 1)},
                          {1.0}, {{1.0}}),
       {1.0}},
      {make_system_config({DegreeDistribution::monomial(5)},
                          {ReceiverModel::d_fold_with_errors(1, 0.01, 1)}, {1.0}, {{1.0}}),
       {0.4}},
  };
  for (const auto& cs : cases) {
    const auto sim = run_trials(cs.config, cs.load, 10000, 40, 500, 4711, 2);
    const auto fp = de_fixed_point(cs.config, cs.load, Start::AllOnes);
    const auto analytic = success_probabilities(cs.config, cs.load, fp.q_final);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double slack = 3.0 * sim.fraction_stderr[k] + 1e-9;
      CHECK(std::fabs(sim.success_fraction[k] - analytic[k]) <= slack);
    }
  }
}
