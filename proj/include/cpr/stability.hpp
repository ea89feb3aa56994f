#pragma once

#include <string>
#include <vector>

#include "cpr/evolution.hpp"

namespace cpr {

enum class StabilityClass { Stable, WeaklyStable, Unstable, Indeterminate };

std::string to_string(StabilityClass c);

struct StabilityTols {
  double stable_tol = 1e-9;  // ||q_inf|| below this is "zero"
  double equal_tol = 1e-7;   // gap between the two limits below this is "equal"
  double de_tol = 1e-12;
  int max_iter = 10000;
  // Additionally require pointwise uniqueness at ray_samples points along the
  // segment from the origin (the definition quantifies over all dominated
  // loads; sampling is the numerical surrogate).
  bool strict_weak = false;
  int ray_samples = 16;
};

struct StabilityVerdict {
  StabilityClass verdict = StabilityClass::Indeterminate;
  std::vector<double> q_from_ones;
  std::vector<double> q_from_zeros;
  std::vector<double> success_probs;  // at the all-ones limit
};

// Runs the recursion from both endpoints: Stable when the all-ones limit is
// zero, WeaklyStable when both limits coincide, Unstable otherwise,
// Indeterminate when either iteration failed to converge.
StabilityVerdict classify_load(const SystemConfig& config, const std::vector<double>& load,
                               const StabilityTols& tols = {});

struct EpsilonSpec {
  std::vector<double> eps;  // one entry per user class, each in [0,1]
};

struct EpsilonResult {
  bool stable = false;                     // q_inf_k <= excess_k(eps_k) for all k
  std::vector<double> guaranteed_success;  // 1 - Lambda_k(eps_k), reported always
  std::vector<double> q_from_ones;
  bool converged = false;
};

// Requires every (effective) degree distribution to have no degree-1 mass.
EpsilonResult epsilon_stable(const SystemConfig& config, const std::vector<double>& load,
                             const EpsilonSpec& eps, const StabilityTols& tols = {});

// Lattice check of the sufficient stability condition: true certifies
// stability up to grid resolution, false is inconclusive. Uses the p-space
// form when every distribution has min degree two, the q-space form otherwise.
bool check_sufficient_stability(const SystemConfig& config, const std::vector<double>& load,
                                int grid_n);

// Epsilon variant: the lattice excludes the box [0,eps].
bool check_sufficient_epsilon(const SystemConfig& config, const std::vector<double>& load,
                              const EpsilonSpec& eps, int grid_n);

// inf over p in (0,1) of -log(1-p)/Lambda'(p): loads strictly below the
// returned value are stable for single-class slotted-ALOHA IRSA. Dense scan
// plus golden-section refinement; requires min degree two.
double irsa_threshold(const DegreeDistribution& dist, double tol = 1e-10);

struct StabilityCriterion {
  enum class Kind { Stable, WeaklyStable, EpsilonStable };
  Kind kind = Kind::Stable;
  std::vector<double> eps;  // used by EpsilonStable

  static StabilityCriterion stable() { return {Kind::Stable, {}}; }
  static StabilityCriterion weakly_stable() { return {Kind::WeaklyStable, {}}; }
  static StabilityCriterion epsilon(std::vector<double> e) {
    return {Kind::EpsilonStable, std::move(e)};
  }
};

std::string to_string(const StabilityCriterion& c);

// True when the load meets the criterion (Indeterminate never does).
bool meets_criterion(const SystemConfig& config, const std::vector<double>& load,
                     const StabilityCriterion& criterion, const StabilityTols& tols = {});

// Bisection on the scalar multiplier along `direction`. The bracket must
// straddle: criterion met at lo*direction, not met at hi*direction. For the
// WeaklyStable criterion pick hi inside the non-uniqueness window (pointwise
// uniqueness can return far above the threshold once the small solution
// disappears).
double percolation_threshold_1d(const SystemConfig& config,
                                const std::vector<double>& direction, double lo, double hi,
                                const StabilityCriterion& criterion, double tol,
                                const StabilityTols& tols = {});

}  // namespace cpr
