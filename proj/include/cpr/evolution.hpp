#pragma once

#include <vector>

#include "cpr/degree.hpp"
#include "cpr/receivers.hpp"

namespace cpr {

/// Full description of a coded-Poisson-receiver system: K user classes with
/// degree distributions and routing rows, J receiver classes with fractions
/// and success models, plus the SIC-error and packet-erasure probabilities.
/// Build via make_system_config so invariants hold; immutable afterwards.
struct SystemConfig {
  int num_user_classes = 0;      // K
  int num_receiver_classes = 0;  // J
  std::vector<double> receiver_fractions;        // F_j, sums to 1
  std::vector<std::vector<double>> routing;      // routing[k][j], rows sum to 1
  std::vector<DegreeDistribution> dists;         // as configured
  std::vector<ReceiverModel> models;             // one per receiver class
  double p_sic = 0.0;
  double p_era = 0.0;

  // Derived at build time.
  std::vector<DegreeDistribution> effective_dists;  // erasure-thinned when p_era > 0
  bool all_routing_positive = false;                // gates the necessity direction

  const DegreeDistribution& effective_dist(int k) const { return effective_dists[k]; }
};

SystemConfig make_system_config(std::vector<DegreeDistribution> dists,
                                std::vector<ReceiverModel> models,
                                std::vector<double> receiver_fractions,
                                std::vector<std::vector<double>> routing,
                                double p_sic = 0.0, double p_era = 0.0);

enum class Start { AllOnes, AllZeros };

struct DeOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  bool keep_trace = false;
  // Round per-class success probabilities above 0.99999 up to 1 (figure
  // reproduction mode); off by default.
  bool round_success = false;
};

struct FixedPointResult {
  std::vector<double> q_final;
  Start start = Start::AllOnes;
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<double>> trace;  // iterates incl. q^(0), if requested
};

// Per-receiver-class offered loads rho^(j), entry k = G_k * mean_k * r_kj / F_j
// with the erasure-thinned mean degree when p_era > 0.
std::vector<LoadVector> offered_loads(const SystemConfig& config,
                                      const std::vector<double>& load);

// One step of the density-evolution recursion; q and the result live in [0,1]^K.
std::vector<double> de_step(const SystemConfig& config, const std::vector<double>& q,
                            const std::vector<double>& load);

// Iterate de_step from all-ones (largest fixed point) or all-zeros (smallest)
// until the sup-norm change drops below tol or max_iter is hit.
FixedPointResult de_fixed_point(const SystemConfig& config, const std::vector<double>& load,
                                Start start, const DeOptions& opts = {});

// Per-class packet success probabilities at state q.
std::vector<double> success_probabilities(const SystemConfig& config,
                                          const std::vector<double>& load,
                                          const std::vector<double>& q,
                                          bool round_success = false);

struct ThroughputResult {
  std::vector<double> per_class;
  double total = 0.0;
};

// Solves the fixed point from all-ones, then Theta_k = G_k * P_k.
ThroughputResult throughput(const SystemConfig& config, const std::vector<double>& load,
                            const DeOptions& opts = {});

}  // namespace cpr
