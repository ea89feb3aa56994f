#pragma once

#include <cstdint>
#include <vector>

#include "cpr/evolution.hpp"

namespace cpr {

enum class CopyState : std::uint8_t { Present, Removed, Decoded };

struct CopyRec {
  std::int32_t user = -1;
  std::int32_t receiver = -1;
  // Cooperative receivers: 0/1 selects the internal sub-slot, -1 occupies
  // both. -1 everywhere else.
  std::int8_t sub_slot = -1;
  bool sic_sticky = false;  // removal of this copy fails permanently
  double fade = 0.0;        // block fading draw, Rayleigh receivers only
};

struct UserRec {
  std::int32_t cls = 0;
  std::vector<std::int32_t> copies;
};

struct ReceiverRec {
  std::int32_t cls = 0;
  bool error_flag = false;  // DFoldWithErrors: receiver never decodes
  std::vector<std::int32_t> copies;
};

/// One sampled user-receiver graph. Fades, error flags and sticky flags are
/// drawn at build time, so peeling a given instance is deterministic.
struct BipartiteInstance {
  int T = 0;
  std::uint64_t seed = 0;
  double p_sic = 0.0;
  std::vector<ReceiverModel> models;  // per receiver class
  std::vector<UserRec> users;
  std::vector<ReceiverRec> receivers;
  std::vector<CopyRec> copies;
  std::vector<int> users_per_class;
};

struct SimOutcome {
  std::vector<double> success_fraction;  // resolved/class count, 1 when empty
  std::vector<double> throughput;        // resolved per slot
  std::vector<double> fraction_stderr;   // zeros for a single peel
  int iterations = 0;
  std::uint64_t seed = 0;
  int T = 0;
  int trials = 1;
  // Filled by peel() only, empty after run_trials().
  std::vector<int> resolved_per_iteration;
  std::vector<CopyState> copy_states;
  std::vector<char> user_resolved;
};

// Deterministic given seed. User counts are round(G_k*T) (Poisson-drawn when
// poisson_counts); receiver counts apportion F_j*T by largest remainder.
// Copies are erased with probability p_era before routing.
BipartiteInstance build_instance(const SystemConfig& config, const std::vector<double>& load,
                                 int T, std::uint64_t seed, bool poisson_counts = false);

// Iterative SIC peeling: alternates intra-receiver decoding (per model
// semantics) with inter-receiver removal of resolved users' other copies
// (each removal fails permanently with probability p_sic via the pre-drawn
// sticky flags). order_seed != 0 shuffles the receiver processing order; the
// fixpoint does not depend on it.
SimOutcome peel(const BipartiteInstance& instance, int max_iter,
                std::uint64_t order_seed = 0);

// Averages peel over independent trials with counter-derived per-trial seeds.
SimOutcome run_trials(const SystemConfig& config, const std::vector<double>& load, int T,
                      int trials, int max_iter, std::uint64_t seed, int workers = 1,
                      bool poisson_counts = false);

// Counter-based seed splitting used for per-trial streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter);

}  // namespace cpr
