#include "cpr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cpr/parallel.hpp"

namespace cpr {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  // splitmix64 step on seed + counter * golden gamma
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Largest-remainder apportionment of fractions*total into integers summing
// to total.
std::vector<int> apportion(const std::vector<double>& fractions, int total) {
  const std::size_t n = fractions.size();
  std::vector<int> out(n);
  std::vector<std::pair<double, std::size_t>> rema(n);
  int assigned = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double exact = fractions[j] * total;
    out[j] = static_cast<int>(std::floor(exact));
    rema[j] = {exact - out[j], j};
    assigned += out[j];
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (int i = 0; i < total - assigned; ++i) out[rema[i % n].second] += 1;
  return out;
}

}  // namespace

BipartiteInstance build_instance(const SystemConfig& config, const std::vector<double>& load,
                                 int T, std::uint64_t seed, bool poisson_counts) {
  if (T < 1) throw std::invalid_argument("build_instance: T must be >= 1");
  if (static_cast<int>(load.size()) != config.num_user_classes)
    throw std::invalid_argument("build_instance: load size != number of user classes");

  BipartiteInstance inst;
  inst.T = T;
  inst.seed = seed;
  inst.p_sic = config.p_sic;
  inst.models = config.models;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto receiver_counts = apportion(config.receiver_fractions, T);
  std::vector<int> receiver_base(config.num_receiver_classes, 0);
  inst.receivers.reserve(T);
  for (int j = 0; j < config.num_receiver_classes; ++j) {
    receiver_base[j] = static_cast<int>(inst.receivers.size());
    for (int r = 0; r < receiver_counts[j]; ++r) {
      ReceiverRec rec;
      rec.cls = j;
      if (config.models[j].kind() == ReceiverKind::DFoldWithErrors)
        rec.error_flag = unit(rng) < config.models[j].p_err();
      inst.receivers.push_back(std::move(rec));
    }
  }

  std::vector<std::discrete_distribution<int>> degree_draw;
  std::vector<std::discrete_distribution<int>> route_draw;
  for (int k = 0; k < config.num_user_classes; ++k) {
    const auto& c = config.dists[k].coeffs();
    degree_draw.emplace_back(c.begin(), c.end());
    route_draw.emplace_back(config.routing[k].begin(), config.routing[k].end());
  }

  inst.users_per_class.resize(config.num_user_classes);
  for (int k = 0; k < config.num_user_classes; ++k) {
    int count;
    if (poisson_counts) {
      std::poisson_distribution<int> pd(load[k] * T);
      count = load[k] > 0.0 ? pd(rng) : 0;
    } else {
      count = static_cast<int>(std::lround(load[k] * T));
    }
    inst.users_per_class[k] = count;
    for (int u = 0; u < count; ++u) {
      UserRec user;
      user.cls = k;
      const int user_id = static_cast<int>(inst.users.size());
      const int degree = degree_draw[k](rng);
      for (int c = 0; c < degree; ++c) {
        if (config.p_era > 0.0 && unit(rng) < config.p_era) continue;  // erased copy
        CopyRec copy;
        copy.user = user_id;
        const int j = route_draw[k](rng);
        std::uniform_int_distribution<int> pick(0, receiver_counts[j] - 1);
        copy.receiver = receiver_base[j] + pick(rng);
        const auto& model = config.models[j];
        if (model.kind() == ReceiverKind::CooperativeSA)
          copy.sub_slot = (k == 0) ? -1 : static_cast<std::int8_t>(unit(rng) < 0.5 ? 0 : 1);
        if (model.kind() == ReceiverKind::RayleighCapture) {
          std::exponential_distribution<double> expo(1.0);
          copy.fade = expo(rng);
        }
        copy.sic_sticky = config.p_sic > 0.0 && unit(rng) < config.p_sic;
        const int copy_id = static_cast<int>(inst.copies.size());
        user.copies.push_back(copy_id);
        inst.receivers[copy.receiver].copies.push_back(copy_id);
        inst.copies.push_back(copy);
      }
      inst.users.push_back(std::move(user));
    }
  }
  return inst;
}

namespace {

struct PeelState {
  std::vector<CopyState> state;
  std::vector<bool> resolved;
  std::vector<std::int32_t> newly_decoded;  // copy ids decoded this iteration
  bool changed = false;
};

void decode_copy(PeelState& ps, std::int32_t copy_id) {
  ps.state[copy_id] = CopyState::Decoded;
  ps.newly_decoded.push_back(copy_id);
  ps.changed = true;
}

void decode_receiver(const BipartiteInstance& inst, PeelState& ps, const ReceiverRec& rec) {
  const ReceiverModel& model = inst.models[rec.cls];
  switch (model.kind()) {
    case ReceiverKind::SlottedAloha:
    case ReceiverKind::DFold:
    case ReceiverKind::DFoldWithErrors: {
      if (rec.error_flag) return;
      int present = 0;
      for (auto c : rec.copies)
        if (ps.state[c] == CopyState::Present) ++present;
      if (present < 1 || present > model.d()) return;
      for (auto c : rec.copies)
        if (ps.state[c] == CopyState::Present) decode_copy(ps, c);
      return;
    }
    case ReceiverKind::CooperativeSA: {
      // Two internal SA sub-slots; a copy with sub_slot -1 sits in both.
      // Decoding in either sub-slot clears the copy from both, which can
      // unblock the other sub-slot, so iterate to the local fixpoint.
      bool unit_changed = true;
      while (unit_changed) {
        unit_changed = false;
        for (int s = 0; s < 2; ++s) {
          std::int32_t only = -1;
          int present = 0;
          for (auto c : rec.copies) {
            if (ps.state[c] != CopyState::Present) continue;
            const auto sub = inst.copies[c].sub_slot;
            if (sub == -1 || sub == s) {
              ++present;
              only = c;
            }
          }
          if (present == 1) {
            decode_copy(ps, only);
            unit_changed = true;
          }
        }
      }
      return;
    }
    case ReceiverKind::RayleighCapture: {
      // Greedy intra-slot SIC, strongest fade first; decoded signals are
      // subtracted, undecoded ones keep interfering.
      double interference = 0.0;
      for (auto c : rec.copies)
        if (ps.state[c] == CopyState::Present) interference += inst.copies[c].fade;
      const double noise = 1.0 / inst.models[rec.cls].gamma_linear();
      const double b = inst.models[rec.cls].b_linear();
      while (true) {
        std::int32_t best = -1;
        double best_fade = -1.0;
        for (auto c : rec.copies)
          if (ps.state[c] == CopyState::Present && inst.copies[c].fade > best_fade) {
            best = c;
            best_fade = inst.copies[c].fade;
          }
        if (best < 0) return;
        if (best_fade < b * (interference - best_fade + noise)) return;
        decode_copy(ps, best);
        interference -= best_fade;
      }
    }
  }
}

}  // namespace

SimOutcome peel(const BipartiteInstance& inst, int max_iter, std::uint64_t order_seed) {
  if (max_iter < 1) throw std::invalid_argument("peel: max_iter must be >= 1");
  PeelState ps;
  ps.state.assign(inst.copies.size(), CopyState::Present);
  ps.resolved.assign(inst.users.size(), false);

  std::vector<std::int32_t> order(inst.receivers.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 order_rng(order_seed);

  SimOutcome out;
  out.seed = inst.seed;
  out.T = inst.T;
  int resolved_total = 0;
  for (int it = 0; it < max_iter; ++it) {
    ps.changed = false;
    ps.newly_decoded.clear();
    if (order_seed != 0) std::shuffle(order.begin(), order.end(), order_rng);
    for (auto r : order) decode_receiver(inst, ps, inst.receivers[r]);
    // Inter-receiver SIC: remove the other copies of every user resolved in
    // this pass; sticky copies stay in place for good.
    for (auto c : ps.newly_decoded) {
      const auto u = inst.copies[c].user;
      if (ps.resolved[u]) continue;
      ps.resolved[u] = true;
      ++resolved_total;
      for (auto other : inst.users[u].copies) {
        if (ps.state[other] != CopyState::Present) continue;
        if (inst.copies[other].sic_sticky) continue;
        ps.state[other] = CopyState::Removed;
        ps.changed = true;
      }
    }
    out.iterations = it + 1;
    out.resolved_per_iteration.push_back(resolved_total);
    if (!ps.changed) break;
  }

  const std::size_t K = inst.users_per_class.size();
  std::vector<int> resolved_per_class(K, 0);
  for (std::size_t u = 0; u < inst.users.size(); ++u)
    if (ps.resolved[u]) resolved_per_class[inst.users[u].cls] += 1;
  out.copy_states = std::move(ps.state);
  out.user_resolved.assign(ps.resolved.begin(), ps.resolved.end());
  out.success_fraction.resize(K);
  out.throughput.resize(K);
  out.fraction_stderr.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const int n = inst.users_per_class[k];
    out.success_fraction[k] = n == 0 ? 1.0 : static_cast<double>(resolved_per_class[k]) / n;
    out.throughput[k] = static_cast<double>(resolved_per_class[k]) / inst.T;
  }
  return out;
}

SimOutcome run_trials(const SystemConfig& config, const std::vector<double>& load, int T,
                      int trials, int max_iter, std::uint64_t seed, int workers,
                      bool poisson_counts) {
  if (trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
  const std::size_t K = static_cast<std::size_t>(config.num_user_classes);
  std::vector<SimOutcome> per_trial(trials);
  parallel_for_index(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const auto inst = build_instance(config, load, T, derive_seed(seed, t), poisson_counts);
    per_trial[t] = peel(inst, max_iter);
  });

  SimOutcome out;
  out.seed = seed;
  out.T = T;
  out.trials = trials;
  out.success_fraction.assign(K, 0.0);
  out.throughput.assign(K, 0.0);
  out.fraction_stderr.assign(K, 0.0);
  for (const auto& r : per_trial) {
    out.iterations = std::max(out.iterations, r.iterations);
    for (std::size_t k = 0; k < K; ++k) {
      out.success_fraction[k] += r.success_fraction[k];
      out.throughput[k] += r.throughput[k];
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    out.success_fraction[k] /= trials;
    out.throughput[k] /= trials;
  }
  if (trials > 1) {
    for (std::size_t k = 0; k < K; ++k) {
      double ss = 0.0;
      for (const auto& r : per_trial) {
        const double d = r.success_fraction[k] - out.success_fraction[k];
        ss += d * d;
      }
      out.fraction_stderr[k] = std::sqrt(ss / (trials - 1)) / std::sqrt(double(trials));
    }
  }
  return out;
}

}  // namespace cpr
