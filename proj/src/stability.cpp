#include "cpr/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpr {

std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable: return "stable";
    case StabilityClass::WeaklyStable: return "weakly_stable";
    case StabilityClass::Unstable: return "unstable";
    case StabilityClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

std::string to_string(const StabilityCriterion& c) {
  switch (c.kind) {
    case StabilityCriterion::Kind::Stable: return "stable";
    case StabilityCriterion::Kind::WeaklyStable: return "weak";
    case StabilityCriterion::Kind::EpsilonStable: {
      std::string s = "eps=";
      for (std::size_t i = 0; i < c.eps.size(); ++i)
        s += (i ? "," : "") + std::to_string(c.eps[i]);
      return s;
    }
  }
  return "?";
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double sup_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

DeOptions de_opts(const StabilityTols& tols) {
  DeOptions o;
  o.tol = tols.de_tol;
  o.max_iter = tols.max_iter;
  return o;
}

StabilityVerdict classify_point(const SystemConfig& config, const std::vector<double>& load,
                                const StabilityTols& tols) {
  const auto ones = de_fixed_point(config, load, Start::AllOnes, de_opts(tols));
  const auto zeros = de_fixed_point(config, load, Start::AllZeros, de_opts(tols));
  StabilityVerdict v;
  v.q_from_ones = ones.q_final;
  v.q_from_zeros = zeros.q_final;
  v.success_probs = success_probabilities(config, load, ones.q_final);
  if (!ones.converged || !zeros.converged) {
    v.verdict = StabilityClass::Indeterminate;
  } else if (sup_norm(ones.q_final) < tols.stable_tol) {
    v.verdict = StabilityClass::Stable;
  } else if (sup_gap(ones.q_final, zeros.q_final) < tols.equal_tol) {
    v.verdict = StabilityClass::WeaklyStable;
  } else {
    v.verdict = StabilityClass::Unstable;
  }
  return v;
}

}  // namespace

StabilityVerdict classify_load(const SystemConfig& config, const std::vector<double>& load,
                               const StabilityTols& tols) {
  StabilityVerdict v = classify_point(config, load, tols);
  if (tols.strict_weak && v.verdict == StabilityClass::WeaklyStable) {
    for (int i = tols.ray_samples - 1; i >= 1; --i) {
      std::vector<double> g(load.size());
      for (std::size_t k = 0; k < load.size(); ++k)
        g[k] = load[k] * static_cast<double>(i) / tols.ray_samples;
      const auto sample = classify_point(config, g, tols);
      if (sample.verdict == StabilityClass::Unstable ||
          sample.verdict == StabilityClass::Indeterminate) {
        v.verdict = sample.verdict;
        break;
      }
    }
  }
  return v;
}

EpsilonResult epsilon_stable(const SystemConfig& config, const std::vector<double>& load,
                             const EpsilonSpec& eps, const StabilityTols& tols) {
  if (static_cast<int>(eps.eps.size()) != config.num_user_classes)
    throw std::invalid_argument("epsilon spec needs one entry per user class");
  for (double e : eps.eps)
    if (!(e >= 0.0 && e <= 1.0))
      throw std::domain_error("epsilon entries must be in [0,1]");
  for (const auto& d : config.effective_dists)
    if (!d.min_degree_two())
      throw std::logic_error(
          "epsilon stability requires every packet to be transmitted at least twice "
          "(no degree-1 mass)");
  const auto ones = de_fixed_point(config, load, Start::AllOnes, de_opts(tols));
  EpsilonResult r;
  r.converged = ones.converged;
  r.q_from_ones = ones.q_final;
  r.guaranteed_success.resize(config.num_user_classes);
  r.stable = ones.converged;
  for (int k = 0; k < config.num_user_classes; ++k) {
    const auto& d = config.effective_dists[k];
    r.guaranteed_success[k] = 1.0 - d.eval(eps.eps[k]);
    if (ones.q_final[k] > d.excess(eps.eps[k])) r.stable = false;
  }
  return r;
}

namespace {

// Walks the lattice {0,...,n-1}^K over [0,1]^K; returns false the first time
// no class satisfies the strict inequality. `skip` prunes lattice points
// (the origin, or the epsilon box).
template <typename SkipFn, typename CheckFn>
bool lattice_all(int k_classes, int grid_n, SkipFn skip, CheckFn check) {
  std::vector<int> idx(k_classes, 0);
  std::vector<double> x(k_classes, 0.0);
  const double h = 1.0 / (grid_n - 1);
  while (true) {
    for (int k = 0; k < k_classes; ++k) x[k] = idx[k] * h;
    if (!skip(x) && !check(x)) return false;
    int k = 0;
    for (; k < k_classes; ++k) {
      if (++idx[k] < grid_n) break;
      idx[k] = 0;
    }
    if (k == k_classes) return true;
  }
}

}  // namespace

bool check_sufficient_stability(const SystemConfig& config, const std::vector<double>& load,
                                int grid_n) {
  return check_sufficient_epsilon(
      config, load, EpsilonSpec{std::vector<double>(config.num_user_classes, 0.0)}, grid_n);
}

bool check_sufficient_epsilon(const SystemConfig& config, const std::vector<double>& load,
                              const EpsilonSpec& eps, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("check_sufficient: grid_n must be >= 2");
  if (static_cast<int>(eps.eps.size()) != config.num_user_classes)
    throw std::invalid_argument("epsilon spec needs one entry per user class");
  const int K = config.num_user_classes;
  const int J = config.num_receiver_classes;
  const auto rho = offered_loads(config, load);

  bool min_two = true;
  for (const auto& d : config.effective_dists) min_two = min_two && d.min_degree_two();

  const auto skip = [&](const std::vector<double>& x) {
    for (int k = 0; k < K; ++k)
      if (x[k] > eps.eps[k]) return false;
    return true;  // inside the closed epsilon box (the origin when eps = 0)
  };

  if (min_two) {
    // p-space form: exists k with p_k > 1 - sum_j r_kj P_suc,k,j(G o L'(p) o R^(j)).
    return lattice_all(K, grid_n, skip, [&](const std::vector<double>& p) {
      LoadVector scaled(K);
      std::vector<double> rhs(K, 1.0);
      for (int j = 0; j < J; ++j) {
        for (int k = 0; k < K; ++k)
          scaled[k] = load[k] * config.effective_dists[k].derivative(p[k]) *
                      config.routing[k][j] / config.receiver_fractions[j];
        const auto ps = config.models[j].success_prob(scaled);
        for (int k = 0; k < K; ++k) rhs[k] -= config.routing[k][j] * ps[k];
      }
      for (int k = 0; k < K; ++k)
        if (p[k] > rhs[k]) return true;
      return false;
    });
  }

  // q-space form via one recursion step. The epsilon box in q-space is
  // [0, excess_k(eps_k)] per class.
  std::vector<double> q_eps(K);
  for (int k = 0; k < K; ++k) q_eps[k] = config.effective_dists[k].excess(eps.eps[k]);
  const auto skip_q = [&](const std::vector<double>& q) {
    for (int k = 0; k < K; ++k)
      if (q[k] > q_eps[k]) return false;
    return true;
  };
  return lattice_all(K, grid_n, skip_q, [&](const std::vector<double>& q) {
    const auto next = de_step(config, q, load);
    for (int k = 0; k < K; ++k)
      if (q[k] > next[k]) return true;
    return false;
  });
}

double irsa_threshold(const DegreeDistribution& dist, double tol) {
  if (!dist.min_degree_two())
    throw std::logic_error("irsa_threshold requires a distribution with no degree-1 mass");
  const auto objective = [&](double p) { return -std::log1p(-p) / dist.derivative(p); };
  const int scan_n = 8192;
  const double p_min = 1e-9, p_max = 1.0 - 1e-9;
  int best = 1;
  double best_val = objective(p_min + (p_max - p_min) / scan_n);
  for (int i = 2; i < scan_n; ++i) {
    const double p = p_min + (p_max - p_min) * i / scan_n;
    const double v = objective(p);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement in the bracketing interval.
  double a = p_min + (p_max - p_min) * (best - 1) / scan_n;
  double b = p_min + (p_max - p_min) * (best + 1) / scan_n;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  return objective(0.5 * (a + b));
}

bool meets_criterion(const SystemConfig& config, const std::vector<double>& load,
                     const StabilityCriterion& criterion, const StabilityTols& tols) {
  switch (criterion.kind) {
    case StabilityCriterion::Kind::Stable:
      return classify_load(config, load, tols).verdict == StabilityClass::Stable;
    case StabilityCriterion::Kind::WeaklyStable: {
      const auto v = classify_load(config, load, tols).verdict;
      return v == StabilityClass::Stable || v == StabilityClass::WeaklyStable;
    }
    case StabilityCriterion::Kind::EpsilonStable:
      return epsilon_stable(config, load, EpsilonSpec{criterion.eps}, tols).stable;
  }
  return false;
}

double percolation_threshold_1d(const SystemConfig& config,
                                const std::vector<double>& direction, double lo, double hi,
                                const StabilityCriterion& criterion, double tol,
                                const StabilityTols& tols) {
  if (static_cast<int>(direction.size()) != config.num_user_classes)
    throw std::invalid_argument("direction needs one entry per user class");
  for (double d : direction)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::domain_error("direction entries must be finite and nonnegative");
  if (!(tol > 0.0)) throw std::invalid_argument("threshold tol must be > 0");
  if (!(lo >= 0.0 && hi > lo)) throw std::invalid_argument("threshold bracket must have 0 <= lo < hi");

  const auto at = [&](double g) {
    std::vector<double> G(direction.size());
    for (std::size_t k = 0; k < direction.size(); ++k) G[k] = g * direction[k];
    return meets_criterion(config, G, criterion, tols);
  };
  if (!at(lo))
    throw std::invalid_argument("threshold bracket: criterion not met at lo");
  if (at(hi))
    throw std::invalid_argument("threshold bracket: criterion still met at hi");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cpr
