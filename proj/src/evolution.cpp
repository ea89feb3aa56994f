#include "cpr/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cpr {

namespace {

void check_load_vector(const SystemConfig& config, const std::vector<double>& load) {
  if (static_cast<int>(load.size()) != config.num_user_classes)
    throw std::invalid_argument("offered load has " + std::to_string(load.size()) +
                                " entries, system has " +
                                std::to_string(config.num_user_classes) + " user classes");
  for (double g : load)
    if (!(g >= 0.0) || !std::isfinite(g))
      throw std::domain_error("offered load must be finite and nonnegative");
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

SystemConfig make_system_config(std::vector<DegreeDistribution> dists,
                                std::vector<ReceiverModel> models,
                                std::vector<double> receiver_fractions,
                                std::vector<std::vector<double>> routing,
                                double p_sic, double p_era) {
  SystemConfig c;
  c.num_user_classes = static_cast<int>(dists.size());
  c.num_receiver_classes = static_cast<int>(models.size());
  if (c.num_user_classes < 1) throw std::invalid_argument("config: need at least one user class");
  if (c.num_receiver_classes < 1)
    throw std::invalid_argument("config: need at least one receiver class");
  if (static_cast<int>(receiver_fractions.size()) != c.num_receiver_classes)
    throw std::invalid_argument("config: receiver_fractions size != number of receiver classes");
  double fsum = 0.0;
  for (int j = 0; j < c.num_receiver_classes; ++j) {
    if (!(receiver_fractions[j] > 0.0))
      throw std::invalid_argument("config: receiver_fractions[" + std::to_string(j) +
                                  "] must be > 0");
    fsum += receiver_fractions[j];
  }
  if (std::fabs(fsum - 1.0) > 1e-12)
    throw std::invalid_argument("config: receiver fractions sum to " + std::to_string(fsum) +
                                ", expected 1");
  if (static_cast<int>(routing.size()) != c.num_user_classes)
    throw std::invalid_argument("config: routing matrix needs one row per user class");
  c.all_routing_positive = true;
  for (int k = 0; k < c.num_user_classes; ++k) {
    if (static_cast<int>(routing[k].size()) != c.num_receiver_classes)
      throw std::invalid_argument("config: routing row " + std::to_string(k) +
                                  " needs one entry per receiver class");
    double rsum = 0.0;
    for (double r : routing[k]) {
      if (!(r >= 0.0))
        throw std::invalid_argument("config: routing row " + std::to_string(k) +
                                    " has a negative entry");
      if (r <= 0.0) c.all_routing_positive = false;
      rsum += r;
    }
    if (std::fabs(rsum - 1.0) > 1e-12)
      throw std::invalid_argument("config: routing row " + std::to_string(k) + " sums to " +
                                  std::to_string(rsum) + ", expected 1");
  }
  for (int j = 0; j < c.num_receiver_classes; ++j)
    if (models[j].num_classes() != c.num_user_classes)
      throw std::invalid_argument("config: receiver class " + std::to_string(j) + " serves " +
                                  std::to_string(models[j].num_classes()) +
                                  " classes, system has " + std::to_string(c.num_user_classes));
  if (!(p_sic >= 0.0 && p_sic <= 1.0))
    throw std::invalid_argument("config: p_sic must be in [0,1]");
  if (!(p_era >= 0.0 && p_era < 1.0))
    throw std::invalid_argument("config: p_era must be in [0,1); 1 erases every copy");
  c.receiver_fractions = std::move(receiver_fractions);
  c.routing = std::move(routing);
  c.models = std::move(models);
  c.p_sic = p_sic;
  c.p_era = p_era;
  c.effective_dists.reserve(dists.size());
  for (const auto& d : dists)
    c.effective_dists.push_back(p_era > 0.0 ? d.erasure_transform(p_era) : d);
  c.dists = std::move(dists);
  return c;
}

std::vector<LoadVector> offered_loads(const SystemConfig& config,
                                      const std::vector<double>& load) {
  check_load_vector(config, load);
  std::vector<LoadVector> rho(config.num_receiver_classes,
                              LoadVector(config.num_user_classes, 0.0));
  for (int j = 0; j < config.num_receiver_classes; ++j)
    for (int k = 0; k < config.num_user_classes; ++k)
      rho[j][k] = load[k] * config.effective_dists[k].mean_degree() * config.routing[k][j] /
                  config.receiver_fractions[j];
  return rho;
}

namespace {

// Shared inner loop: per-class residual edge failure probability
// p_k = 1 - sum_j r_kj P_suc,k,j(q_eff o rho^(j)).
std::vector<double> edge_failure(const SystemConfig& config,
                                 const std::vector<LoadVector>& rho,
                                 const std::vector<double>& q) {
  const int k_classes = config.num_user_classes;
  std::vector<double> q_eff(k_classes);
  for (int k = 0; k < k_classes; ++k)
    q_eff[k] = clamp01(config.p_sic + (1.0 - config.p_sic) * q[k]);
  std::vector<double> p(k_classes, 1.0);
  LoadVector scaled(k_classes);
  for (int j = 0; j < config.num_receiver_classes; ++j) {
    for (int k = 0; k < k_classes; ++k) scaled[k] = q_eff[k] * rho[j][k];
    const auto ps = config.models[j].success_prob(scaled);
    for (int k = 0; k < k_classes; ++k) p[k] -= config.routing[k][j] * ps[k];
  }
  for (double& x : p) x = clamp01(x);
  return p;
}

}  // namespace

std::vector<double> de_step(const SystemConfig& config, const std::vector<double>& q,
                            const std::vector<double>& load) {
  const auto rho = offered_loads(config, load);
  const auto p = edge_failure(config, rho, q);
  std::vector<double> next(config.num_user_classes);
  for (int k = 0; k < config.num_user_classes; ++k)
    next[k] = clamp01(config.effective_dists[k].excess(p[k]));
  return next;
}

FixedPointResult de_fixed_point(const SystemConfig& config, const std::vector<double>& load,
                                Start start, const DeOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("de_fixed_point: tol must be > 0");
  if (opts.max_iter < 1) throw std::invalid_argument("de_fixed_point: max_iter must be >= 1");
  const auto rho = offered_loads(config, load);
  const int k_classes = config.num_user_classes;

  FixedPointResult res;
  res.start = start;
  std::vector<double> q(k_classes, start == Start::AllOnes ? 1.0 : 0.0);
  if (opts.keep_trace) res.trace.push_back(q);
  for (int it = 0; it < opts.max_iter; ++it) {
    const auto p = edge_failure(config, rho, q);
    std::vector<double> next(k_classes);
    double delta = 0.0;
    for (int k = 0; k < k_classes; ++k) {
      next[k] = clamp01(config.effective_dists[k].excess(p[k]));
      delta = std::max(delta, std::fabs(next[k] - q[k]));
    }
    q = std::move(next);
    if (opts.keep_trace) res.trace.push_back(q);
    res.iterations = it + 1;
    if (delta < opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.q_final = std::move(q);
  return res;
}

std::vector<double> success_probabilities(const SystemConfig& config,
                                          const std::vector<double>& load,
                                          const std::vector<double>& q,
                                          bool round_success) {
  const auto rho = offered_loads(config, load);
  const auto p = edge_failure(config, rho, q);
  std::vector<double> out(config.num_user_classes);
  for (int k = 0; k < config.num_user_classes; ++k) {
    out[k] = clamp01(1.0 - config.effective_dists[k].eval(p[k]));
    if (round_success && out[k] > 0.99999) out[k] = 1.0;
  }
  return out;
}

ThroughputResult throughput(const SystemConfig& config, const std::vector<double>& load,
                            const DeOptions& opts) {
  const auto fp = de_fixed_point(config, load, Start::AllOnes, opts);
  const auto ps = success_probabilities(config, load, fp.q_final, opts.round_success);
  ThroughputResult t;
  t.per_class.resize(config.num_user_classes);
  for (int k = 0; k < config.num_user_classes; ++k) {
    t.per_class[k] = load[k] * ps[k];
    t.total += t.per_class[k];
  }
  return t;
}

}  // namespace cpr
