#include "cpr/receivers.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace cpr {

namespace {

constexpr int kRayleighPrecomputed = 1024;
constexpr double kPoissonTail = 1e-12;

void check_load(const LoadVector& rho, int expected) {
  if (static_cast<int>(rho.size()) != expected)
    throw std::invalid_argument("load vector has " + std::to_string(rho.size()) +
                                " entries, model serves " + std::to_string(expected));
  for (double r : rho)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::domain_error("load must be finite and nonnegative");
}

double total(const LoadVector& rho) {
  double s = 0.0;
  for (double r : rho) s += r;
  return s;
}

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

}  // namespace

std::string to_string(ReceiverKind kind) {
  switch (kind) {
    case ReceiverKind::SlottedAloha: return "slotted_aloha";
    case ReceiverKind::DFold: return "d_fold";
    case ReceiverKind::DFoldWithErrors: return "d_fold_errors";
    case ReceiverKind::CooperativeSA: return "cooperative_sa";
    case ReceiverKind::RayleighCapture: return "rayleigh";
  }
  return "?";
}

ReceiverModel ReceiverModel::slotted_aloha(int num_classes) {
  return d_fold(1, num_classes);
}

ReceiverModel ReceiverModel::d_fold(int d, int num_classes) {
  if (d < 1) throw std::invalid_argument("d_fold: D must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("receiver must serve >= 1 class");
  ReceiverModel m;
  m.kind_ = d == 1 ? ReceiverKind::SlottedAloha : ReceiverKind::DFold;
  m.d_ = d;
  m.num_classes_ = num_classes;
  return m;
}

ReceiverModel ReceiverModel::d_fold_with_errors(int d, double p_err, int num_classes) {
  if (!(p_err >= 0.0 && p_err <= 1.0))
    throw std::invalid_argument("d_fold_with_errors: p_err must be in [0,1]");
  ReceiverModel m = d_fold(d, num_classes);
  m.kind_ = ReceiverKind::DFoldWithErrors;
  m.p_err_ = p_err;
  return m;
}

ReceiverModel ReceiverModel::cooperative_sa() {
  ReceiverModel m;
  m.kind_ = ReceiverKind::CooperativeSA;
  m.num_classes_ = 2;
  return m;
}

ReceiverModel ReceiverModel::rayleigh_capture(double gamma_db, double b_db, int num_classes) {
  if (!std::isfinite(gamma_db) || !std::isfinite(b_db))
    throw std::invalid_argument("rayleigh_capture: gamma_db and b_db must be finite");
  if (num_classes < 1) throw std::invalid_argument("receiver must serve >= 1 class");
  ReceiverModel m;
  m.kind_ = ReceiverKind::RayleighCapture;
  m.num_classes_ = num_classes;
  m.gamma_db_ = gamma_db;
  m.b_db_ = b_db;
  m.gamma_lin_ = db_to_linear(gamma_db);
  m.b_lin_ = db_to_linear(b_db);
  m.cond_success_.reserve(kRayleighPrecomputed);
  for (int t = 0; t < kRayleighPrecomputed; ++t)
    m.cond_success_.push_back(m.rayleigh_cond_success(t));
  return m;
}

// Probability that a tagged packet is resolved given t interfering packets in
// the slot: sum over tau (packets peeled off before the tagged one) of
//   t!/(t-tau)! * exp(-((1+b)^(tau+1)-1)/gamma) * (1+b)^(-(tau+1)(t-tau/2)).
// Terms are evaluated in log space; the fading exponent grows doubly
// exponentially in tau, so the series is truncated once it underflows.
double ReceiverModel::rayleigh_cond_success(int t) const {
  const double log1pb = std::log1p(b_lin_);
  const double lfact_t = std::lgamma(t + 1.0);
  double acc = 0.0;
  for (int tau = 0; tau <= t; ++tau) {
    const double a = (tau + 1) * log1pb;
    if (a > 690.0) break;  // (1+b)^(tau+1) overflows; term is 0
    const double fade_exp = std::expm1(a) / gamma_lin_;
    if (fade_exp - lfact_t > 745.0) break;
    const double lt = lfact_t - std::lgamma(t - tau + 1.0) - fade_exp -
                      (tau + 1) * (t - 0.5 * tau) * log1pb;
    if (lt > -745.0) acc += std::exp(lt);
  }
  return acc;
}

double ReceiverModel::rayleigh_success(double rho) const {
  auto cond = [this](int t) {
    return t < static_cast<int>(cond_success_.size()) ? cond_success_[t]
                                                      : rayleigh_cond_success(t);
  };
  if (rho == 0.0) return cond(0);
  // Tagged packet sees Poisson(rho) interferers; truncate at tail < 1e-12.
  if (rho <= 500.0) {
    double pmf = std::exp(-rho), cum = pmf, acc = pmf * cond(0);
    int t = 0;
    while (cum < 1.0 - kPoissonTail && t < 1000000) {
      ++t;
      pmf *= rho / t;
      cum += pmf;
      acc += pmf * cond(t);
    }
    return acc;
  }
  // Very large loads: sum a +-15 sigma window of log-space pmf terms.
  const double sd = std::sqrt(rho);
  const int lo = static_cast<int>(std::max(0.0, rho - 15.0 * sd - 50.0));
  const int hi = static_cast<int>(rho + 15.0 * sd + 50.0);
  double acc = 0.0;
  for (int t = lo; t <= hi; ++t) {
    const double lp = -rho + t * std::log(rho) - std::lgamma(t + 1.0);
    if (lp > -745.0) acc += std::exp(lp) * cond(t);
  }
  return acc;
}

std::vector<double> ReceiverModel::success_prob(const LoadVector& rho) const {
  check_load(rho, num_classes_);
  switch (kind_) {
    case ReceiverKind::SlottedAloha:
    case ReceiverKind::DFold:
    case ReceiverKind::DFoldWithErrors: {
      const double r = total(rho);
      double pmf = std::exp(-r), sum = pmf;
      for (int t = 1; t < d_; ++t) {
        pmf *= r / t;
        sum += pmf;
      }
      if (kind_ == ReceiverKind::DFoldWithErrors) sum *= 1.0 - p_err_;
      return std::vector<double>(rho.size(), sum);
    }
    case ReceiverKind::CooperativeSA: {
      const double r3 = rho[0], r4 = rho[1];
      const double e_half = std::exp(-(r3 + 0.5 * r4));
      const double e_full = std::exp(-(r3 + r4));
      return {2.0 * e_half - e_full, e_half + r3 * e_full};
    }
    case ReceiverKind::RayleighCapture:
      return std::vector<double>(rho.size(), rayleigh_success(total(rho)));
  }
  throw std::logic_error("unreachable receiver kind");
}

double ReceiverModel::monotonicity_violation(double load_cap, int pairs,
                                             std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, load_cap);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    LoadVector a(num_classes_), b(num_classes_);
    for (int k = 0; k < num_classes_; ++k) {
      const double x = u(rng), y = u(rng);
      a[k] = std::min(x, y);
      b[k] = std::max(x, y);
    }
    const auto pa = success_prob(a), pb = success_prob(b);
    for (int k = 0; k < num_classes_; ++k) worst = std::max(worst, pb[k] - pa[k]);
  }
  return worst;
}

double rayleigh_expected_decodes(int n, double gamma_db, double b_db) {
  if (n < 0) throw std::invalid_argument("rayleigh_expected_decodes: n must be >= 0");
  if (n == 0) return 0.0;
  const double g = db_to_linear(gamma_db);
  const double log1pb = std::log1p(db_to_linear(b_db));
  const double lfact_n = std::lgamma(n + 1.0);
  double acc = 0.0;
  for (int r = 1; r <= n; ++r) {
    const double a = r * log1pb;
    if (a > 690.0) break;
    const double fade_exp = std::expm1(a) / g;
    const double lt = lfact_n - std::lgamma(n - r + 1.0) - fade_exp -
                      r * (n - 1.0 - 0.5 * (r - 1)) * log1pb;
    if (lt > -745.0) acc += std::exp(lt);
  }
  return acc;
}

}  // namespace cpr
