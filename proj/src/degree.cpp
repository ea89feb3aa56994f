#include "cpr/degree.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cpr {

namespace {

void check_unit_interval(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(std::string(what) + " must be in [0,1], got " +
                            std::to_string(x));
}

}  // namespace

DegreeDistribution::DegreeDistribution(std::vector<double> coeffs, bool erased)
    : coeffs_(std::move(coeffs)), erased_(erased) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  for (std::size_t l = 0; l < coeffs_.size(); ++l)
    mean_degree_ += static_cast<double>(l) * coeffs_[l];
  min_degree_two_ = coeffs_.size() < 2 || coeffs_[1] == 0.0;
}

DegreeDistribution DegreeDistribution::from_coeffs(std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("degree distribution: empty coefficient list");
  double sum = 0.0;
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    if (!(coeffs[l] >= 0.0) || !std::isfinite(coeffs[l]))
      throw std::invalid_argument("degree distribution: weight of degree " +
                                  std::to_string(l) + " is negative or not finite");
    sum += coeffs[l];
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("degree distribution: weights sum to " +
                                std::to_string(sum) + ", expected 1");
  if (coeffs[0] != 0.0)
    throw std::invalid_argument("degree distribution: degree 0 has nonzero weight; "
                                "every packet must be transmitted at least once");
  return DegreeDistribution(std::move(coeffs), /*erased=*/false);
}

DegreeDistribution DegreeDistribution::monomial(int degree) {
  if (degree < 1) throw std::invalid_argument("monomial degree must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = 1.0;
  return DegreeDistribution(std::move(c), false);
}

DegreeDistribution DegreeDistribution::soliton_like(int k_max) {
  if (k_max < 1) throw std::invalid_argument("soliton_like: k_max must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(k_max) + 2, 0.0);
  for (int k = 1; k < k_max; ++k)
    c[static_cast<std::size_t>(k) + 1] = 1.0 / (static_cast<double>(k) * (k + 1));
  c[static_cast<std::size_t>(k_max) + 1] += 1.0 / k_max;
  return DegreeDistribution(std::move(c), false);
}

double DegreeDistribution::coeff(std::size_t degree) const {
  return degree < coeffs_.size() ? coeffs_[degree] : 0.0;
}

double DegreeDistribution::eval(double x) const {
  check_unit_interval(x, "eval argument");
  double acc = 0.0;  // Horner
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

double DegreeDistribution::derivative(double x) const {
  check_unit_interval(x, "derivative argument");
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 1;)
    acc = acc * x + static_cast<double>(i) * coeffs_[i];
  return acc;
}

double DegreeDistribution::excess(double x) const {
  check_unit_interval(x, "excess argument");
  if (mean_degree_ <= 0.0)
    throw std::logic_error("excess distribution undefined: mean degree is zero");
  return derivative(x) / mean_degree_;
}

double DegreeDistribution::inverse_excess(double q) const {
  check_unit_interval(q, "inverse_excess argument");
  if (!min_degree_two_)
    throw std::logic_error("inverse_excess requires a distribution with no degree-1 mass");
  if (mean_degree_ <= 0.0)
    throw std::logic_error("excess distribution undefined: mean degree is zero");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

DegreeDistribution DegreeDistribution::erasure_transform(double p_era) const {
  check_unit_interval(p_era, "erasure probability");
  if (p_era == 0.0) return *this;
  std::vector<double> out(coeffs_.size(), 0.0);
  if (p_era == 1.0) {
    out[0] = 1.0;
    return DegreeDistribution(std::move(out), /*erased=*/true);
  }
  const double log_keep = std::log1p(-p_era);
  const double log_era = std::log(p_era);
  // Binomial thinning: a degree-l packet keeps m copies with probability
  // C(l,m) (1-p_era)^m p_era^(l-m).
  for (std::size_t l = 0; l < coeffs_.size(); ++l) {
    if (coeffs_[l] == 0.0) continue;
    const double lf = std::lgamma(static_cast<double>(l) + 1.0);
    for (std::size_t m = 0; m <= l; ++m) {
      const double lt = lf - std::lgamma(static_cast<double>(m) + 1.0) -
                        std::lgamma(static_cast<double>(l - m) + 1.0) +
                        static_cast<double>(m) * log_keep +
                        static_cast<double>(l - m) * log_era;
      out[m] += coeffs_[l] * std::exp(lt);
    }
  }
  return DegreeDistribution(std::move(out), /*erased=*/true);
}

}  // namespace cpr
