#pragma once

#include <cstddef>
#include <vector>

namespace cpr {

/// Degree distribution of a user class: coeffs()[l] is the probability that
/// a packet is transmitted l times. Immutable after construction; all
/// evaluators are const and safe to call concurrently.
class DegreeDistribution {
public:
  // Validates: nonnegative weights, sum == 1 within 1e-12, and no mass on
  // degree 0 (every packet is transmitted at least once). Distributions with
  // degree-0 mass only arise from erasure_transform and carry erased()==true.
  static DegreeDistribution from_coeffs(std::vector<double> coeffs);

  // Point mass on a single degree d >= 1.
  static DegreeDistribution monomial(int degree);

  // Truncated soliton-like distribution: weight 1/(k(k+1)) on degree k+1 for
  // k = 1..k_max-1, and the residual mass 1/k_max on degree k_max+1 so the
  // weights sum to one.
  static DegreeDistribution soliton_like(int k_max);

  const std::vector<double>& coeffs() const { return coeffs_; }
  std::size_t max_degree() const { return coeffs_.size() - 1; }
  double coeff(std::size_t degree) const;

  bool min_degree_two() const { return min_degree_two_; }
  bool erased() const { return erased_; }

  // Generating function value at x in [0,1].
  double eval(double x) const;
  // First derivative of the generating function at x in [0,1].
  double derivative(double x) const;
  // Mean number of copies, i.e. derivative(1).
  double mean_degree() const { return mean_degree_; }
  // Excess (edge-perspective) distribution value derivative(x)/derivative(1).
  double excess(double x) const;
  // Inverse of excess() on [0,1]; requires min_degree_two() so the map is a
  // strictly increasing bijection. Bisection to 1e-12 in the argument.
  double inverse_excess(double q) const;

  // Distribution after erasing each copy independently with probability
  // p_era; the result may carry degree-0 mass and is flagged erased().
  DegreeDistribution erasure_transform(double p_era) const;

private:
  DegreeDistribution(std::vector<double> coeffs, bool erased);

  std::vector<double> coeffs_;
  double mean_degree_ = 0.0;
  bool min_degree_two_ = false;
  bool erased_ = false;
};

}  // namespace cpr
