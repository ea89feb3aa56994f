#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cpr {

// Mean Poisson arrivals per receiver, one entry per user class.
using LoadVector = std::vector<double>;

enum class ReceiverKind {
  SlottedAloha,
  DFold,
  DFoldWithErrors,
  CooperativeSA,
  RayleighCapture,
};

std::string to_string(ReceiverKind kind);

/// Closed-form success-probability model of one receiver class. Instances are
/// immutable and safe to evaluate from any number of threads.
class ReceiverModel {
public:
  static ReceiverModel slotted_aloha(int num_classes = 1);
  static ReceiverModel d_fold(int d, int num_classes = 1);
  static ReceiverModel d_fold_with_errors(int d, double p_err, int num_classes = 1);
  // Two traffic classes: class 0 packets occupy both internal sub-slots,
  // class 1 packets occupy one of the two uniformly.
  static ReceiverModel cooperative_sa();
  static ReceiverModel rayleigh_capture(double gamma_db, double b_db, int num_classes = 1);

  ReceiverKind kind() const { return kind_; }
  int num_classes() const { return num_classes_; }
  int d() const { return d_; }
  double p_err() const { return p_err_; }
  double gamma_db() const { return gamma_db_; }
  double b_db() const { return b_db_; }
  double gamma_linear() const { return gamma_lin_; }
  double b_linear() const { return b_lin_; }

  // Per-class success probability under the given Poisson offered load.
  std::vector<double> success_prob(const LoadVector& rho) const;

  // Largest componentwise monotonicity violation of success_prob over random
  // ordered load pairs; 0 means no violation observed.
  double monotonicity_violation(double load_cap, int pairs, std::uint64_t seed) const;

private:
  ReceiverModel() = default;

  double rayleigh_success(double rho) const;
  double rayleigh_cond_success(int t) const;

  ReceiverKind kind_ = ReceiverKind::SlottedAloha;
  int num_classes_ = 1;
  int d_ = 1;
  double p_err_ = 0.0;
  double gamma_db_ = 0.0, b_db_ = 0.0;
  double gamma_lin_ = 0.0, b_lin_ = 0.0;
  // rayleigh_cond_success(t) for t = 0..cap, precomputed at construction
  std::vector<double> cond_success_;
};

// Mean number of packets resolved by threshold-SIC in one Rayleigh block
// fading slot holding n packets with i.i.d. unit-mean exponential fades.
double rayleigh_expected_decodes(int n, double gamma_db, double b_db);

}  // namespace cpr
