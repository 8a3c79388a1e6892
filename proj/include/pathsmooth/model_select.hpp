#pragma once

#include "pathsmooth/rml.hpp"

namespace pathsmooth {

/// Running BIC inputs for one model: the cumulative log-likelihood proxy
/// (sum of per-step log mean weights from its own fit) and the running theta.
struct BicTrack {
  std::string model;
  int dim = 0;
  std::vector<double> loglik;  // cumulative, one entry per observation
  std::vector<Vector> theta;

  void push(double increment, const Vector& theta_n);
  std::size_t count() const { return loglik.size(); }
  double current_loglik() const { return loglik.empty() ? 0.0 : loglik.back(); }

  static BicTrack from_fit(std::string model, int dim, const FitResult& fit);
};

/// -2 l + dim log n.
double bic(double loglik, int dim, double n);
double bic(const BicTrack& track);
/// BIC after each observation.
std::vector<double> bic_path(const BicTrack& track);

/// BIC(a) - BIC(b) after each observation. Negative values favour a.
std::vector<double> bic_difference(const BicTrack& a, const BicTrack& b);

}  // namespace pathsmooth
