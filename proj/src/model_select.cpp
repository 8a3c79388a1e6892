#include "pathsmooth/model_select.hpp"

#include <cmath>

namespace pathsmooth {

void BicTrack::push(double increment, const Vector& theta_n) {
  if (!std::isfinite(increment)) throw NumericalError("non-finite log-likelihood increment for " + model);
  loglik.push_back(current_loglik() + increment);
  theta.push_back(theta_n);
}

BicTrack BicTrack::from_fit(std::string model, int dim, const FitResult& fit) {
  BicTrack t;
  t.model = std::move(model);
  t.dim = dim;
  for (std::size_t k = 0; k < fit.increments.size(); ++k) t.push(fit.increments[k], fit.trajectory[k + 1]);
  return t;
}

double bic(double loglik, int dim, double n) {
  if (n < 1) throw ConfigError("BIC needs at least one observation");
  return -2.0 * loglik + dim * std::log(n);
}

double bic(const BicTrack& track) {
  return bic(track.current_loglik(), track.dim, static_cast<double>(track.count()));
}

std::vector<double> bic_path(const BicTrack& track) {
  std::vector<double> out(track.count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = bic(track.loglik[k], track.dim, static_cast<double>(k + 1));
  }
  return out;
}

std::vector<double> bic_difference(const BicTrack& a, const BicTrack& b) {
  if (a.count() != b.count()) {
    throw ConfigError("BIC tracks cover different streams (" + std::to_string(a.count()) + " vs " +
                      std::to_string(b.count()) + " observations)");
  }
  std::vector<double> out(a.count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    out[k] = bic(a.loglik[k], a.dim, n) - bic(b.loglik[k], b.dim, n);
  }
  return out;
}

}  // namespace pathsmooth
