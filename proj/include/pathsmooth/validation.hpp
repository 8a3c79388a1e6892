#pragma once

#include "pathsmooth/rml.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pathsmooth {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string summary;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

/// Common knobs. `tolerance_scale` multiplies every allowed slack; 0 makes
/// every check fail (used to exercise the failure path).
struct CheckBase {
  std::uint64_t seed = 20260917;
  int workers = 1;
  double tolerance_scale = 1.0;
};

/// Seed for replicate r of check `check`, derived from the master seed.
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t check, std::uint64_t r);

/// R independent smoother runs on one dataset; returns the final estimates.
std::vector<Vector> score_replicates(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                                     const std::vector<Vector>& ys, double dt, int particles, int replicates,
                                     std::uint64_t master, std::uint64_t check, int workers = 1);

/// Observations y_1..y_n of an O-U model with N(0, obs_sd^2) noise, latent
/// path simulated on `data_grid` Euler steps per unit interval.
std::vector<Vector> simulate_ou_observations(const Vector& theta, double obs_sd, int n, int data_grid, Rng& rng,
                                             double jump_rate = 0.0, double jump_halfwidth = 0.5);

// 1
struct MeshRobustnessConfig : CheckBase {
  Vector theta = (Vector(3) << 0.5, 0.0, 0.4).finished();
  double obs_sd = 0.1;
  int n = 10;
  int particles = 100;
  int replicates = 50;
  int coarse = 10;
  int fine = 200;
  int data_grid = 1000;
  int coordinate = 2;
  double max_ratio = 2.0;
  double min_naive_ratio = 5.0;
};
CheckResult check_mesh_robustness(const MeshRobustnessConfig& cfg);

// 2
struct ScoreOracleConfig : CheckBase {
  Vector theta = (Vector(3) << 0.4, 0.0, 0.5).finished();
  double obs_sd = 0.1;
  int n = 500;
  int particles = 150;
  int replicates = 50;
  int grid = 10;
  int data_grid = 1000;
  int coordinate = 0;
  double z_interval = 1.96;
};
CheckResult check_score_vs_kalman(const ScoreOracleConfig& cfg);

// 3
struct BridgeUnbiasednessConfig : CheckBase {
  Vector theta = (Vector(3) << 0.4, 0.0, 0.5).finished();
  double x = 0.0;
  std::vector<double> endpoints{-0.5, 0.0, 0.7};
  double horizon = 1.0;
  int grid = 50;
  int draws = 100000;
  double z_bound = 3.0;
  DensityScheme scheme = DensityScheme::euler_ratio;
};
CheckResult check_bridge_unbiasedness(const BridgeUnbiasednessConfig& cfg);

// 4
struct RoundTripConfig : CheckBase {
  int cases = 1000;
  double tolerance = 1e-10;
};
CheckResult check_round_trip(const RoundTripConfig& cfg);

// 5
struct ConstructEquivalenceConfig : CheckBase {
  Vector theta = (Vector(3) << 0.3, 0.0, 0.2).finished();
  double jump_rate = 0.5;
  double jump_halfwidth = 0.5;
  double obs_sd = 0.1;
  int n = 10;
  int particles = 100;
  int replicates = 50;
  int grid = 10;
  int data_grid = 1000;
  /// Score coordinates compared; the first one by default.
  std::vector<int> coordinates{0};
  double alpha = 0.01;
};
CheckResult check_construct_equivalence(const ConstructEquivalenceConfig& cfg);

// 6
struct RecoveryConfig : CheckBase {
  Vector theta = (Vector(3) << 0.2, 0.0, 0.2).finished();
  Vector theta0 = (Vector(3) << 1.0, 1.0, 1.0).finished();
  double obs_sd = 0.1;
  int n = 5000;
  int particles = 100;
  int grid = 10;
  int data_grid = 1000;
  double tolerance = 0.1;
};
CheckResult check_parameter_recovery(const RecoveryConfig& cfg);

// 7
struct MeshFreeFitConfig : CheckBase {
  Vector theta = (Vector(2) << 0.7853981633974483, 0.9).finished();
  Vector theta0 = (Vector(2) << 0.1, 2.0).finished();
  double obs_sd = 0.1;
  int n = 2000;
  int particles = 50;
  int seeds = 5;
  int coarse = 10;
  int fine = 100;
  int data_grid = 1000;
};
CheckResult check_mesh_free_fit(const MeshFreeFitConfig& cfg);

// 8
struct NConsistencyConfig : CheckBase {
  Vector theta = (Vector(3) << 0.4, 0.0, 0.5).finished();
  double obs_sd = 0.1;
  int n = 25;
  int grid = 10;
  std::vector<int> particles{25, 100, 400};
  int replicates = 30;
};
CheckResult check_n_consistency(const NConsistencyConfig& cfg);

// 9
struct BicNullConfig : CheckBase {
  Vector theta = (Vector(3) << 0.4, 0.0, 0.5).finished();
  Vector theta0 = (Vector(3) << 0.5, 0.1, 0.6).finished();
  double obs_sd = 0.1;
  int n = 200;
  int particles = 50;
  int grid = 10;
  int replicates = 10;
  double band_sigmas = 3.0;
};
CheckResult check_bic_null(const BicNullConfig& cfg);

// 10
struct UnitSuiteConfig : CheckBase {
  int cases = 20;
  double gradient_tolerance = 1e-6;
  double adam_tolerance = 1e-12;
};
CheckResult check_adam_and_gradients(const UnitSuiteConfig& cfg);

}  // namespace pathsmooth
