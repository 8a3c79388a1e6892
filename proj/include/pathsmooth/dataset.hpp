#pragma once

#include "pathsmooth/model.hpp"
#include "pathsmooth/simulate.hpp"

#include <string>
#include <vector>

namespace pathsmooth {

/// Observation stream y_1 .. y_n at times t_1 .. t_n, optionally with the
/// latent states and calendar dates.
struct Dataset {
  std::vector<double> times;
  std::vector<std::string> dates;
  std::vector<Vector> ys;
  std::vector<Vector> xs;

  std::size_t size() const { return ys.size(); }
  /// Spacing of the first two time stamps, or `fallback` when unknown.
  double spacing(double fallback = 1.0) const;
};

class DataError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Simulates n observations spaced `dt` apart. The latent path uses
/// `fine_grid` Euler steps per interval and starts from the model's initial
/// law.
Dataset simulate_dataset(const SdeModel& model, const Vector& theta, int n, double dt, int fine_grid, Rng& rng,
                         const SimulationOptions& options = {});

/// CSV with a header row. Recognised columns: index, time, date, value,
/// y / y1 y2 ..., x / x1 x2 .... Throws DataError with the line number on a
/// malformed row.
Dataset read_dataset(const std::string& path);
Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");

void write_dataset(const std::string& path, const Dataset& data, bool with_latent);

}  // namespace pathsmooth
