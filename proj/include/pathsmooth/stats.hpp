#pragma once

#include <vector>

namespace pathsmooth {

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);
/// Linear-interpolation quantile (type 7).
double quantile(std::vector<double> v, double p);
double median(const std::vector<double>& v);
double iqr(const std::vector<double>& v);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Two-sided Welch t-test for equal means.
WelchResult welch_test(const std::vector<double>& a, const std::vector<double>& b);

/// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

}  // namespace pathsmooth
