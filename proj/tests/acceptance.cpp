// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance [criterion ...]     (no argument runs all ten)
#include "pathsmooth/validation.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

using namespace pathsmooth;

namespace {

const std::vector<std::function<CheckResult()>>& criteria() {
  static const std::vector<std::function<CheckResult()>> all = {
      [] { return check_mesh_robustness({}); },
      [] { return check_score_vs_kalman({}); },
      [] { return check_bridge_unbiasedness({}); },
      [] { return check_round_trip({}); },
      [] { return check_construct_equivalence({}); },
      [] { return check_parameter_recovery({}); },
      [] { return check_mesh_free_fit({}); },
      [] { return check_n_consistency({}); },
      [] { return check_bic_null({}); },
      [] { return check_adam_and_gradients({}); },
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) which.push_back(i);

  int failed = 0;
  for (int c : which) {
    if (c < 1 || c > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    try {
      const CheckResult r = criteria()[c - 1]();
      std::printf("%s criterion %d (%s): %s [%.1fs]\n", r.passed ? "PASS" : "FAIL", c, r.name.c_str(),
                  r.summary.c_str(), r.seconds);
      for (const auto& [k, v] : r.metrics) std::printf("    %s = %.6g\n", k.c_str(), v);
      if (!r.passed) ++failed;
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: error: %s\n", c, e.what());
      ++failed;
    }
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
