// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// The exit status is nonzero when any criterion fails.

#include "criteria.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

int main() {
  namespace fs = std::filesystem;
  const fs::path scratch =
      fs::temp_directory_path() / ("ietmfc_acceptance_" + std::to_string(::getpid()));

  struct Entry {
    int id;
    const char* name;
    std::function<acceptance::Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "error-propagation identities", acceptance::propagation_identities},
      {2, "dual representation", acceptance::dual_representation},
      {3, "transition density", acceptance::transition_density},
      {4, "noiseless exact recovery", acceptance::noiseless_recovery},
      {5, "MLE consistency", acceptance::mle_consistency},
      {6, "segmented estimation", acceptance::segmented_estimation},
      {7, "IET-DMFC benefit", acceptance::iet_benefit},
      {8, "numerical order", acceptance::numerical_order},
      {9, "determinism", [&] { return acceptance::determinism(scratch); }},
  };

  int failures = 0;
  for (const auto& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    acceptance::Outcome out;
    try {
      out = e.run();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s criterion %d (%s, %.1f s): %s\n", out.pass ? "PASS" : "FAIL", e.id, e.name,
                secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failures,
              entries.size());
  return failures == 0 ? 0 : 1;
}
