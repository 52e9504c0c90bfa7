#pragma once

// Acceptance checks 1-12, shared by the selftest command and the test binary.

#include <functional>
#include <string>
#include <vector>

namespace kwind {

struct AcceptanceOptions {
  double tolerance_scale = 1.0;  // multiplies every tolerance; < 1 injects failures
  int realizations = 100;        // spin-model ensemble size for check 7
  int krylov_depth = 200;        // Lanczos depth for check 7
  int threads = 0;
  std::vector<int> only;         // empty runs all
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // measured values against tolerances
  double seconds = 0.0;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS] 7 title (12.3 s): detail"
std::string format_result(const CriterionResult& r);

}  // namespace kwind
