#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace tpo::acceptance {

struct CriterionResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Every acceptance criterion, run against the fixtures under `root`.
/// `report` is called after each criterion finishes.
std::vector<CriterionResult> run_all(const std::filesystem::path& root,
                                     const std::function<void(const CriterionResult&)>& report = {});

/// "PASS name (detail)" or "FAIL name (detail)".
std::string format_result(const CriterionResult& r);

/// Prints one line per criterion and a summary; returns the number of failures.
int run_and_print(const std::filesystem::path& root, std::ostream& out);

}  // namespace tpo::acceptance
