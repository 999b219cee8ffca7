#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dimers {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct ValidationOptions {
  std::uint64_t seed = 42;
};

constexpr int kCriteria = 12;

const char* criterion_name(int id);
CriterionResult run_criterion(int id, const ValidationOptions& opt = {});
// runs the listed criteria (all when empty), reporting each as it finishes
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const ValidationOptions& opt = {},
                                            const std::function<void(const CriterionResult&)>& report = {});
std::string format_result(const CriterionResult& r);

}  // namespace dimers
