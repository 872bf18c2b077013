#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plsgd {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Names accepted by run_property_suite's fault injection.
std::vector<std::string> property_names();

/// Fast self-check: landscape properties, envelope algebra, coupling
/// probabilities, recursion checks on short runs, and run determinism.
/// `inject_fault` names a property whose computation is deliberately
/// perturbed so that it must fail.
std::vector<PropertyResult> run_property_suite(std::string_view inject_fault = {});

}  // namespace plsgd
