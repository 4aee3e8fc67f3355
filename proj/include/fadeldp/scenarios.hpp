#ifndef FADELDP_SCENARIOS_HPP
#define FADELDP_SCENARIOS_HPP

#include <string>
#include <vector>

#include "fadeldp/integrate.hpp"

namespace fadeldp {

// Built-in model configurations used verbatim by the acceptance suite.
struct Scenario {
  std::string name;
  CoefficientModel model;
  MemoryParams mem;
  double default_eps = 0.25;
  SimConfig sim;
};

const std::vector<Scenario>& scenario_registry();
const Scenario& scenario_by_name(const std::string& name);

}  // namespace fadeldp

#endif
