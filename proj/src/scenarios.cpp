#include "fadeldp/scenarios.hpp"

namespace fadeldp {

namespace {

Scenario make_ou() {
  Scenario s;
  s.name = "ou";
  s.model.d = 1;
  s.model.m = 1;
  s.model.A = Mat::scalar(1.0);
  s.model.B = Mat::scalar(0.0);
  s.model.f_kind = Nonlinearity::zero;
  s.model.sigma0 = Mat::scalar(1.0);
  s.model.mu1 = DelayMeasure::point_mass(0.0);
  s.model.mu2 = DelayMeasure::point_mass(0.0);
  s.mem = MemoryParams{1.0, 0.01, 1.0, 1e-6};
  s.default_eps = 0.5;
  s.sim = SimConfig{0.01, Scheme::euler, 0.0, 5.0};
  return s;
}

Scenario make_delay_ou() {
  Scenario s;
  s.name = "delay-ou";
  s.model.d = 1;
  s.model.m = 1;
  s.model.A = Mat::scalar(2.0);
  s.model.B = Mat::scalar(0.5);
  s.model.f_kind = Nonlinearity::zero;
  s.model.sigma0 = Mat::scalar(1.0);
  s.model.mu1 = DelayMeasure::point_mass(-0.1);
  s.model.mu2 = DelayMeasure::point_mass(0.0);
  s.mem = MemoryParams{1.0, 0.01, 2.0, 1e-6};
  s.default_eps = 0.25;
  s.sim = SimConfig{0.01, Scheme::euler, 0.0, 5.0};
  return s;
}

Scenario make_multiplicative() {
  Scenario s;
  s.name = "multiplicative";
  s.model.d = 1;
  s.model.m = 1;
  s.model.A = Mat::scalar(1.0);
  s.model.B = Mat::scalar(0.2);
  s.model.f_kind = Nonlinearity::cubic_sat;
  s.model.f_scale = 0.1;
  s.model.sigma0 = Mat::scalar(0.2);
  s.model.sigma1 = {Mat::scalar(0.1)};
  s.model.mu1 = DelayMeasure::point_mass(-0.5);
  s.model.mu2.expo = DelayMeasure::Expo{1.0, 4.0};
  s.mem = MemoryParams{1.0, 0.01, 3.0, 1e-6};
  s.default_eps = 0.25;
  s.sim = SimConfig{0.01, Scheme::euler, 0.0, 5.0};
  return s;
}

}  // namespace

const std::vector<Scenario>& scenario_registry() {
  static const std::vector<Scenario> reg = {make_ou(), make_delay_ou(), make_multiplicative()};
  return reg;
}

const Scenario& scenario_by_name(const std::string& name) {
  for (const auto& s : scenario_registry())
    if (s.name == name) return s;
  fail(ErrorKind::config, "unknown scenario '" + name + "'");
}

}  // namespace fadeldp
