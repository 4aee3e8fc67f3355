#ifndef FADELDP_CONFIG_HPP
#define FADELDP_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "fadeldp/integrate.hpp"

namespace fadeldp {

using json = nlohmann::ordered_json;

// Parsed run configuration: model + memory + one experiment block.
struct RunConfig {
  CoefficientModel model;
  MemoryParams mem;
  std::string experiment_kind;
  json experiment;  // kind-specific parameters, schema-checked by the runner
  uint64_t seed = 0;
  bool cache = true;
  json raw;  // canonical parsed form (round-trips)

  static RunConfig parse(const json& j);
  static RunConfig parse_file(const std::string& path);
  json to_json() const;      // serialize the canonical form
  std::string hash() const;  // over the canonical form minus the cache toggle
};

CoefficientModel model_from_json(const json& j);
json model_to_json(const CoefficientModel& m);
MemoryParams memory_from_json(const json& j, const CoefficientModel& model);
DelayMeasure measure_from_json(const json& j, const std::string& key_path);
json measure_to_json(const DelayMeasure& mu);

// Schema helpers that name the offending key on failure.
double get_number(const json& j, const std::string& key, const std::string& ctx);
double get_number_or(const json& j, const std::string& key, double fallback);
int64_t get_int(const json& j, const std::string& key, const std::string& ctx);
int64_t get_int_or(const json& j, const std::string& key, int64_t fallback);
std::string get_string(const json& j, const std::string& key, const std::string& ctx);

}  // namespace fadeldp

#endif
