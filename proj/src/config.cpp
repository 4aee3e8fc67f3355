#include "fadeldp/config.hpp"

#include <fstream>

#include "fadeldp/io.hpp"
#include "fadeldp/scenarios.hpp"

namespace fadeldp {

double get_number(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number())
    fail(ErrorKind::config, "config: missing or non-numeric key '" + ctx + "." + key + "'");
  return j[key].get<double>();
}

double get_number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(ErrorKind::config, "config: key '" + key + "' must be numeric");
  return j[key].get<double>();
}

int64_t get_int(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number_integer())
    fail(ErrorKind::config, "config: missing or non-integer key '" + ctx + "." + key + "'");
  return j[key].get<int64_t>();
}

int64_t get_int_or(const json& j, const std::string& key, int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    fail(ErrorKind::config, "config: key '" + key + "' must be an integer");
  return j[key].get<int64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_string())
    fail(ErrorKind::config, "config: missing or non-string key '" + ctx + "." + key + "'");
  return j[key].get<std::string>();
}

DelayMeasure measure_from_json(const json& j, const std::string& key_path) {
  DelayMeasure mu;
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array())
      fail(ErrorKind::config, "config: '" + key_path + ".atoms' must be an array");
    for (const auto& a : j["atoms"]) {
      DelayMeasure::Atom atom;
      atom.lag = get_number(a, "lag", key_path + ".atoms[]");
      atom.weight = get_number(a, "weight", key_path + ".atoms[]");
      mu.atoms.push_back(atom);
    }
  }
  if (j.contains("expo") && !j["expo"].is_null()) {
    DelayMeasure::Expo e;
    e.mass = get_number(j["expo"], "mass", key_path + ".expo");
    e.beta = get_number(j["expo"], "beta", key_path + ".expo");
    mu.expo = e;
  }
  mu.validate();
  return mu;
}

json measure_to_json(const DelayMeasure& mu) {
  json j;
  j["atoms"] = json::array();
  for (const auto& a : mu.atoms) j["atoms"].push_back({{"lag", a.lag}, {"weight", a.weight}});
  if (mu.expo) j["expo"] = {{"mass", mu.expo->mass}, {"beta", mu.expo->beta}};
  return j;
}

namespace {

Mat mat_from_json(const json& j, const std::string& key, int rows, int cols) {
  if (!j.contains(key)) fail(ErrorKind::config, "config: missing matrix 'model." + key + "'");
  const auto& v = j[key];
  if (v.is_number()) {
    if (rows != 1 || cols != 1)
      fail(ErrorKind::config, "config: 'model." + key + "' must be a " + std::to_string(rows) +
                                  "x" + std::to_string(cols) + " matrix");
    return Mat::scalar(v.get<double>());
  }
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    fail(ErrorKind::config, "config: 'model." + key + "' has wrong row count");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols)
      fail(ErrorKind::config, "config: 'model." + key + "' has wrong column count");
    for (int c = 0; c < cols; ++c) m(i, c) = v[i][c].get<double>();
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

CoefficientModel model_from_json(const json& j) {
  if (j.contains("scenario")) {
    return scenario_by_name(j["scenario"].get<std::string>()).model;
  }
  CoefficientModel m;
  m.d = static_cast<int>(get_int(j, "d", "model"));
  m.m = static_cast<int>(get_int(j, "m", "model"));
  m.A = mat_from_json(j, "A", m.d, m.d);
  m.B = j.contains("B") ? mat_from_json(j, "B", m.d, m.d) : Mat(m.d, m.d);
  m.f_kind = nonlinearity_from_string(j.contains("f") ? j["f"].get<std::string>() : "zero");
  m.f_scale = get_number_or(j, "f_scale", 0.0);
  m.sigma0 = mat_from_json(j, "sigma0", m.d, m.m);
  if (j.contains("sigma1") && !j["sigma1"].is_null()) {
    const auto& s1 = j["sigma1"];
    if (!s1.is_array() || static_cast<int>(s1.size()) != m.d)
      fail(ErrorKind::config, "config: 'model.sigma1' needs d component blocks");
    for (int k = 0; k < m.d; ++k) {
      json wrap;
      wrap["c"] = s1[k];
      m.sigma1.push_back(mat_from_json(wrap, "c", m.d, m.m));
    }
  }
  m.mu1 = j.contains("mu1") ? measure_from_json(j["mu1"], "model.mu1")
                            : DelayMeasure::point_mass(0.0);
  m.mu2 = j.contains("mu2") ? measure_from_json(j["mu2"], "model.mu2")
                            : DelayMeasure::point_mass(0.0);
  m.validate();
  return m;
}

json model_to_json(const CoefficientModel& m) {
  json j;
  j["d"] = m.d;
  j["m"] = m.m;
  j["A"] = mat_to_json(m.A);
  j["B"] = mat_to_json(m.B);
  j["f"] = nonlinearity_to_string(m.f_kind);
  j["f_scale"] = m.f_scale;
  j["sigma0"] = mat_to_json(m.sigma0);
  if (!m.sigma1.empty()) {
    json s1 = json::array();
    for (const auto& c : m.sigma1) s1.push_back(mat_to_json(c));
    j["sigma1"] = s1;
  }
  j["mu1"] = measure_to_json(m.mu1);
  j["mu2"] = measure_to_json(m.mu2);
  return j;
}

MemoryParams memory_from_json(const json& j, const CoefficientModel& model) {
  MemoryParams mem;
  mem.r = get_number(j, "r", "memory");
  double deepest = std::min(model.mu1.deepest_atom(), model.mu2.deepest_atom());
  double default_h = deepest < 0.0 ? std::min(0.01, -deepest / 10.0) : 0.01;
  mem.h = get_number_or(j, "h", default_h);
  mem.tail_tol = get_number_or(j, "tail_tol", 1e-6);
  if (!j.contains("L") || (j["L"].is_string() && j["L"].get<std::string>() == "auto")) {
    double bound = get_number_or(j, "norm_bound_hint", 1.0);
    double L = choose_window(mem.r, bound, {model.mu1, model.mu2}, mem.tail_tol, mem.h);
    mem.L = std::max(L, 1.0);
    // snap to the grid
    mem.L = std::ceil(mem.L / mem.h - 1e-9) * mem.h;
  } else {
    mem.L = get_number(j, "L", "memory");
  }
  mem.validate();
  return mem;
}

RunConfig RunConfig::parse(const json& j) {
  RunConfig cfg;
  if (!j.contains("model") || !j["model"].is_object())
    fail(ErrorKind::config, "config: missing block 'model'");
  if (!j.contains("memory") || !j["memory"].is_object())
    fail(ErrorKind::config, "config: missing block 'memory'");
  if (!j.contains("experiment") || !j["experiment"].is_object())
    fail(ErrorKind::config, "config: missing block 'experiment'");
  cfg.model = model_from_json(j["model"]);
  cfg.mem = memory_from_json(j["memory"], cfg.model);
  cfg.experiment = j["experiment"];
  cfg.experiment_kind = get_string(j["experiment"], "kind", "experiment");
  cfg.seed = static_cast<uint64_t>(get_int_or(j, "seed", 0));
  cfg.cache = j.contains("cache") ? j["cache"].get<bool>() : true;
  cfg.raw = j;
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorKind::config, std::string("config: parse error: ") + e.what());
  }
  return parse(j);
}

json RunConfig::to_json() const { return raw; }

std::string RunConfig::hash() const {
  json canon = raw;
  canon.erase("cache");
  // normalize the model block so scenario references and explicit blocks with
  // the same content hash identically
  canon["model"] = model_to_json(model);
  canon["memory"] = json{{"r", mem.r}, {"h", mem.h}, {"L", mem.L}, {"tail_tol", mem.tail_tol}};
  canon["seed"] = seed;
  return fnv1a64_hex(canon.dump());
}

}  // namespace fadeldp
