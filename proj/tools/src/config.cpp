#include "ietmfc/app/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ietmfc::app {
namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

double number(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where + ": expected a number");
  return value.get<double>();
}

Eigen::MatrixXd matrix_from(const json& value, const std::string& where) {
  if (value.is_number()) return Eigen::MatrixXd::Constant(1, 1, value.get<double>());
  if (!value.is_array() || value.empty())
    throw ConfigError(where + ": expected a non-empty array of rows");
  const std::size_t rows = value.size();
  if (!value[0].is_array() || value[0].empty())
    throw ConfigError(where + ": expected a non-empty array of rows");
  const std::size_t cols = value[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!value[r].is_array() || value[r].size() != cols)
      throw ConfigError(where + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(value[r][c], where);
  }
  return m;
}

Eigen::VectorXd vector_from(const json& value, const std::string& where) {
  if (value.is_number()) return Eigen::VectorXd::Constant(1, value.get<double>());
  if (!value.is_array() || value.empty())
    throw ConfigError(where + ": expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number(value[i], where);
  return v;
}

const json* section(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) return nullptr;
  if (!it->is_object()) throw ConfigError(std::string(name) + ": expected an object");
  return &*it;
}

template <class Fn>
void read_if(const json* sec, const char* sec_name, const char* key, Fn&& assign) {
  if (sec == nullptr) return;
  auto it = sec->find(key);
  if (it == sec->end()) return;
  assign(*it, std::string(sec_name) + "." + key);
}

void read_matrix(const json* sec, const char* sec_name, const char* key,
                 Eigen::MatrixXd& out) {
  read_if(sec, sec_name, key,
          [&](const json& v, const std::string& w) { out = matrix_from(v, w); });
}

void read_vector(const json* sec, const char* sec_name, const char* key,
                 Eigen::VectorXd& out) {
  read_if(sec, sec_name, key,
          [&](const json& v, const std::string& w) { out = vector_from(v, w); });
}

void reject_unknown(const json* sec, const char* sec_name,
                    std::initializer_list<const char*> known) {
  if (sec == nullptr) return;
  for (auto it = sec->begin(); it != sec->end(); ++it) {
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) throw ConfigError(std::string(sec_name) + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig config;
  config.scenario = reference_scenario();
  return config;
}

json to_json(const RunConfig& config) {
  const auto& p = config.scenario.params;
  const auto& g = config.scenario.grid;
  const auto& e = config.scenario.errors;
  const auto& i = config.scenario.init;
  json doc;
  doc["params"] = {
      {"A", matrix_json(p.A)},           {"B", matrix_json(p.B)},
      {"C", matrix_json(p.C)},           {"F", matrix_json(p.F)},
      {"D", matrix_json(p.D)},           {"Q_I", matrix_json(p.Q_I)},
      {"Q", matrix_json(p.Q)},           {"Qbar_I", matrix_json(p.Qbar_I)},
      {"Qbar", matrix_json(p.Qbar)},     {"R", matrix_json(p.R)},
      {"Gamma", matrix_json(p.Gamma)},   {"GammaBar", matrix_json(p.GammaBar)},
      {"s", vector_json(p.s)},           {"sbar", vector_json(p.sbar)},
      {"eta", vector_json(p.eta)},       {"etaBar", vector_json(p.etaBar)},
      {"T", p.T}};
  doc["grid"] = {{"dt_obs", g.dt_obs}, {"n_obs", g.n_obs}, {"h", g.h},
                 {"mod_points", g.mod_points}};
  doc["errors"] = {{"mean_error", vector_json(e.mean_error)},
                   {"private_variance", matrix_json(e.private_variance)},
                   {"bound", e.bound}};
  doc["init"] = {{"z0", vector_json(i.z0)},
                 {"init_covariance", matrix_json(i.init_covariance)},
                 {"N", i.N},
                 {"master_seed", i.master_seed},
                 {"recenter", i.recenter}};
  doc["regime"] = std::string(to_string(config.regime));
  doc["outputs"] = {{"predictions", config.outputs.predictions},
                    {"charts", config.outputs.charts}};
  return doc;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const char* known[] = {"params", "grid", "errors", "init", "regime", "outputs"};
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) throw ConfigError("unknown section '" + it.key() + "'");
  }

  RunConfig config = default_config();
  auto& p = config.scenario.params;
  auto& g = config.scenario.grid;
  auto& e = config.scenario.errors;
  auto& i = config.scenario.init;

  const json* params = section(doc, "params");
  reject_unknown(params, "params",
                 {"A", "B", "C", "F", "D", "Q_I", "Q", "Qbar_I", "Qbar", "R", "Gamma",
                  "GammaBar", "s", "sbar", "eta", "etaBar", "T"});
  read_matrix(params, "params", "A", p.A);
  read_matrix(params, "params", "B", p.B);
  read_matrix(params, "params", "C", p.C);
  read_matrix(params, "params", "F", p.F);
  read_matrix(params, "params", "D", p.D);
  read_matrix(params, "params", "Q_I", p.Q_I);
  read_matrix(params, "params", "Q", p.Q);
  read_matrix(params, "params", "Qbar_I", p.Qbar_I);
  read_matrix(params, "params", "Qbar", p.Qbar);
  read_matrix(params, "params", "R", p.R);
  read_matrix(params, "params", "Gamma", p.Gamma);
  read_matrix(params, "params", "GammaBar", p.GammaBar);
  read_vector(params, "params", "s", p.s);
  read_vector(params, "params", "sbar", p.sbar);
  read_vector(params, "params", "eta", p.eta);
  read_vector(params, "params", "etaBar", p.etaBar);
  read_if(params, "params", "T", [&](const json& v, const std::string& w) { p.T = number(v, w); });

  const json* grid = section(doc, "grid");
  reject_unknown(grid, "grid", {"dt_obs", "n_obs", "h", "mod_points"});
  read_if(grid, "grid", "dt_obs",
          [&](const json& v, const std::string& w) { g.dt_obs = number(v, w); });
  read_if(grid, "grid", "h", [&](const json& v, const std::string& w) { g.h = number(v, w); });
  read_if(grid, "grid", "n_obs", [&](const json& v, const std::string& w) {
    if (!v.is_number_integer()) throw ConfigError(w + ": expected an integer");
    g.n_obs = v.get<int>();
  });
  read_if(grid, "grid", "mod_points", [&](const json& v, const std::string& w) {
    if (!v.is_array()) throw ConfigError(w + ": expected an array of integers");
    g.mod_points.clear();
    for (const auto& k : v) {
      if (!k.is_number_integer()) throw ConfigError(w + ": expected an array of integers");
      g.mod_points.push_back(k.get<int>());
    }
  });

  const json* errors = section(doc, "errors");
  reject_unknown(errors, "errors", {"mean_error", "private_variance", "bound"});
  read_vector(errors, "errors", "mean_error", e.mean_error);
  read_matrix(errors, "errors", "private_variance", e.private_variance);
  read_if(errors, "errors", "bound",
          [&](const json& v, const std::string& w) { e.bound = number(v, w); });

  const json* init = section(doc, "init");
  reject_unknown(init, "init", {"z0", "init_covariance", "N", "master_seed", "recenter"});
  read_vector(init, "init", "z0", i.z0);
  read_matrix(init, "init", "init_covariance", i.init_covariance);
  read_if(init, "init", "N", [&](const json& v, const std::string& w) {
    if (!v.is_number_integer()) throw ConfigError(w + ": expected an integer");
    i.N = v.get<int>();
  });
  read_if(init, "init", "master_seed", [&](const json& v, const std::string& w) {
    if (!v.is_number_unsigned()) throw ConfigError(w + ": expected a non-negative integer");
    i.master_seed = v.get<std::uint64_t>();
  });
  read_if(init, "init", "recenter", [&](const json& v, const std::string& w) {
    if (!v.is_boolean()) throw ConfigError(w + ": expected true or false");
    i.recenter = v.get<bool>();
  });

  if (auto it = doc.find("regime"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("regime: expected a string");
    auto regime = parse_regime(it->get<std::string>());
    if (!regime) throw ConfigError("regime: unknown regime '" + it->get<std::string>() + "'");
    config.regime = *regime;
  }

  const json* outputs = section(doc, "outputs");
  reject_unknown(outputs, "outputs", {"predictions", "charts"});
  auto flag = [](bool& out) {
    return [&out](const json& v, const std::string& w) {
      if (!v.is_boolean()) throw ConfigError(w + ": expected true or false");
      out = v.get<bool>();
    };
  };
  read_if(outputs, "outputs", "predictions", flag(config.outputs.predictions));
  read_if(outputs, "outputs", "charts", flag(config.outputs.charts));
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path.string() + ": " + err.what());
  }
  return config_from_json(doc);
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(config).dump(2) << '\n';
}

std::string scenario_hash(const RunConfig& config) {
  json doc = to_json(config);
  doc.erase("outputs");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ietmfc::app
