#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/algorithms/cma_me.hpp"
#include "qd/algorithms/dme.hpp"
#include "qd/algorithms/efme.hpp"
#include "qd/algorithms/vme.hpp"
#include "qd/env/level.hpp"
#include "qd/policy/network.hpp"
#include "qd/policy/observation.hpp"

namespace qd::config {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Algorithm { VME, CMAME, DME, EFME };

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::VME;
  std::string level_manifest = "levels/default.manifest";
  archive::Scheme scheme = archive::Scheme::Win;
  policy::ObsMode observation = policy::ObsMode::OneHot;
  std::uint64_t budget = 1000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = sequential

  env::EnvConfig env;

  int conv_filters = 18;
  int kernel = 3;
  int pool = 2;
  double init_std = 0.1;

  algorithms::VmeConfig vme;
  algorithms::CmaMeConfig cma;
  algorithms::DmeConfig dme;
  algorithms::EfmeConfig efme;

  bool operator==(const ExperimentConfig&) const;
};

namespace detail {

inline std::string algo_name(Algorithm a) {
  switch (a) {
    case Algorithm::VME: return "vme";
    case Algorithm::CMAME: return "cmame";
    case Algorithm::DME: return "dme";
    case Algorithm::EFME: return "efme";
  }
  return "?";
}

inline std::string bool_name(bool b) { return b ? "true" : "false"; }

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

}  // namespace detail

// Flat diff-friendly key=value format with [section] headers; '#' starts a
// comment line.
inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
      line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key=value at line " + std::to_string(lineno));
    std::string key = section + "." + line.substr(0, eq);
    std::string val = line.substr(eq + 1);

    try {
      if (key == "experiment.algorithm") {
        if (val == "vme") cfg.algorithm = Algorithm::VME;
        else if (val == "cmame") cfg.algorithm = Algorithm::CMAME;
        else if (val == "dme") cfg.algorithm = Algorithm::DME;
        else if (val == "efme") cfg.algorithm = Algorithm::EFME;
        else throw ConfigError("unknown algorithm: " + val);
      } else if (key == "experiment.level_manifest") {
        cfg.level_manifest = val;
      } else if (key == "experiment.scheme") {
        if (val == "win") cfg.scheme = archive::Scheme::Win;
        else if (val == "keywin") cfg.scheme = archive::Scheme::KeyWin;
        else throw ConfigError("unknown scheme: " + val);
      } else if (key == "experiment.observation") {
        if (val == "onehot") cfg.observation = policy::ObsMode::OneHot;
        else if (val == "charmap") cfg.observation = policy::ObsMode::CharMap;
        else throw ConfigError("unknown observation mode: " + val);
      } else if (key == "experiment.budget") {
        cfg.budget = std::stoull(val);
      } else if (key == "experiment.seed") {
        cfg.seed = std::stoull(val);
      } else if (key == "experiment.workers") {
        cfg.workers = std::stoi(val);
      } else if (key == "env.step_limit") {
        cfg.env.step_limit = std::stoi(val);
      } else if (key == "env.explore_reward") {
        cfg.env.explore_reward = detail::parse_bool(val, key);
      } else if (key == "env.reward_key") {
        cfg.env.reward_key = std::stod(val);
      } else if (key == "env.reward_kill") {
        cfg.env.reward_kill = std::stod(val);
      } else if (key == "env.reward_win") {
        cfg.env.reward_win = std::stod(val);
      } else if (key == "policy.conv_filters") {
        cfg.conv_filters = std::stoi(val);
      } else if (key == "policy.kernel") {
        cfg.kernel = std::stoi(val);
      } else if (key == "policy.pool") {
        cfg.pool = std::stoi(val);
      } else if (key == "policy.init_std") {
        cfg.init_std = std::stod(val);
      } else if (key == "vme.change_prob") {
        cfg.vme.change_prob = std::stod(val);
      } else if (key == "vme.noise_std") {
        cfg.vme.noise_std = std::stod(val);
      } else if (key == "vme.mutation_mode") {
        if (val == "additive")
          cfg.vme.mutation_mode = policy::MutationMode::Additive;
        else if (val == "replace")
          cfg.vme.mutation_mode = policy::MutationMode::Replace;
        else throw ConfigError("unknown mutation mode: " + val);
      } else if (key == "cma.population") {
        cfg.cma.lambda = std::stoi(val);
      } else if (key == "cma.sigma0") {
        cfg.cma.sigma0 = std::stod(val);
      } else if (key == "cma.full_covariance") {
        cfg.cma.full_covariance = detail::parse_bool(val, key);
      } else if (key == "cma.restart_threshold") {
        cfg.cma.restart_threshold = std::stoi(val);
      } else if (key == "dme.differential_weight") {
        cfg.dme.F = std::stod(val);
      } else if (key == "dme.crossover_rate") {
        cfg.dme.CR = std::stod(val);
      } else if (key == "dme.crossover") {
        cfg.dme.crossover_enabled = detail::parse_bool(val, key);
      } else if (key == "efme.startup") {
        cfg.efme.startup = std::stoull(val);
      } else if (key == "efme.explore_ratio") {
        cfg.efme.explore_ratio = std::stod(val);
      } else {
        throw ConfigError("unknown key '" + key + "' at line " +
                          std::to_string(lineno));
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value for " + key + ": " + val);
    }
  }
  cfg.vme.init_std = cfg.init_std;
  cfg.cma.init_std = cfg.init_std;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

inline void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << "[experiment]\n"
     << "algorithm=" << detail::algo_name(c.algorithm) << '\n'
     << "level_manifest=" << c.level_manifest << '\n'
     << "scheme=" << (c.scheme == archive::Scheme::Win ? "win" : "keywin")
     << '\n'
     << "observation="
     << (c.observation == policy::ObsMode::OneHot ? "onehot" : "charmap")
     << '\n'
     << "budget=" << c.budget << '\n'
     << "seed=" << c.seed << '\n'
     << "workers=" << c.workers << '\n'
     << "[env]\n"
     << "step_limit=" << c.env.step_limit << '\n'
     << "explore_reward=" << detail::bool_name(c.env.explore_reward) << '\n'
     << "reward_key=" << io::format_double(c.env.reward_key) << '\n'
     << "reward_kill=" << io::format_double(c.env.reward_kill) << '\n'
     << "reward_win=" << io::format_double(c.env.reward_win) << '\n'
     << "[policy]\n"
     << "conv_filters=" << c.conv_filters << '\n'
     << "kernel=" << c.kernel << '\n'
     << "pool=" << c.pool << '\n'
     << "init_std=" << io::format_double(c.init_std) << '\n'
     << "[vme]\n"
     << "change_prob=" << io::format_double(c.vme.change_prob) << '\n'
     << "noise_std=" << io::format_double(c.vme.noise_std) << '\n'
     << "mutation_mode="
     << (c.vme.mutation_mode == policy::MutationMode::Additive ? "additive"
                                                               : "replace")
     << '\n'
     << "[cma]\n"
     << "population=" << c.cma.lambda << '\n'
     << "sigma0=" << io::format_double(c.cma.sigma0) << '\n'
     << "full_covariance=" << detail::bool_name(c.cma.full_covariance) << '\n'
     << "restart_threshold=" << c.cma.restart_threshold << '\n'
     << "[dme]\n"
     << "differential_weight=" << io::format_double(c.dme.F) << '\n'
     << "crossover_rate=" << io::format_double(c.dme.CR) << '\n'
     << "crossover=" << detail::bool_name(c.dme.crossover_enabled) << '\n'
     << "[efme]\n"
     << "startup=" << c.efme.startup << '\n'
     << "explore_ratio=" << io::format_double(c.efme.explore_ratio) << '\n';
}

inline bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  std::ostringstream a, b;
  write_config(a, *this);
  write_config(b, o);
  return a.str() == b.str();
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::ostringstream os;
  write_config(os, c);
  return fnv1a(os.str());
}

// The level manifest lists one level file path per line (relative paths
// resolved against the manifest's directory); list position is the level
// index used by the behavior feature.
inline std::vector<env::Level> load_levels(const std::string& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw ConfigError("cannot open level manifest: " + manifest_path);
  auto base = std::filesystem::path(manifest_path).parent_path();
  std::vector<env::Level> levels;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
      line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::filesystem::path p(line);
    if (p.is_relative()) p = base / p;
    std::ifstream lf(p);
    if (!lf) throw ConfigError("cannot open level file: " + p.string());
    std::stringstream buf;
    buf << lf.rdbuf();
    levels.push_back(env::parse_level(buf.str(),
                                      static_cast<int>(levels.size())));
  }
  if (levels.empty())
    throw ConfigError("level manifest is empty: " + manifest_path);
  return levels;
}

inline policy::NetworkTopology make_topology(const ExperimentConfig& c) {
  policy::NetworkTopology t;
  t.input_channels =
      c.observation == policy::ObsMode::OneHot ? policy::kEntityKinds : 1;
  t.conv_filters = c.conv_filters;
  t.kernel = c.kernel;
  t.pool_h = t.pool_w = c.pool;
  return t;
}

inline archive::FeatureScheme make_scheme(const ExperimentConfig& c,
                                          int level_count) {
  return archive::FeatureScheme{c.scheme, level_count};
}

inline void validate(const ExperimentConfig& c) {
  if (c.budget < 1) throw ConfigError("budget must be >= 1");
  c.env.validate();
  if (c.vme.change_prob < 0 || c.vme.change_prob > 1)
    throw ConfigError("change_prob must be in [0,1]");
  if (c.vme.noise_std < 0) throw ConfigError("noise_std must be >= 0");
  if (c.efme.explore_ratio < 0 || c.efme.explore_ratio > 1)
    throw ConfigError("explore_ratio must be in [0,1]");
  if (c.dme.F <= 0) throw ConfigError("differential_weight must be > 0");
  if (c.dme.CR < 0 || c.dme.CR > 1)
    throw ConfigError("crossover_rate must be in [0,1]");
  if (c.cma.sigma0 <= 0) throw ConfigError("sigma0 must be > 0");
  if (c.workers < 0) throw ConfigError("workers must be >= 0");
}

inline std::unique_ptr<algorithms::Driver> make_driver(
    const ExperimentConfig& c, int level_count) {
  auto scheme = make_scheme(c, level_count);
  auto topo = make_topology(c);
  size_t dim = topo.param_count();
  switch (c.algorithm) {
    case Algorithm::VME:
      return std::make_unique<algorithms::VmeDriver>(scheme, dim, c.vme,
                                                     topo.hash());
    case Algorithm::CMAME:
      return std::make_unique<algorithms::CmaMeDriver>(scheme, dim, c.cma,
                                                       topo.hash());
    case Algorithm::DME:
      return std::make_unique<algorithms::DmeDriver>(scheme, dim, c.dme,
                                                     c.vme, topo.hash());
    case Algorithm::EFME:
      return std::make_unique<algorithms::EfmeDriver>(scheme, dim, c.efme,
                                                      c.vme, topo.hash());
  }
  throw ConfigError("unreachable algorithm");
}

}  // namespace qd::config
