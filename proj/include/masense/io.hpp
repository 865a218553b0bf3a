#pragma once

// JSON config loading and measurement dumps.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "masense/error.hpp"
#include "masense/harness.hpp"
#include "masense/signal.hpp"

namespace masense {

using json = nlohmann::json;

namespace detail {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline SystemConfig system_from_json(const json& j) {
  SystemConfig s;
  detail::read_opt(j, "carrier_hz", s.carrier_hz);
  detail::read_opt(j, "bandwidth_hz", s.bandwidth_hz);
  detail::read_opt(j, "num_subcarriers", s.num_subcarriers);
  detail::read_opt(j, "num_positions", s.num_positions);
  detail::read_opt(j, "spacing_m", s.spacing_m);
  detail::read_opt(j, "power", s.power);
  detail::read_opt(j, "noise_n0", s.noise_n0);
  if (j.contains("subcarrier_grid")) {
    const auto g = j.at("subcarrier_grid").get<std::string>();
    if (g == "centered") s.grid = SubcarrierGrid::Centered;
    else if (g == "one_sided") s.grid = SubcarrierGrid::OneSided;
    else throw Error(ErrorCode::ConfigError, "subcarrier_grid must be 'centered' or 'one_sided'");
  }
  return s;
}

inline json system_to_json(const SystemConfig& s) {
  return {{"carrier_hz", s.carrier_hz},       {"bandwidth_hz", s.bandwidth_hz}, {"num_subcarriers", s.num_subcarriers},
          {"num_positions", s.num_positions}, {"spacing_m", s.spacing_m},       {"power", s.power},
          {"noise_n0", s.noise_n0},
          {"subcarrier_grid", s.grid == SubcarrierGrid::Centered ? "centered" : "one_sided"}};
}

inline PathPrior prior_from_json(const json& j) {
  PathPrior p;
  p.mu = j.at("mu").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.xi = j.at("xi").get<double>();
  p.varsigma = j.at("varsigma").get<double>();
  return p;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("system")) c.system = system_from_json(j.at("system"));
    if (j.contains("priors"))
      for (const auto& p : j.at("priors")) c.priors.push_back(prior_from_json(p));
    if (j.contains("eps")) {
      const auto& e = j.at("eps");
      if (e.is_number()) c.eps = EpsilonConfig::uniform(e.get<double>());
      else c.eps = {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()};
    }
    detail::read_opt(j, "auto_epsilon", c.auto_epsilon);
    detail::read_opt(j, "epsilon_ladder", c.epsilon_ladder);
    detail::read_opt(j, "snr_db", c.snr_grid);
    detail::read_opt(j, "sigma_deg", c.sigma_grid);
    detail::read_opt(j, "trials", c.trials);
    detail::read_opt(j, "seed", c.seed);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("music")) {
      const auto& m = j.at("music");
      detail::read_opt(m, "subarray_size", c.music.subarray_size);
      detail::read_opt(m, "grid_points", c.music.grid_points);
      detail::read_opt(m, "min_peak_separation", c.music.min_peak_separation);
      detail::read_opt(m, "refine", c.music.refine);
    }
    if (j.contains("somp")) detail::read_opt(j.at("somp"), "grid_points", c.somp.grid_points);
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      detail::read_opt(s, "grid_per_axis", c.solver.grid_per_axis);
      detail::read_opt(s, "random_restarts", c.solver.random_restarts);
      detail::read_opt(s, "max_iter", c.solver.sqp.max_iter);
    }
    if (j.contains("max_delay_ns")) c.max_delay_s = j.at("max_delay_ns").get<double>() * 1e-9;
    detail::read_opt(j, "record_timing", c.record_timing);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

inline ExperimentConfig load_experiment(const std::string& path) { return experiment_from_json(read_json_file(path)); }

inline json orientation_to_json(const Orientation& o) { return {{"alpha", o.alpha}, {"beta", o.beta}, {"gamma", o.gamma}}; }

inline Orientation orientation_from_json(const json& j) {
  return {j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("gamma").get<double>()};
}

/// A measurement plus what is needed to process it again.
struct MeasurementDump {
  SystemConfig system;
  Orientation orient;
  std::size_t num_paths = 0;
  ScanMeasurement meas;
  std::vector<AnglePair> truth;  // optional
};

inline json dump_to_json(const MeasurementDump& d) {
  json j;
  j["system"] = system_to_json(d.system);
  j["orientation"] = orientation_to_json(d.orient);
  j["num_paths"] = d.num_paths;
  j["axis_split"] = d.meas.axis_split;
  json pos = json::array();
  for (const auto& p : d.meas.positions) pos.push_back({p.x(), p.y(), p.z()});
  j["positions"] = pos;
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < d.meas.samples.rows(); ++r) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index c = 0; c < d.meas.samples.cols(); ++c) {
      rr.push_back(d.meas.samples(r, c).real());
      ii.push_back(d.meas.samples(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  j["samples_re"] = re;
  j["samples_im"] = im;
  json truth = json::array();
  for (const auto& a : d.truth) truth.push_back({{"theta", a.theta}, {"phi", a.phi}});
  j["truth"] = truth;
  return j;
}

inline MeasurementDump dump_from_json(const json& j) {
  try {
    MeasurementDump d;
    d.system = system_from_json(j.at("system"));
    d.orient = orientation_from_json(j.at("orientation"));
    d.num_paths = j.at("num_paths").get<std::size_t>();
    d.meas.axis_split = j.at("axis_split").get<std::size_t>();
    for (const auto& p : j.at("positions")) d.meas.positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    const auto& re = j.at("samples_re");
    const auto& im = j.at("samples_im");
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(re.at(0).size()) : 0;
    d.meas.samples.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        d.meas.samples(r, c) = {re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>()};
    if (j.contains("truth"))
      for (const auto& a : j.at("truth")) d.truth.push_back({a.at("theta").get<double>(), a.at("phi").get<double>()});
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

}  // namespace masense
