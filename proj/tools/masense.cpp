// Command-line front end: orient, simulate, estimate, fim, montecarlo.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "masense/fisher.hpp"
#include "masense/harness.hpp"
#include "masense/io.hpp"

namespace fs = std::filesystem;
using namespace masense;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment(c.config);
  if (c.config.empty()) cfg.priors = {{115, 4, 55, 4}, {100, 4, 115, 4}, {50, 4, 40, 4}, {50, 4, 120, 4}};
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + p.string());
  os << text;
}

json solution_to_json(const OrientationSolution& s) {
  json sep = json::array();
  for (const auto& m : s.separation) sep.push_back({{"l", m.l}, {"u", m.u}, {"x", m.x}, {"z", m.z}});
  return {{"orientation", orientation_to_json(s.orient)},
          {"objective", s.objective_value},
          {"feasible", s.feasible},
          {"eps", {s.eps.eps1, s.eps.eps2, s.eps.eps3}},
          {"min_margin", s.min_margin()},
          {"separation_margins", sep},
          {"front_side_margins", s.front_side},
          {"restarts", s.restarts},
          {"feasible_restarts", s.feasible_restarts},
          {"diagnostic", s.diagnostic}};
}

Orientation pick_orientation(const ExperimentConfig& cfg, bool rotate) {
  if (!rotate) return Orientation::identity();
  return solve_cell_orientation(cfg, 0).solution.orient;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masense: prior-guided movable-antenna multi-path AoA sensing"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment JSON");
    sub->add_option("--seed", common.seed, "base RNG seed");
    sub->add_option("--out", common.out, "output directory");
  };

  std::optional<double> sigma;
  double snr = 10.0;
  std::size_t trial = 0;
  bool no_rotation = false;
  std::string input;
  std::string est_method = "map";
  std::optional<std::size_t> trials;
  std::vector<std::string> methods;
  std::vector<std::string> disable;
  bool timing = false;

  auto* orient = app.add_subcommand("orient", "solve the plate orientation for the priors");
  add_common(orient);
  orient->add_option("--sigma", sigma, "prior std (deg) for every path");

  auto* simulate = app.add_subcommand("simulate", "synthesize one trial and dump the measurement");
  add_common(simulate);
  simulate->add_option("--sigma", sigma, "prior std (deg) for every path");
  simulate->add_option("--snr", snr, "SNR in dB");
  simulate->add_option("--trial", trial, "trial index");
  simulate->add_flag("--no-rotation", no_rotation, "scan with the identity orientation");

  auto* estimate = app.add_subcommand("estimate", "estimate AoAs from a measurement dump");
  add_common(estimate);
  estimate->add_option("--input", input, "measurement JSON from simulate")->required();
  estimate->add_option("--sigma", sigma, "prior std (deg) for every path");
  estimate->add_option("--method", est_method, "map | somp | music")
      ->check(CLI::IsMember({"map", "somp", "music"}));

  auto* fimcmd = app.add_subcommand("fim", "Fisher information diagnostics for one drawn scene");
  add_common(fimcmd);
  fimcmd->add_option("--sigma", sigma, "prior std (deg) for every path");
  fimcmd->add_option("--snr", snr, "SNR in dB");
  fimcmd->add_option("--trial", trial, "trial index");
  fimcmd->add_flag("--no-rotation", no_rotation, "evaluate at the identity orientation");

  auto* mc = app.add_subcommand("montecarlo", "full sweep to CSV");
  add_common(mc);
  mc->add_option("--trials", trials, "trials per cell");
  mc->add_option("--methods", methods, "methods to run (default: config)");
  mc->add_option("--disable", disable, "methods to skip");
  mc->add_flag("--timing", timing, "record wall-clock runtime per method");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig base = load(common);
    ExperimentConfig cfg = base;
    if (sigma) cfg.sigma_grid = {*sigma};
    const fs::path out(common.out);

    if (*orient) {
      const auto cell = solve_cell_orientation(cfg, 0);
      const json j = solution_to_json(cell.solution);
      write_file(out / "orientation.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return cell.solution.feasible ? 0 : 2;
    }

    if (*simulate) {
      const Orientation o = pick_orientation(cfg, !no_rotation);
      SystemConfig system = cfg.system;
      system.set_snr_db(snr);
      const auto priors = cfg.priors_with_sigma(cfg.sigma_grid[0]);
      const auto scene = draw_scene(priors, system,
                                    derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Scene), 0, trial}),
                                    cfg.max_delay_s);
      MeasurementDump d;
      d.system = system;
      d.orient = o;
      d.num_paths = priors.size();
      d.meas = synthesize_scan(scene, o, derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Noise), 0, trial}));
      for (const auto& p : scene.paths) d.truth.push_back(p.angles0);
      write_file(out / "measurement.json", dump_to_json(d).dump() + "\n");
      std::cout << "wrote " << (out / "measurement.json").string() << " (orientation " << o.alpha << ", " << o.beta
                << ", " << o.gamma << ")\n";
      return 0;
    }

    if (*estimate) {
      const MeasurementDump d = dump_from_json(read_json_file(input));
      json j;
      j["method"] = est_method;
      json est = json::array();
      std::vector<AnglePair> aoas;
      if (est_method == "somp") {
        aoas = somp_estimate(d.meas, d.num_paths, d.orient, d.system, cfg.somp).aoas;
      } else {
        const auto sfps = extract_sfps(d.meas, d.num_paths, cfg.music, d.system);
        j["u_set"] = sfps.u_set;
        j["v_set"] = sfps.v_set;
        std::ostringstream csv;
        csv << "grid,spectrum_x,spectrum_z\n";
        for (std::size_t i = 0; i < sfps.grid.size(); ++i)
          csv << sfps.grid[i] << ',' << sfps.spectrum_x[i] << ',' << sfps.spectrum_z[i] << '\n';
        write_file(out / "spectra.csv", csv.str());
        if (est_method == "map") {
          const auto priors = cfg.priors_with_sigma(cfg.sigma_grid[0]);
          const auto res = map_pair(d.meas, sfps, d.orient, priors, d.system);
          aoas = res.aoas;
          j["score"] = res.score;
          j["log_likelihood"] = res.log_likelihood;
          j["log_prior"] = res.log_prior;
          j["xi_perm"] = res.xi_perm.map;
          j["theta_perm"] = res.theta_perm.map;
        }
      }
      for (const auto& a : aoas) est.push_back({{"theta", a.theta}, {"phi", a.phi}});
      j["estimates"] = est;
      if (!aoas.empty() && d.truth.size() == aoas.size()) j["rmse_deg"] = joint_rmse(d.truth, aoas);
      write_file(out / "estimate.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*fimcmd) {
      const Orientation o = pick_orientation(cfg, !no_rotation);
      SystemConfig system = cfg.system;
      system.set_snr_db(snr);
      const auto priors = cfg.priors_with_sigma(cfg.sigma_grid[0]);
      const auto scene = draw_scene(priors, system,
                                    derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Scene), 0, trial}),
                                    cfg.max_delay_s);
      const auto positions = scan_positions(system);
      const auto r = fim(scene, o, positions);
      const auto s = summarize(r);
      json norms = json::array();
      for (Eigen::Index l = 0; l < s.block_norms.rows(); ++l) {
        json row = json::array();
        for (Eigen::Index u = 0; u < s.block_norms.cols(); ++u) row.push_back(s.block_norms(l, u));
        norms.push_back(row);
      }
      const json j{{"orientation", orientation_to_json(o)},
                   {"snr_db", snr},
                   {"scale", r.scale},
                   {"determinant", s.determinant},
                   {"min_eigenvalue", s.min_eigenvalue},
                   {"block_norms", norms}};
      write_file(out / "fim.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*mc) {
      cfg = base;
      if (trials) cfg.trials = *trials;
      if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(method_from_string(m));
      }
      for (const auto& m : disable) std::erase(cfg.methods, method_from_string(m));
      cfg.record_timing = timing;
      const auto res = sweep(cfg);
      std::ostringstream trials_csv, summary_csv, orient_csv;
      write_trials_csv(trials_csv, res);
      write_summary_csv(summary_csv, res);
      write_orientations_csv(orient_csv, res);
      write_file(out / "trials.csv", trials_csv.str());
      write_file(out / "summary.csv", summary_csv.str());
      write_file(out / "orientations.csv", orient_csv.str());
      std::cout << summary_csv.str();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
