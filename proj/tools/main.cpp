#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tpflow/diagnostics.hpp"
#include "tpflow/scenario.hpp"
#include "tpflow/vtk.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  std::vector<tpf::LedgerRow> rows;
  double eta = 0.0;
  double ledger_defect = 0.0;
  double wall_seconds = 0.0;
  int steps = 0;
  double min_s = 0.0, max_s = 0.0;
  int violations = 0;
};

RunResult run_scenario(const tpf::Scenario& sc, tpf::Scheme scheme,
                       const std::string& out_dir, int output_every) {
  tpf::Simulator sim(sc.mesh, sc.fluids, sc.rock, sc.Fw_density,
                     sc.Fn_density, sc.cfg.pin_pressure);
  sim.init(sc.Sw0);
  tpf::MassLedger ledger(sim.mesh(), sim.rock(), sim.source_w(),
                         sim.source_n());

  RunResult r;
  r.min_s = sc.Sw0.minCoeff();
  r.max_s = sc.Sw0.maxCoeff();
  const bool write_output = !out_dir.empty();
  if (write_output) fs::create_directories(out_dir);

  auto snapshot = [&](int step) {
    std::ostringstream name;
    name << out_dir << "/state_" << step << ".vtk";
    std::ofstream v(name.str());
    tpf::write_vtk(v, sim.mesh(), sim.state(), sim.rock());
  };
  if (write_output) snapshot(0);

  tpf::SchemeConfig cfg = sc.cfg;
  cfg.scheme = scheme;
  const auto t0 = std::chrono::steady_clock::now();
  sim.run(cfg, [&](const tpf::Simulator& s, const tpf::StepData& d) {
    ledger.add(s, d);
    r.violations += d.violations;
    r.min_s = std::min(r.min_s, d.pre_min);
    r.max_s = std::max(r.max_s, d.pre_max);
    ++r.steps;
    if (write_output && output_every > 0 && s.state().step % output_every == 0)
      snapshot(s.state().step);
  });
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (write_output) snapshot(sim.state().step);
  r.rows = ledger.rows();
  r.eta = ledger.eta();
  r.ledger_defect = ledger.max_defect();

  if (write_output) {
    std::ofstream csv(out_dir + "/diagnostics.csv");
    tpf::write_ledger_csv(csv, r.rows);
  }
  return r;
}

const char* scheme_name(tpf::Scheme s) {
  switch (s) {
  case tpf::Scheme::PIMPES: return "pimpes";
  case tpf::Scheme::HFIMPES: return "hfimpes";
  case tpf::Scheme::STDIMPES: return "stdimpes";
  }
  return "?";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase incompressible flow simulator (mixed RT0/P0 IMPES "
               "schemes)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string schemes_arg = "pimpes,hfimpes";
  bool serial = false;

  auto* run = app.add_subcommand("run", "run a scenario and write outputs");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--output-dir", out_override, "override the output directory");
  run->add_flag("--serial", serial, "single-threaded (outputs already are)");

  auto* validate =
      app.add_subcommand("validate", "parse a config and echo the SI form");
  validate->add_option("config", config_path, "scenario config file")
      ->required();

  auto* compare = app.add_subcommand(
      "compare", "run several schemes on one scenario, side by side");
  compare->add_option("config", config_path, "scenario config file")
      ->required();
  compare->add_option("--schemes", schemes_arg,
                      "comma-separated: pimpes,hfimpes,stdimpes");
  compare->add_option("--output-dir", out_override,
                      "override the output directory");

  CLI11_PARSE(app, argc, argv);

  tpf::Scenario sc;
  try {
    sc = tpf::parse_scenario_file(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 1;
  }
  if (!out_override.empty()) sc.output_dir = out_override;

  try {
    if (validate->parsed()) {
      std::cout << sc.canonical;
      return 0;
    }
    if (run->parsed()) {
      const RunResult r = run_scenario(sc, sc.cfg.scheme, sc.output_dir,
                                       sc.output_every);
      std::cout.precision(14);
      std::cout << "scheme " << scheme_name(sc.cfg.scheme) << ": " << r.steps
                << " steps, eta " << r.eta << ", ledger defect "
                << r.ledger_defect << ", S range [" << r.min_s << ", "
                << r.max_s << "], wall " << r.wall_seconds << " s\n";
      std::cout << "outputs in " << sc.output_dir << "\n";
      return 0;
    }
    // compare
    std::vector<tpf::Scheme> schemes;
    std::stringstream ss(schemes_arg);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name == "pimpes") schemes.push_back(tpf::Scheme::PIMPES);
      else if (name == "hfimpes") schemes.push_back(tpf::Scheme::HFIMPES);
      else if (name == "stdimpes") schemes.push_back(tpf::Scheme::STDIMPES);
      else {
        std::cerr << "config error: unknown scheme '" << name << "'\n";
        return 1;
      }
    }
    fs::create_directories(sc.output_dir);
    std::ofstream csv(sc.output_dir + "/compare.csv");
    csv.precision(14);
    csv << "scheme,steps,eta,ledger_defect,minS,maxS,violations,wall_s\n";
    for (const tpf::Scheme s : schemes) {
      const RunResult r =
          run_scenario(sc, s, sc.output_dir + "/" + scheme_name(s),
                       sc.output_every);
      csv << scheme_name(s) << "," << r.steps << "," << r.eta << ","
          << r.ledger_defect << "," << r.min_s << "," << r.max_s << ","
          << r.violations << "," << r.wall_seconds << "\n";
      std::cout << scheme_name(s) << ": eta " << r.eta << ", ledger defect "
                << r.ledger_defect << ", S range [" << r.min_s << ", "
                << r.max_s << "]\n";
    }
    std::cout << "comparison in " << sc.output_dir << "/compare.csv\n";
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "runtime error: " << ex.what() << "\n";
    return 2;
  }
}
