// Command line driver for the over-the-air consensus simulator: runs one
// algorithm or the four-way comparison on a seeded network and writes
// metrics, trajectories, the optimized power/scaling pair, and the topology
// as CSV into the output directory.

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "otac/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Non-coherent over-the-air average consensus simulator"};

  std::string config, algo = "compare", out = ".", topology = "generate";
  std::string trajectories;
  std::uint64_t seed = 0, iters = 0, realizations = 0;
  double noise_var = 0.0;

  app.add_option("--config", config,
                 "key = value file mirroring the experiment fields");
  app.add_option("--algo", algo,
                 "AC | AC_PCSS | DPGD_AC | DPGD_AC_PCSS | compare");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--iters", iters, "iterations per realization");
  app.add_option("--realizations", realizations, "realization count");
  app.add_option("--noise-var", noise_var, "channel noise variance");
  app.add_option("--out", out, "output directory");
  app.add_option("--topology", topology,
                 "'generate' or path to a positions CSV (expects a matching "
                 "*_beta file next to it)");
  app.add_option("--trajectories", trajectories, "none | sampled | full");

  CLI11_PARSE(app, argc, argv);

  try {
    otac::ExperimentSpec spec;
    if (!config.empty()) otac::load_config_file(config, spec);

    // Command line flags override the config file.
    if (app.count("--seed")) spec.seed = seed;
    if (app.count("--iters")) spec.iterations = iters;
    if (app.count("--realizations")) spec.realizations = realizations;
    if (app.count("--noise-var")) spec.noise_variance = noise_var;
    if (app.count("--topology"))
      spec.topology_csv = topology == "generate" ? "" : topology;
    if (!trajectories.empty())
      otac::apply_config_entry(spec, "trajectories", trajectories);

    // --algo wins when given; otherwise a config file's algorithm runs
    // alone, and with neither the default is the four-way comparison.
    bool compare = config.empty();
    if (app.count("--algo")) {
      compare = algo == "compare";
      if (!compare) {
        const auto parsed = otac::parse_algorithm(algo);
        if (!parsed) throw std::runtime_error("unknown algorithm: " + algo);
        spec.algorithm = *parsed;
      }
    }
    spec.validate();

    std::filesystem::create_directories(out);
    const auto out_path = [&](const char* name) {
      return (std::filesystem::path(out) / name).string();
    };

    const otac::PreparedNetwork prep = otac::prepare_network(spec);
    otac::save_topology_csv(prep.topology, out_path("topology.csv"),
                            out_path("topology_beta.csv"));
    otac::save_pcss_csv(prep.optimized, out_path("pcss.csv"));

    std::vector<otac::MetricTrace> traces;
    if (compare) {
      for (otac::Algorithm a : otac::kAllAlgorithms)
        traces.push_back(otac::run_algorithm(prep, spec, a));
    } else {
      traces.push_back(otac::run_algorithm(prep, spec, spec.algorithm));
    }

    otac::emit_csv(traces, out_path("metrics.csv"));
    if (spec.trajectories != otac::TrajectoryMode::none)
      otac::emit_trajectories_csv(traces, out_path("trajectories.csv"));

    std::cout << "pcss spectral norm " << prep.pcss_report.final_objective
              << " after " << prep.pcss_report.iterations
              << " outer iterations"
              << (prep.pcss_report.converged ? "" : " (not converged)")
              << "\n";
    for (const otac::MetricTrace& tr : traces)
      std::cout << otac::algorithm_name(tr.algorithm) << ": final ce "
                << tr.ce.back() << ", final rmse " << tr.rmse.back() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "otac_sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
