#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "otac/consensus.hpp"
#include "otac/csv.hpp"
#include "otac/network.hpp"
#include "otac/ota_link.hpp"
#include "otac/pcss.hpp"
#include "otac/random.hpp"

namespace otac {

enum class Algorithm { ac, ac_pcss, dpgd_ac, dpgd_ac_pcss };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::ac, Algorithm::ac_pcss, Algorithm::dpgd_ac,
    Algorithm::dpgd_ac_pcss};

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::ac: return "AC";
    case Algorithm::ac_pcss: return "AC_PCSS";
    case Algorithm::dpgd_ac: return "DPGD_AC";
    case Algorithm::dpgd_ac_pcss: return "DPGD_AC_PCSS";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms)
    if (s == algorithm_name(a)) return a;
  return std::nullopt;
}

inline bool uses_pcss(Algorithm a) {
  return a == Algorithm::ac_pcss || a == Algorithm::dpgd_ac_pcss;
}

inline bool uses_gradient(Algorithm a) {
  return a == Algorithm::dpgd_ac || a == Algorithm::dpgd_ac_pcss;
}

enum class TrajectoryMode { none, sampled, full };

// Full description of one seeded experiment. The paper's setup is the
// default everywhere a value was reported; the noise variance was not, so
// it is an explicit knob here.
struct ExperimentSpec {
  Algorithm algorithm = Algorithm::dpgd_ac_pcss;
  std::size_t n_agents = 9;
  std::size_t iterations = 10'000;
  std::size_t realizations = 100;
  std::uint64_t seed = 1;
  double noise_variance = 1.0;
  double x_max = 250.0;
  double codebook_margin = Codebook::kDefaultMargin;
  double zeta_exponent = 0.1;
  double eta_exponent = 1.0;
  PcssOptions pcss;
  double theta = 0.5;  // baseline receive-scaling rule
  double area_side = 300.0;
  double min_distance = 20.0;
  PathLossParams path_loss;
  std::string topology_csv;  // empty: generate from seed
  TrajectoryMode trajectories = TrajectoryMode::none;
  std::size_t trajectory_stride = 10;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (realizations < 1)
      throw std::invalid_argument("realizations must be >= 1");
    if (noise_variance < 0.0)
      throw std::invalid_argument("noise variance must be >= 0");
    if (!(codebook_margin > 1.0))
      throw std::invalid_argument("codebook margin must exceed 1");
    if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
    if (trajectory_stride < 1)
      throw std::invalid_argument("trajectory stride must be >= 1");
  }

  StepSchedule schedule() const { return {zeta_exponent, eta_exponent}; }
  Codebook codebook() const {
    return Codebook::for_bound(x_max, codebook_margin);
  }
};

struct TrajectorySample {
  std::size_t t = 0;
  std::size_t realization = 0;
  std::size_t agent = 0;
  double x = 0.0;
};

// Per-iteration metrics averaged over realizations, plus the largest state
// magnitude seen anywhere in the run (projection safety evidence).
struct MetricTrace {
  Algorithm algorithm = Algorithm::ac;
  std::vector<double> ce;
  std::vector<double> rmse;
  double max_abs_state = 0.0;
  std::vector<TrajectorySample> trajectories;
};

inline double consensus_error(std::span<const double> x, double x_star) {
  double acc = 0.0;
  for (double v : x) acc += (v - x_star) * (v - x_star);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double rmse(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  return consensus_error(x, mean);
}

// Everything the four algorithms share for one seed: the topology, the
// optimized PCSS pair, the power-matched baseline pair, and the initial
// states. Sub-stream layout: index 0 topology, 1 initial states, 2 + m the
// m-th realization's channel stream.
struct PreparedNetwork {
  NetworkTopology topology;
  PcssConfig optimized;
  AmReport pcss_report;
  std::vector<double> baseline_alpha;
  std::vector<double> baseline_gamma;
  std::vector<double> initial_states;
  double x_star = 0.0;
};

inline PreparedNetwork prepare_network(const ExperimentSpec& spec) {
  spec.validate();
  PreparedNetwork prep;
  RandomStream master(spec.seed);
  if (spec.topology_csv.empty()) {
    RandomStream topo_rng = master.derive(0);
    prep.topology =
        generate_topology(spec.n_agents, spec.area_side, spec.min_distance,
                          spec.path_loss, topo_rng);
  } else {
    const std::string beta_path = [&] {
      const std::string& p = spec.topology_csv;
      const std::size_t dot = p.rfind('.');
      return dot == std::string::npos ? p + "_beta"
                                      : p.substr(0, dot) + "_beta" + p.substr(dot);
    }();
    prep.topology = load_topology_csv(spec.topology_csv, beta_path);
  }
  const std::size_t n = prep.topology.size();

  // The optimized pair is needed even for the non-PCSS baselines, whose
  // uniform power is matched to the optimized average consumption.
  auto [config, report] = alternating_minimization(prep.topology, spec.pcss);
  prep.optimized = std::move(config);
  prep.pcss_report = std::move(report);

  double mean_alpha = 0.0;
  for (double a : prep.optimized.alpha) mean_alpha += a;
  mean_alpha /= static_cast<double>(n);
  prep.baseline_alpha.assign(n, mean_alpha);
  prep.baseline_gamma =
      baseline_gamma(prep.topology, prep.baseline_alpha, spec.theta);

  RandomStream init_rng = master.derive(1);
  prep.initial_states.resize(n);
  for (double& v : prep.initial_states)
    v = init_rng.uniform(-spec.x_max, spec.x_max);
  double sum = 0.0;
  for (double v : prep.initial_states) sum += v;
  prep.x_star = sum / static_cast<double>(n);
  return prep;
}

// Runs one algorithm over all realizations. Channel sub-streams depend only
// on (seed, realization), so two algorithms run against the same
// PreparedNetwork see identical channel and noise draws at every iteration.
inline MetricTrace run_algorithm(const PreparedNetwork& prep,
                                 const ExperimentSpec& spec, Algorithm algo) {
  spec.validate();
  const std::size_t n = prep.topology.size();
  const std::size_t T = spec.iterations;
  const Codebook codebook = spec.codebook();
  const StepSchedule schedule = spec.schedule();
  const RandomStream master(spec.seed);

  const std::vector<double>& alpha =
      uses_pcss(algo) ? prep.optimized.alpha : prep.baseline_alpha;
  const std::vector<double>& gamma =
      uses_pcss(algo) ? prep.optimized.gamma : prep.baseline_gamma;

  MetricTrace trace;
  trace.algorithm = algo;
  trace.ce.assign(T, 0.0);
  trace.rmse.assign(T, 0.0);

  for (std::size_t m = 0; m < spec.realizations; ++m) {
    RandomStream channel_rng = master.derive(2 + m);
    ConsensusState state =
        ConsensusState::from_initial(prep.initial_states, spec.x_max);
    // Sampled capture keeps one realization at the configured stride; full
    // capture keeps every iteration of every realization.
    const bool capture =
        spec.trajectories == TrajectoryMode::full ||
        (spec.trajectories == TrajectoryMode::sampled && m == 0);
    const std::size_t stride =
        spec.trajectories == TrajectoryMode::full ? 1 : spec.trajectory_stride;

    for (std::size_t t = 0; t < T; ++t) {
      trace.ce[t] += consensus_error(state.x, prep.x_star);
      trace.rmse[t] += rmse(state.x);
      for (double v : state.x)
        trace.max_abs_state = std::max(trace.max_abs_state, std::abs(v));
      if (capture && t % stride == 0)
        for (std::size_t agent = 0; agent < n; ++agent)
          trace.trajectories.push_back({t, m, agent, state.x[agent]});

      if (t + 1 == T) break;
      const ChannelRealization channel =
          draw_channel(prep.topology, spec.noise_variance, channel_rng);
      const std::vector<double> c = ota_exchange(
          state.x, spec.x_max, alpha, prep.topology, channel, codebook);
      state = uses_gradient(algo) ? step_dpgd(state, c, gamma, schedule)
                                  : step_ac(state, c, gamma, schedule);
    }
  }

  const double inv_m = 1.0 / static_cast<double>(spec.realizations);
  for (std::size_t t = 0; t < T; ++t) {
    trace.ce[t] *= inv_m;
    trace.rmse[t] *= inv_m;
  }
  return trace;
}

inline MetricTrace run_experiment(const ExperimentSpec& spec) {
  const PreparedNetwork prep = prepare_network(spec);
  return run_algorithm(prep, spec, spec.algorithm);
}

// All four algorithms on the same topology, initial states, and channel
// draws. Traces come back in kAllAlgorithms order.
inline std::vector<MetricTrace> compare_algorithms(const ExperimentSpec& spec) {
  const PreparedNetwork prep = prepare_network(spec);
  std::vector<MetricTrace> traces;
  for (Algorithm a : kAllAlgorithms)
    traces.push_back(run_algorithm(prep, spec, a));
  return traces;
}

inline void emit_csv(std::span<const MetricTrace> traces,
                     const std::string& path) {
  csv::Writer out(path);
  out.line("t,algorithm,ce,rmse");
  for (const MetricTrace& trace : traces)
    for (std::size_t t = 0; t < trace.ce.size(); ++t)
      out.line(std::to_string(t) + "," +
               std::string(algorithm_name(trace.algorithm)) + "," +
               csv::format(trace.ce[t]) + "," + csv::format(trace.rmse[t]));
  out.close();
}

inline void emit_csv(const MetricTrace& trace, const std::string& path) {
  emit_csv(std::span<const MetricTrace>(&trace, 1), path);
}

inline void emit_trajectories_csv(std::span<const MetricTrace> traces,
                                  const std::string& path) {
  csv::Writer out(path);
  out.line("t,algorithm,realization,agent,x");
  for (const MetricTrace& trace : traces)
    for (const TrajectorySample& s : trace.trajectories)
      out.line(std::to_string(s.t) + "," +
               std::string(algorithm_name(trace.algorithm)) + "," +
               std::to_string(s.realization) + "," + std::to_string(s.agent) +
               "," + csv::format(s.x));
  out.close();
}

// Reads a metrics file back into traces (grouped by algorithm, in file
// order). Values round-trip bit-for-bit thanks to the shortest-decimal
// formatting.
inline std::vector<MetricTrace> read_metrics_csv(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines.front() != "t,algorithm,ce,rmse")
    throw std::runtime_error("bad metrics header in " + path);
  std::vector<MetricTrace> traces;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = csv::split_fields(lines[k]);
    if (f.size() != 4) throw std::runtime_error("bad metrics row in " + path);
    const auto algo = parse_algorithm(f[1]);
    if (!algo) throw std::runtime_error("unknown algorithm in " + path);
    if (traces.empty() || traces.back().algorithm != *algo) {
      traces.push_back({});
      traces.back().algorithm = *algo;
    }
    if (csv::parse_u64(f[0]) != traces.back().ce.size())
      throw std::runtime_error("iteration indices out of order in " + path);
    traces.back().ce.push_back(csv::parse_double(f[2]));
    traces.back().rmse.push_back(csv::parse_double(f[3]));
  }
  return traces;
}

// Flat key = value configuration mirroring ExperimentSpec. '#' starts a
// comment; unknown keys are rejected so typos do not silently default.
inline void apply_config_entry(ExperimentSpec& spec, std::string_view key,
                               std::string_view value) {
  const auto as_double = [&] { return csv::parse_double(value); };
  const auto as_u64 = [&] { return csv::parse_u64(value); };
  if (key == "algorithm") {
    const auto a = parse_algorithm(value);
    if (!a) throw std::runtime_error("unknown algorithm: " + std::string(value));
    spec.algorithm = *a;
  } else if (key == "n_agents") {
    spec.n_agents = as_u64();
  } else if (key == "iterations") {
    spec.iterations = as_u64();
  } else if (key == "realizations") {
    spec.realizations = as_u64();
  } else if (key == "seed") {
    spec.seed = as_u64();
  } else if (key == "noise_variance") {
    spec.noise_variance = as_double();
  } else if (key == "x_max") {
    spec.x_max = as_double();
  } else if (key == "codebook_margin") {
    spec.codebook_margin = as_double();
  } else if (key == "zeta_exponent") {
    spec.zeta_exponent = as_double();
  } else if (key == "eta_exponent") {
    spec.eta_exponent = as_double();
  } else if (key == "pcss_epsilon") {
    spec.pcss.epsilon = as_double();
  } else if (key == "pcss_max_outer") {
    spec.pcss.max_outer = as_u64();
  } else if (key == "alpha_max") {
    spec.pcss.alpha_max = as_double();
  } else if (key == "gamma_max") {
    spec.pcss.gamma_max = as_double();
  } else if (key == "theta") {
    spec.theta = as_double();
  } else if (key == "area_side") {
    spec.area_side = as_double();
  } else if (key == "min_distance") {
    spec.min_distance = as_double();
  } else if (key == "antenna_gain_db") {
    spec.path_loss.antenna_gain_db = as_double();
  } else if (key == "path_loss_exponent") {
    spec.path_loss.path_loss_exponent = as_double();
  } else if (key == "ref_distance") {
    spec.path_loss.ref_distance_m = as_double();
  } else if (key == "shadowing_std_db") {
    spec.path_loss.shadowing_std_db = as_double();
  } else if (key == "topology") {
    spec.topology_csv = value == "generate" ? "" : std::string(value);
  } else if (key == "trajectories") {
    if (value == "none") spec.trajectories = TrajectoryMode::none;
    else if (value == "sampled") spec.trajectories = TrajectoryMode::sampled;
    else if (value == "full") spec.trajectories = TrajectoryMode::full;
    else throw std::runtime_error("unknown trajectory mode");
  } else if (key == "trajectory_stride") {
    spec.trajectory_stride = as_u64();
  } else {
    throw std::runtime_error("unknown config key: " + std::string(key));
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline void load_config_file(const std::string& path, ExperimentSpec& spec) {
  for (const std::string& raw : csv::read_lines(path)) {
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("expected key = value in " + path + ": " + raw);
    apply_config_entry(spec, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
}

}  // namespace otac
