// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failed criteria. The expensive paper-scale
// comparison is run once and shared by the criteria that inspect it.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otac/consensus.hpp"
#include "otac/harness.hpp"
#include "otac/network.hpp"
#include "otac/ota_link.hpp"
#include "otac/pcss.hpp"
#include "otac/random.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

otac::NetworkTopology paper_topology(std::uint64_t seed) {
  otac::RandomStream master(seed);
  otac::RandomStream topo_rng = master.derive(0);
  return otac::generate_topology(9, 300.0, 20.0, otac::PathLossParams{},
                                 topo_rng);
}

otac::NetworkTopology random_beta_topology(std::size_t n,
                                           otac::RandomStream& rng) {
  otac::NetworkTopology topo;
  topo.positions.assign(n, {0.0, 0.0});
  topo.beta = otac::Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double b = std::pow(10.0, rng.uniform(-4.0, -0.5));
      topo.beta(i, j) = b;
      topo.beta(j, i) = b;
    }
  return topo;
}

// The paper's simulation setup; the noise variance is not reported there,
// so the suite pins a value at which channel noise does not drown the
// non-coherent interference mechanism the figures exhibit.
otac::ExperimentSpec paper_spec() {
  otac::ExperimentSpec spec;
  spec.n_agents = 9;
  spec.iterations = 10'000;
  spec.realizations = 100;
  spec.seed = 1;
  spec.noise_variance = 1e-8;
  spec.x_max = 250.0;
  spec.pcss.alpha_max = 5.0;
  spec.pcss.gamma_max = 5.0;
  spec.zeta_exponent = 0.1;
  spec.eta_exponent = 1.0;
  return spec;
}

struct PaperRun {
  std::vector<otac::MetricTrace> traces;
  double elapsed_seconds = 0.0;
};

const PaperRun& shared_paper_run() {
  static const PaperRun run = [] {
    const auto start = Clock::now();
    PaperRun r;
    r.traces = otac::compare_algorithms(paper_spec());
    r.elapsed_seconds = seconds_since(start);
    return r;
  }();
  return run;
}

const otac::MetricTrace& trace_of(const PaperRun& run, otac::Algorithm a) {
  for (const auto& t : run.traces)
    if (t.algorithm == a) return t;
  throw std::logic_error("trace missing");
}

std::size_t crossing_iteration(const otac::MetricTrace& trace,
                               double fraction) {
  const double threshold = fraction * trace.rmse.front();
  for (std::size_t t = 0; t < trace.rmse.size(); ++t)
    if (trace.rmse[t] < threshold) return t;
  return trace.rmse.size();
}

void criterion_1_combiner_unbiasedness() {
  const auto start = Clock::now();
  const otac::NetworkTopology topo = paper_topology(1);
  otac::RandomStream rng(401);
  const std::size_t n = topo.size();
  std::vector<double> x(n), alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(-250.0, 250.0);
    alpha[i] = rng.uniform(0.5, 5.0);
  }
  const otac::Codebook cb = otac::Codebook::for_bound(250.0);
  const double sigma2 = 0.5;
  const int draws = 100'000;
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto ch = otac::draw_channel(topo, sigma2, rng);
    const auto c = otac::ota_exchange(x, 250.0, alpha, topo, ch, cb);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += c[i];
      sumsq[i] += c[i] * c[i];
    }
  }
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / draws;
    const double sd = std::sqrt((sumsq[i] - draws * mean * mean) / (draws - 1));
    const double expect = otac::expected_combined(topo, alpha, x, i);
    const double sigmas =
        std::abs(mean - expect) / (sd / std::sqrt(double(draws)));
    worst = std::max(worst, sigmas);
    if (sigmas > 3.0) pass = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed > 30.0) pass = false;
  std::ostringstream detail;
  detail << "worst deviation " << worst << " standard errors over " << draws
         << " draws, " << elapsed << " s";
  report(1, "combiner mean matches the weighted state differences", pass,
         detail.str());
}

void criterion_2_decode_expansion() {
  otac::RandomStream rng(402);
  const otac::Codebook cb = otac::Codebook::for_bound(250.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    otac::RandomStream local = rng.derive(rep);
    const std::size_t n = 2 + rep % 8;
    const otac::NetworkTopology topo = random_beta_topology(n, local);
    const auto ch = otac::draw_channel(topo, 0.7, local);
    std::vector<double> alpha(n);
    std::vector<otac::PrecodedSymbol> symbols(n);
    for (std::size_t m = 0; m < n; ++m) {
      alpha[m] = local.uniform(0.1, 5.0);
      symbols[m] = otac::precode(local.uniform(-250.0, 250.0), alpha[m], cb);
    }
    const std::size_t receiver = rep % n;
    const auto energies =
        otac::decode_energy(otac::superpose(symbols, topo, ch, receiver));
    for (std::size_t i = 0; i < 2; ++i) {
      double power_term = 0.0, cross_term = 0.0;
      std::complex<double> aggregate = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        if (m == receiver) continue;
        power_term += topo.beta(receiver, m) * std::norm(ch.h(receiver, m)) *
                      alpha[m] * symbols[m].p[i];
        aggregate += ch.h(receiver, m) * std::sqrt(topo.beta(receiver, m)) *
                     symbols[m].s[i];
        for (std::size_t k = 0; k < n; ++k) {
          if (k == m || k == receiver) continue;
          cross_term +=
              (ch.h(receiver, m) * std::conj(ch.h(receiver, k))).real() *
              std::sqrt(topo.beta(receiver, m) * alpha[m] * symbols[m].p[i] *
                        topo.beta(receiver, k) * alpha[k] * symbols[k].p[i]);
        }
      }
      const std::complex<double> w = ch.noise(receiver, i);
      const double expansion = power_term + cross_term + std::norm(w) +
                               2.0 * (aggregate * std::conj(w)).real();
      worst = std::max(worst, std::abs(energies[i] - expansion) /
                                  std::max(std::abs(expansion), 1e-12));
    }
  }
  std::ostringstream detail;
  detail << "worst relative error " << worst << " over 1000 instances";
  report(2, "decoded energy equals the termwise expansion", worst <= 1e-9,
         detail.str());
}

void criterion_3_matrix_scalar_equivalence() {
  otac::RandomStream rng(403);
  const otac::Codebook cb = otac::Codebook::for_bound(250.0);
  double worst = 0.0;
  bool degenerate = false;
  for (int rep = 0; rep < 100; ++rep) {
    otac::RandomStream local = rng.derive(rep);
    const std::size_t n = 3 + rep % 7;
    const otac::NetworkTopology topo = random_beta_topology(n, local);
    std::vector<double> x(n), alpha(n), gamma(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = local.uniform(-250.0, 250.0);
      alpha[i] = local.uniform(0.5, 5.0);
      gamma[i] = local.uniform(0.5, 5.0);
    }
    otac::ConsensusState state = otac::ConsensusState::from_initial(x, 250.0);
    state.t = rep;
    const otac::StepSchedule schedule;
    const auto ch = otac::draw_channel(topo, 0.3, local);
    const auto c = otac::ota_exchange(state.x, 250.0, alpha, topo, ch, cb);
    const auto wt =
        otac::build_wt(state, topo, ch, alpha, gamma, schedule, cb);
    if (!wt) {
      degenerate = true;
      break;
    }
    const auto wx = *wt * std::span<const double>(state.x);
    const double zeta = schedule.at(state.t).zeta;
    for (std::size_t i = 0; i < n; ++i) {
      const double scalar = state.x[i] + zeta * gamma[i] * c[i];
      worst = std::max(worst, std::abs(scalar - wx[i]) /
                                  std::max(std::abs(scalar), 1.0));
    }
  }
  std::ostringstream detail;
  detail << "worst relative gap " << worst << " over 100 iterations";
  report(3, "scalar update equals the mixing-matrix form",
         !degenerate && worst <= 1e-9, detail.str());
}

struct PcssBatch {
  std::vector<otac::NetworkTopology> topologies;
  std::vector<otac::PcssConfig> configs;
  std::vector<otac::AmReport> reports;
};

const PcssBatch& shared_pcss_batch() {
  static const PcssBatch batch = [] {
    PcssBatch b;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      b.topologies.push_back(paper_topology(seed));
      auto [config, report] = otac::alternating_minimization(
          b.topologies.back(), otac::PcssOptions{});
      b.configs.push_back(std::move(config));
      b.reports.push_back(std::move(report));
    }
    return b;
  }();
  return batch;
}

void criterion_4_wbar_stochasticity() {
  const PcssBatch& batch = shared_pcss_batch();
  bool pass = true;
  double worst_row = 0.0, worst_col = 0.0, worst_rho = 0.0;
  for (std::size_t k = 0; k < batch.topologies.size(); ++k) {
    const otac::Matrix wbar = otac::build_wbar(
        batch.topologies[k], batch.configs[k].alpha, batch.configs[k].gamma);
    const std::size_t n = wbar.rows();
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row += wbar(i, j);
        col += wbar(j, i);
      }
      worst_row = std::max(worst_row, std::abs(row - 1.0));
      worst_col = std::max(worst_col, std::abs(col - 1.0));
    }
    const auto conditions = otac::check_convergence_conditions(wbar);
    worst_rho = std::max(worst_rho, conditions.spectral_radius);
    if (conditions.spectral_radius >= 1.0) pass = false;
  }
  if (worst_row > 1e-12 || worst_col > 1e-6) pass = false;
  std::ostringstream detail;
  detail << "worst row-sum error " << worst_row << ", column-sum error "
         << worst_col << ", spectral radius " << worst_rho
         << " over 20 topologies";
  report(4,
         "optimized expected mixing matrix is doubly stochastic and "
         "contracting",
         pass, detail.str());
}

void criterion_5_am_behavior() {
  const PcssBatch& batch = shared_pcss_batch();
  bool monotone = true;
  for (const auto& rep : batch.reports)
    for (std::size_t k = 1; k < rep.objective_trace.size(); ++k)
      if (rep.objective_trace[k] > rep.objective_trace[k - 1] + 1e-8)
        monotone = false;

  // Dense grid oracles on two- and three-agent instances.
  double worst_gap = 0.0;
  {
    otac::RandomStream rng(405);
    for (int rep = 0; rep < 3; ++rep) {
      otac::RandomStream local = rng.derive(rep);
      const otac::NetworkTopology topo = random_beta_topology(2, local);
      const std::vector<double> gamma = {local.uniform(0.5, 3.0),
                                         local.uniform(0.5, 3.0)};
      const std::vector<double> warm(2, 1.0);
      const auto solved = otac::solve_subproblem_alpha(topo, gamma, 5.0, warm);
      const double solver = otac::pcss_objective(topo, solved, gamma);
      // Two agents: the balance equality forces alpha proportional to
      // gamma, so the feasible set is a ray swept densely here.
      double best = 1e300;
      const double gmax = std::max(gamma[0], gamma[1]);
      for (int k = 1; k <= 10'000; ++k) {
        const double c = 5.0 / gmax * k / 10'000.0;
        const std::vector<double> alpha = {c * gamma[0], c * gamma[1]};
        best = std::min(best, otac::pcss_objective(topo, alpha, gamma));
      }
      worst_gap = std::max(worst_gap, std::abs(solver - best));
    }
  }
  {
    // Symmetric three-agent network: the balanced set is the uniform ray.
    otac::NetworkTopology topo;
    topo.positions.assign(3, {0.0, 0.0});
    topo.beta = otac::Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j) topo.beta(i, j) = 1.0;
    const std::vector<double> gamma(3, 1.0);
    const std::vector<double> warm(3, 1.0);
    const auto solved = otac::solve_subproblem_alpha(topo, gamma, 5.0, warm);
    const double solver = otac::pcss_objective(topo, solved, gamma);
    double best = 1e300;
    for (int k = 1; k <= 10'000; ++k) {
      const std::vector<double> alpha(3, 5.0 * k / 10'000.0);
      best = std::min(best, otac::pcss_objective(topo, alpha, gamma));
    }
    worst_gap = std::max(worst_gap, std::abs(solver - best));
  }
  std::ostringstream detail;
  detail << "traces monotone: " << (monotone ? "yes" : "no")
         << ", worst oracle gap " << worst_gap;
  report(5, "alternating minimization is monotone and matches grid oracles",
         monotone && worst_gap <= 1e-2, detail.str());
}

void criterion_6_convergence_speed_ordering() {
  const PaperRun& run = shared_paper_run();
  const auto& ac = trace_of(run, otac::Algorithm::ac);
  const auto& ac_pcss = trace_of(run, otac::Algorithm::ac_pcss);
  const auto& dpgd = trace_of(run, otac::Algorithm::dpgd_ac);
  const auto& dpgd_pcss = trace_of(run, otac::Algorithm::dpgd_ac_pcss);
  const std::size_t t_ac = crossing_iteration(ac, 0.1);
  const std::size_t t_ac_pcss = crossing_iteration(ac_pcss, 0.1);
  const std::size_t t_dpgd = crossing_iteration(dpgd, 0.1);
  const std::size_t t_dpgd_pcss = crossing_iteration(dpgd_pcss, 0.1);
  const bool ordering = t_ac_pcss < t_ac && t_dpgd_pcss < t_dpgd;
  const bool in_time = run.elapsed_seconds <= 600.0;
  std::ostringstream detail;
  detail << "10% RMSE crossings: AC_PCSS " << t_ac_pcss << " < AC " << t_ac
         << ", DPGD_AC_PCSS " << t_dpgd_pcss << " < DPGD_AC " << t_dpgd
         << "; " << run.elapsed_seconds << " s";
  report(6, "power control strictly accelerates both algorithm families",
         ordering && in_time, detail.str());
}

void criterion_7_bias_ordering() {
  const PaperRun& run = shared_paper_run();
  const auto& ac_pcss = trace_of(run, otac::Algorithm::ac_pcss);
  const auto& dpgd_pcss = trace_of(run, otac::Algorithm::dpgd_ac_pcss);
  const bool ce_gap = 5.0 * dpgd_pcss.ce.back() <= ac_pcss.ce.back();
  bool all_consense = true;
  for (const auto& trace : run.traces)
    if (!(trace.rmse.back() < 0.05 * trace.rmse.front())) all_consense = false;
  std::ostringstream detail;
  detail << "final CE " << dpgd_pcss.ce.back() << " vs " << ac_pcss.ce.back()
         << " (ratio " << ac_pcss.ce.back() / dpgd_pcss.ce.back()
         << "), all final RMSE below 5% of start: "
         << (all_consense ? "yes" : "no");
  report(7, "gradient correction removes the consensus bias",
         ce_gap && all_consense, detail.str());
}

void criterion_8_projection_safety() {
  const PaperRun& run = shared_paper_run();
  const otac::ExperimentSpec spec = paper_spec();
  const auto& dpgd = trace_of(run, otac::Algorithm::dpgd_ac);
  const auto& dpgd_pcss = trace_of(run, otac::Algorithm::dpgd_ac_pcss);
  const bool pass = dpgd.max_abs_state <= spec.x_max &&
                    dpgd_pcss.max_abs_state <= spec.x_max;
  std::ostringstream detail;
  detail << "largest |x| over all projected runs "
         << std::max(dpgd.max_abs_state, dpgd_pcss.max_abs_state)
         << " with bound " << spec.x_max;
  report(8, "projected states never leave the feasible box", pass,
         detail.str());
}

void criterion_9_determinism() {
  const PaperRun& first = shared_paper_run();
  const auto dir = std::filesystem::temp_directory_path() / "otac_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path_a = (dir / "metrics_a.csv").string();
  const std::string path_b = (dir / "metrics_b.csv").string();
  otac::emit_csv(first.traces, path_a);
  const auto again = otac::compare_algorithms(paper_spec());
  otac::emit_csv(again, path_b);
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(path_a), b = slurp(path_b);
  const bool pass = !a.empty() && a == b;
  std::ostringstream detail;
  detail << a.size() << " bytes, rerun " << (pass ? "identical" : "DIFFERS");
  report(9, "identical seed reproduces metrics byte for byte", pass,
         detail.str());
  std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
  std::printf("acceptance suite: paper setup N=9, T=10000, M=100, seed 1\n");
  criterion_1_combiner_unbiasedness();
  criterion_2_decode_expansion();
  criterion_3_matrix_scalar_equivalence();
  criterion_4_wbar_stochasticity();
  criterion_5_am_behavior();
  criterion_6_convergence_speed_ordering();
  criterion_7_bias_ordering();
  criterion_8_projection_safety();
  criterion_9_determinism();
  if (failures == 0)
    std::printf("all 9 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
