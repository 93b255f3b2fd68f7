#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "otac/consensus.hpp"
#include "otac/csv.hpp"
#include "otac/matrix.hpp"
#include "otac/network.hpp"

namespace otac {

// Joint transmit-power / receive-scaling design: minimize the spectral norm
// of the centered expected mixing matrix over box-bounded alpha and gamma
// tied together by the column-stochasticity balance, alternating between
// the two convex subproblems.

struct PcssConfig {
  std::vector<double> alpha;
  std::vector<double> gamma;
  double alpha_max = 5.0;
  double gamma_max = 5.0;
};

struct AmReport {
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // initial value, then one per outer
  double final_objective = 0.0;
  bool converged = false;
  double epsilon = 0.0;
};

struct PcssOptions {
  double alpha_max = 5.0;
  double gamma_max = 5.0;
  double epsilon = 1e-4;
  std::size_t max_outer = 50;
};

// Strict positivity closed with a floor; a true open constraint is not
// representable in the solver.
inline constexpr double kPcssFloor = 1e-6;

namespace pcss_detail {

// A subproblem improvement below this is treated as noise and the warm
// start is returned untouched, which makes a converged solve a fixed point.
inline constexpr double kMinImprovement = 1e-6;
inline constexpr std::size_t kMaxInner = 5000;

inline Matrix centered_wbar(const NetworkTopology& topology,
                            std::span<const double> alpha,
                            std::span<const double> gamma) {
  Matrix m = build_wbar(topology, alpha, gamma);
  const double inv_n = 1.0 / static_cast<double>(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= inv_n;
  return m;
}

}  // namespace pcss_detail

inline double pcss_objective(const NetworkTopology& topology,
                             std::span<const double> alpha,
                             std::span<const double> gamma) {
  return spectral_norm(pcss_detail::centered_wbar(topology, alpha, gamma));
}

// residual[n] = gamma_n * sum_k beta_nk alpha_k - alpha_n * sum_j beta_jn
// gamma_j. The zero vector is equivalent to a column-stochastic expected
// mixing matrix.
inline std::vector<double> balance_residual(const NetworkTopology& topology,
                                            std::span<const double> alpha,
                                            std::span<const double> gamma) {
  const std::size_t n = topology.size();
  std::vector<double> residual(n);
  for (std::size_t row = 0; row < n; ++row) {
    double in_sum = 0.0, out_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == row) continue;
      in_sum += topology.beta(row, k) * alpha[k];
      out_sum += topology.beta(k, row) * gamma[k];
    }
    residual[row] = gamma[row] * in_sum - alpha[row] * out_sum;
  }
  return residual;
}

namespace pcss_detail {

// With the other vector held fixed, the balance equations have a
// one-dimensional solution set: E*free = 0, where E = D_fixed*B - diag(B*
// fixed) has the nonnegative irreducible structure of a complete graph, so
// by Perron-Frobenius its null space is spanned by a single positive
// vector. Power iteration on the averaged map (I + T)/2 (T the row-
// normalized coupling) always converges to it; the plain map can cycle for
// two agents.
inline std::vector<double> balanced_direction(const NetworkTopology& topology,
                                              std::span<const double> fixed) {
  const std::size_t n = topology.size();
  std::vector<double> weighted(n, 0.0);  // (B * fixed)_n
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t k = 0; k < n; ++k)
      if (k != row) weighted[row] += topology.beta(row, k) * fixed[k];
    if (!(weighted[row] > 0.0))
      throw std::runtime_error("balance system is degenerate");
  }

  std::vector<double> dir(n, 1.0), next(n);
  for (std::size_t iter = 0; iter < 200'000; ++iter) {
    double change = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (k != row) acc += topology.beta(row, k) * dir[k];
      next[row] = 0.5 * (dir[row] + fixed[row] * acc / weighted[row]);
    }
    const double peak = *std::max_element(next.begin(), next.end());
    for (std::size_t row = 0; row < n; ++row) {
      next[row] /= peak;
      change = std::max(change, std::abs(next[row] - dir[row]));
    }
    dir.swap(next);
    if (change < 1e-15) break;
  }
  return dir;
}

struct Segment {
  std::vector<double> dir;  // positive, max element 1
  double lo = 0.0, hi = 0.0;

  std::vector<double> point(double c) const {
    std::vector<double> p(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i) p[i] = c * dir[i];
    return p;
  }

  double project(std::span<const double> y) const {
    const double c = dot(y, dir) / dot(dir, dir);
    return std::clamp(c, lo, hi);
  }
};

inline Segment feasible_segment(const NetworkTopology& topology,
                                std::span<const double> fixed,
                                double box_max) {
  Segment seg;
  seg.dir = balanced_direction(topology, fixed);
  const double low = *std::min_element(seg.dir.begin(), seg.dir.end());
  seg.lo = kPcssFloor / low;
  seg.hi = box_max;  // dir has max element 1
  if (seg.lo > seg.hi)
    throw std::runtime_error(
        "subproblem infeasible: balance direction cannot fit the box");
  return seg;
}

enum class Role { alpha, gamma };

inline Matrix centered_for(const NetworkTopology& topology, Role role,
                           std::span<const double> free_vec,
                           std::span<const double> fixed) {
  return role == Role::alpha ? centered_wbar(topology, free_vec, fixed)
                             : centered_wbar(topology, fixed, free_vec);
}

// Subgradient of the spectral norm with respect to the free vector, via the
// top singular pair (u, v) of the centered matrix and the affine dependence
// of its entries on the free variable.
inline std::vector<double> map_subgradient(const NetworkTopology& topology,
                                           Role role,
                                           std::span<const double> fixed,
                                           std::span<const double> u,
                                           std::span<const double> v) {
  const std::size_t n = topology.size();
  std::vector<double> g(n, 0.0);
  if (role == Role::alpha) {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t row = 0; row < n; ++row)
        if (row != k)
          acc += fixed[row] * topology.beta(row, k) * u[row] * (v[k] - v[row]);
      g[k] = acc;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m)
        if (m != k)
          acc += topology.beta(k, m) * fixed[m] * (v[m] - v[k]);
      g[k] = u[k] * acc;
    }
  }
  return g;
}

// Projected subgradient along the feasible set, annealed over stages of
// diminishing step length, keeping the incumbent best. The final exact
// objective decides whether the walk actually beat the warm start.
inline std::vector<double> solve_subproblem(const NetworkTopology& topology,
                                            Role role,
                                            std::span<const double> fixed,
                                            double box_max,
                                            std::span<const double> warm) {
  const Segment segment = feasible_segment(topology, fixed, box_max);
  const double warm_objective = spectral_norm(
      centered_for(topology, role,
                   segment.point(segment.project(warm)), fixed));

  const double dir_len = norm2(segment.dir);
  const double span_len = (segment.hi - segment.lo) * dir_len;

  double best_c = segment.project(warm);
  double best_objective_seen = warm_objective;

  constexpr std::size_t kStages = 31;
  constexpr std::size_t kPerStage = kMaxInner / kStages;  // 161
  double step = 0.5 * span_len;
  for (std::size_t stage = 0; stage < kStages; ++stage, step *= 0.6) {
    std::vector<double> iterate = segment.point(best_c);
    for (std::size_t inner = 0; inner < kPerStage; ++inner) {
      const Matrix m = centered_for(topology, role, iterate, fixed);
      const TopSingularPair pair = top_singular(m);
      const double c_here = segment.project(iterate);
      if (pair.value < best_objective_seen) {
        best_objective_seen = pair.value;
        best_c = c_here;
      }
      const std::vector<double> g =
          map_subgradient(topology, role, fixed, pair.left, pair.right);
      const double glen = norm2(g);
      if (glen < 1e-18) break;
      std::vector<double> moved(iterate.size());
      for (std::size_t i = 0; i < iterate.size(); ++i)
        moved[i] = iterate[i] - step * g[i] / glen;
      iterate = segment.point(segment.project(moved));
    }
  }

  const std::vector<double> best_point = segment.point(best_c);
  const double best_objective =
      spectral_norm(centered_for(topology, role, best_point, fixed));
  if (best_objective < warm_objective - kMinImprovement) return best_point;
  return segment.point(segment.project(warm));
}

}  // namespace pcss_detail

// Optimal alpha for fixed gamma (box bound plus balance equality); never
// returns a point worse than the warm start.
inline std::vector<double> solve_subproblem_alpha(
    const NetworkTopology& topology, std::span<const double> gamma,
    double alpha_max, std::span<const double> warm_start) {
  return pcss_detail::solve_subproblem(topology, pcss_detail::Role::alpha,
                                       gamma, alpha_max, warm_start);
}

inline std::vector<double> solve_subproblem_gamma(
    const NetworkTopology& topology, std::span<const double> alpha,
    double gamma_max, std::span<const double> warm_start) {
  return pcss_detail::solve_subproblem(topology, pcss_detail::Role::gamma,
                                       alpha, gamma_max, warm_start);
}

// Alternating minimization: solve for alpha with gamma fixed, then gamma
// with alpha fixed, until neither vector moves by epsilon in sup norm.
inline std::pair<PcssConfig, AmReport> alternating_minimization(
    const NetworkTopology& topology, std::span<const double> alpha0,
    std::span<const double> gamma0, const PcssOptions& options = {}) {
  if (!(options.epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");
  const std::size_t n = topology.size();
  if (alpha0.size() != n || gamma0.size() != n)
    throw std::invalid_argument("starting vectors must match the topology");

  PcssConfig config;
  config.alpha.assign(alpha0.begin(), alpha0.end());
  config.gamma.assign(gamma0.begin(), gamma0.end());
  config.alpha_max = options.alpha_max;
  config.gamma_max = options.gamma_max;

  AmReport report;
  report.epsilon = options.epsilon;
  report.objective_trace.push_back(
      pcss_objective(topology, config.alpha, config.gamma));

  for (std::size_t k = 1; k <= options.max_outer; ++k) {
    const std::vector<double> alpha_next = solve_subproblem_alpha(
        topology, config.gamma, options.alpha_max, config.alpha);
    const std::vector<double> gamma_next = solve_subproblem_gamma(
        topology, alpha_next, options.gamma_max, config.gamma);

    double d_alpha = 0.0, d_gamma = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d_alpha = std::max(d_alpha, std::abs(alpha_next[i] - config.alpha[i]));
      d_gamma = std::max(d_gamma, std::abs(gamma_next[i] - config.gamma[i]));
    }
    config.alpha = alpha_next;
    config.gamma = gamma_next;
    report.iterations = k;
    report.objective_trace.push_back(
        pcss_objective(topology, config.alpha, config.gamma));
    if (d_alpha < options.epsilon && d_gamma < options.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.final_objective = report.objective_trace.back();
  return {config, report};
}

inline std::pair<PcssConfig, AmReport> alternating_minimization(
    const NetworkTopology& topology, const PcssOptions& options = {}) {
  // All-ones start satisfies the balance constraint exactly under a
  // symmetric fading matrix.
  const std::vector<double> ones(topology.size(), 1.0);
  return alternating_minimization(topology, ones, ones, options);
}

inline void save_pcss_csv(const PcssConfig& config, const std::string& path) {
  csv::Writer out(path);
  out.line("agent_id,alpha,gamma");
  for (std::size_t i = 0; i < config.alpha.size(); ++i)
    out.line(std::to_string(i) + "," + csv::format(config.alpha[i]) + "," +
             csv::format(config.gamma[i]));
  out.close();
}

inline PcssConfig load_pcss_csv(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines.front() != "agent_id,alpha,gamma")
    throw std::runtime_error("bad pcss header in " + path);
  PcssConfig config;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = csv::split_fields(lines[k]);
    if (f.size() != 3) throw std::runtime_error("bad pcss row in " + path);
    if (csv::parse_u64(f[0]) != config.alpha.size())
      throw std::runtime_error("agent ids must be dense in " + path);
    config.alpha.push_back(csv::parse_double(f[1]));
    config.gamma.push_back(csv::parse_double(f[2]));
  }
  return config;
}

}  // namespace otac
