#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "otac/matrix.hpp"
#include "otac/network.hpp"
#include "otac/ota_link.hpp"

namespace otac {

// Immutable state snapshot; every update produces the next snapshot.
struct ConsensusState {
  std::vector<double> x;
  std::vector<double> x0;
  std::size_t t = 0;
  double x_max = 250.0;

  static ConsensusState from_initial(std::vector<double> initial,
                                     double x_max) {
    for (double v : initial)
      if (std::abs(v) > x_max)
        throw std::invalid_argument("initial state outside [-x_max, x_max]");
    ConsensusState s;
    s.x = initial;
    s.x0 = std::move(initial);
    s.x_max = x_max;
    return s;
  }

  double target() const {
    double sum = 0.0;
    for (double v : x0) sum += v;
    return sum / static_cast<double>(x0.size());
  }
};

// Power-law step sizes zeta[t] = (t+1)^-zeta_exponent (neighbor mixing) and
// eta[t] = (t+1)^-eta_exponent (gradient). The +1 keeps t = 0 finite. An
// exponent of zero pins the corresponding step at 1.
struct StepSchedule {
  double zeta_exponent = 0.1;
  double eta_exponent = 1.0;

  struct Steps {
    double zeta;
    double eta;
  };

  Steps at(std::size_t t) const {
    const double base = static_cast<double>(t + 1);
    return {std::pow(base, -zeta_exponent), std::pow(base, -eta_exponent)};
  }
};

inline double local_gradient(const ConsensusState& state, std::size_t agent) {
  return state.x[agent] - state.x0[agent];
}

inline double project(double v, double x_max) {
  if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
  return std::clamp(v, -x_max, x_max);
}

// Projected gradient update:
// x' = P[x + zeta*gamma*c - eta*(x - x0)], elementwise onto [-x_max, x_max].
inline ConsensusState step_dpgd(const ConsensusState& state,
                                std::span<const double> c,
                                std::span<const double> gamma,
                                const StepSchedule& schedule) {
  const auto [zeta, eta] = schedule.at(state.t);
  ConsensusState next = state;
  for (std::size_t n = 0; n < state.x.size(); ++n) {
    const double raw = state.x[n] + zeta * gamma[n] * c[n] -
                       eta * (state.x[n] - state.x0[n]);
    next.x[n] = project(raw, state.x_max);
  }
  next.t = state.t + 1;
  return next;
}

// Primal protocol: x' = x + zeta*gamma*c. No projection, no gradient term;
// the internal state may leave [-x_max, x_max] (only its encoded copy is
// clipped by the link layer).
inline ConsensusState step_ac(const ConsensusState& state,
                              std::span<const double> c,
                              std::span<const double> gamma,
                              const StepSchedule& schedule) {
  const double zeta = schedule.at(state.t).zeta;
  ConsensusState next = state;
  for (std::size_t n = 0; n < state.x.size(); ++n)
    next.x[n] = state.x[n] + zeta * gamma[n] * c[n];
  next.t = state.t + 1;
  return next;
}

// Realized mixing matrix for one channel draw. Off-diagonal entries are
// zeta*gamma_n*|g_nm|^2*alpha_m; the diagonal absorbs this draw's
// interference and noise components divided by the agent's state, which
// completes the identity x' = W[t] x for states inside the clip bound.
// Singular at any zero state, hence the optional: this is a diagnostic,
// not the production update path.
inline std::optional<Matrix> build_wt(const ConsensusState& state,
                                      const NetworkTopology& topology,
                                      const ChannelRealization& channel,
                                      std::span<const double> alpha,
                                      std::span<const double> gamma,
                                      const StepSchedule& schedule,
                                      const Codebook& codebook) {
  const std::size_t n = topology.size();
  for (double v : state.x)
    if (v == 0.0) return std::nullopt;

  const double zeta = schedule.at(state.t).zeta;
  std::vector<PrecodedSymbol> symbols(n);
  for (std::size_t m = 0; m < n; ++m)
    symbols[m] = precode(std::clamp(state.x[m], -state.x_max, state.x_max),
                         alpha[m], codebook);

  Matrix w(n, n);
  for (std::size_t row = 0; row < n; ++row) {
    double gain_sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == row) continue;
      const double gain2 = std::norm(link_gain(topology, channel, row, m));
      w(row, m) = zeta * gamma[row] * gain2 * alpha[m];
      gain_sum += gain2 * alpha[m];
    }
    const CombinedObservation parts = combine_components(
        symbols, state.x, alpha, topology, channel, row, codebook);
    // The interference and noise components enter the diagonal negated;
    // that is what makes W[t] x reproduce the scalar combining update.
    w(row, row) = 1.0 - zeta * gamma[row] *
                            (gain_sum - (parts.interference + parts.noise) /
                                            state.x[row]);
  }
  return w;
}

// Expected mixing matrix at zeta = 1: off-diagonal gamma_n*beta_nm*alpha_m,
// diagonal chosen so each row sums to one.
inline Matrix build_wbar(const NetworkTopology& topology,
                         std::span<const double> alpha,
                         std::span<const double> gamma) {
  const std::size_t n = topology.size();
  Matrix w(n, n);
  for (std::size_t row = 0; row < n; ++row) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == row) continue;
      const double entry = gamma[row] * topology.beta(row, m) * alpha[m];
      w(row, m) = entry;
      acc += topology.beta(row, m) * alpha[m];
    }
    w(row, row) = 1.0 - gamma[row] * acc;
  }
  return w;
}

struct ConditionReport {
  bool row_stochastic = false;     // C1: W 1 == 1
  bool column_stochastic = false;  // C2: 1^T W == 1^T
  bool contracting = false;        // C3: rho(W - J) < 1
  double spectral_radius = 0.0;    // of W - 11^T/N
};

inline ConditionReport check_convergence_conditions(const Matrix& w) {
  if (w.rows() != w.cols())
    throw std::invalid_argument("mixing matrix must be square");
  const std::size_t n = w.rows();
  constexpr double kTol = 1e-9;

  ConditionReport report;
  report.row_stochastic = true;
  report.column_stochastic = true;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0, col_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += w(i, j);
      col_sum += w(j, i);
    }
    if (std::abs(row_sum - 1.0) > kTol) report.row_stochastic = false;
    if (std::abs(col_sum - 1.0) > kTol) report.column_stochastic = false;
  }

  Matrix centered = w;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) centered(i, j) -= inv_n;
  report.spectral_radius = otac::spectral_radius(centered);
  report.contracting = report.spectral_radius < 1.0;
  return report;
}

// Receive scaling for the non-optimized baseline: one common gamma chosen
// so every diagonal entry of the expected mixing matrix stays non-negative,
// with a margin theta against the strongest row. A per-row rule would hand
// the baseline the same per-receiver boost the optimized design provides.
inline std::vector<double> baseline_gamma(const NetworkTopology& topology,
                                          std::span<const double> alpha,
                                          double theta) {
  if (!(theta > 0.0) || !(theta <= 1.0))
    throw std::invalid_argument("theta must lie in (0, 1]");
  const std::size_t n = topology.size();
  double strongest = 0.0;
  for (std::size_t row = 0; row < n; ++row) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      if (m != row) acc += topology.beta(row, m) * alpha[m];
    strongest = std::max(strongest, acc);
  }
  if (!(strongest > 0.0))
    throw std::invalid_argument("fading matrix has an isolated agent");
  return std::vector<double>(n, theta / strongest);
}

}  // namespace otac
