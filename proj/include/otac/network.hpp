#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "otac/csv.hpp"
#include "otac/matrix.hpp"
#include "otac/random.hpp"

namespace otac {

// Log-distance path loss: beta_dB = K - 10*delta*log10(d/d0) + Psi,
// Psi ~ N(0, shadowing_std_db^2), converted to linear power gain 10^(dB/10).
struct PathLossParams {
  double antenna_gain_db = 3.0;
  double path_loss_exponent = 4.0;
  double ref_distance_m = 10.0;
  double shadowing_std_db = 7.0;
};

// Static network: agent positions and the symmetric large-scale fading
// matrix beta (linear power gains, zero diagonal).
struct NetworkTopology {
  std::vector<std::array<double, 2>> positions;
  Matrix beta;
  double min_distance_m = 0.0;
  double area_side_m = 0.0;

  std::size_t size() const { return positions.size(); }
};

// One iteration's randomness: reciprocal small-scale fading h (unit-variance
// complex gaussian, mirrored across the diagonal, zero diagonal) and one
// complex AWGN sample per receiver per codeword dimension. Carries the
// variance its noise was drawn with so decoders can subtract the right bias.
class ChannelRealization {
 public:
  ChannelRealization(std::size_t n, double noise_variance)
      : n_(n), noise_variance_(noise_variance), h_(n * n), noise_(n * 2) {}

  std::size_t size() const { return n_; }
  double noise_variance() const { return noise_variance_; }

  std::complex<double>& h(std::size_t n, std::size_t m) {
    return h_[n * n_ + m];
  }
  std::complex<double> h(std::size_t n, std::size_t m) const {
    return h_[n * n_ + m];
  }

  std::complex<double>& noise(std::size_t receiver, std::size_t dim) {
    return noise_[receiver * 2 + dim];
  }
  std::complex<double> noise(std::size_t receiver, std::size_t dim) const {
    return noise_[receiver * 2 + dim];
  }

 private:
  std::size_t n_;
  double noise_variance_;
  std::vector<std::complex<double>> h_;
  std::vector<std::complex<double>> noise_;
};

inline double distance(const std::array<double, 2>& a,
                       const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Places n_agents uniformly in [0, area_side]^2 with a minimum pairwise
// distance, then fills beta from the path loss model. Shadowing is drawn
// once per unordered pair so beta stays exactly symmetric (reciprocity).
inline NetworkTopology generate_topology(std::size_t n_agents,
                                         double area_side,
                                         double min_distance,
                                         const PathLossParams& params,
                                         RandomStream& rng) {
  if (n_agents < 2) throw std::invalid_argument("need at least 2 agents");
  if (!(min_distance < area_side))
    throw std::invalid_argument("min_distance must be below area_side");
  if (!(params.path_loss_exponent > 0.0) || !(params.ref_distance_m > 0.0) ||
      params.shadowing_std_db < 0.0)
    throw std::invalid_argument("bad path loss parameters");

  NetworkTopology topo;
  topo.min_distance_m = min_distance;
  topo.area_side_m = area_side;
  topo.positions.reserve(n_agents);

  constexpr std::size_t kMaxAttempts = 1'000'000;
  std::size_t attempts = 0;
  while (topo.positions.size() < n_agents) {
    if (++attempts > kMaxAttempts)
      throw std::runtime_error(
          "placement failed: min_distance infeasible for this area");
    const std::array<double, 2> p = {rng.uniform(0.0, area_side),
                                     rng.uniform(0.0, area_side)};
    bool ok = true;
    for (const auto& q : topo.positions) {
      if (distance(p, q) < min_distance) {
        ok = false;
        break;
      }
    }
    if (ok) topo.positions.push_back(p);
  }

  topo.beta = Matrix(n_agents, n_agents);
  for (std::size_t n = 0; n < n_agents; ++n) {
    for (std::size_t m = n + 1; m < n_agents; ++m) {
      const double d = distance(topo.positions[n], topo.positions[m]);
      const double shadow = rng.gaussian(params.shadowing_std_db);
      const double beta_db =
          params.antenna_gain_db -
          10.0 * params.path_loss_exponent *
              std::log10(d / params.ref_distance_m) +
          shadow;
      const double beta_lin = std::pow(10.0, beta_db / 10.0);
      topo.beta(n, m) = beta_lin;
      topo.beta(m, n) = beta_lin;
    }
  }
  return topo;
}

// Draws the reciprocal fading matrix (h[n][m] == h[m][n]) and per-receiver
// noise. Draw order is fixed, so equal seeds give equal realizations.
inline ChannelRealization draw_channel(const NetworkTopology& topology,
                                       double noise_variance,
                                       RandomStream& rng) {
  if (noise_variance < 0.0)
    throw std::invalid_argument("noise variance must be non-negative");
  const std::size_t n = topology.size();
  ChannelRealization ch(n, noise_variance);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::complex<double> v = rng.complex_gaussian(1.0);
      ch.h(i, j) = v;
      ch.h(j, i) = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < 2; ++d)
      ch.noise(i, d) = rng.complex_gaussian(noise_variance);
  return ch;
}

// Effective link coefficient g = h * sqrt(beta).
inline std::complex<double> link_gain(const NetworkTopology& topology,
                                      const ChannelRealization& channel,
                                      std::size_t receiver,
                                      std::size_t sender) {
  return channel.h(receiver, sender) *
         std::sqrt(topology.beta(receiver, sender));
}

// Positions file: agent_id,x_m,y_m. Fading file: i,j,beta_linear with the
// lower triangle only (j < i).
inline void save_topology_csv(const NetworkTopology& topology,
                              const std::string& positions_path,
                              const std::string& beta_path) {
  csv::Writer pos(positions_path);
  pos.line("agent_id,x_m,y_m");
  for (std::size_t i = 0; i < topology.size(); ++i)
    pos.line(std::to_string(i) + "," + csv::format(topology.positions[i][0]) +
             "," + csv::format(topology.positions[i][1]));
  pos.close();

  csv::Writer beta(beta_path);
  beta.line("i,j,beta_linear");
  for (std::size_t i = 0; i < topology.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      beta.line(std::to_string(i) + "," + std::to_string(j) + "," +
                csv::format(topology.beta(i, j)));
  beta.close();
}

inline NetworkTopology load_topology_csv(const std::string& positions_path,
                                         const std::string& beta_path) {
  NetworkTopology topo;
  const auto pos_lines = csv::read_lines(positions_path);
  if (pos_lines.empty() || pos_lines.front() != "agent_id,x_m,y_m")
    throw std::runtime_error("bad topology header in " + positions_path);
  for (std::size_t k = 1; k < pos_lines.size(); ++k) {
    const auto f = csv::split_fields(pos_lines[k]);
    if (f.size() != 3)
      throw std::runtime_error("bad topology row in " + positions_path);
    if (csv::parse_u64(f[0]) != topo.positions.size())
      throw std::runtime_error("agent ids must be dense in " + positions_path);
    topo.positions.push_back({csv::parse_double(f[1]), csv::parse_double(f[2])});
  }
  const std::size_t n = topo.positions.size();
  if (n < 2) throw std::runtime_error("topology needs at least 2 agents");

  topo.beta = Matrix(n, n);
  const auto beta_lines = csv::read_lines(beta_path);
  if (beta_lines.empty() || beta_lines.front() != "i,j,beta_linear")
    throw std::runtime_error("bad fading header in " + beta_path);
  std::size_t count = 0;
  for (std::size_t k = 1; k < beta_lines.size(); ++k) {
    const auto f = csv::split_fields(beta_lines[k]);
    if (f.size() != 3)
      throw std::runtime_error("bad fading row in " + beta_path);
    const std::size_t i = csv::parse_u64(f[0]);
    const std::size_t j = csv::parse_u64(f[1]);
    if (i >= n || j >= i)
      throw std::runtime_error("fading rows must be lower-triangle in " +
                               beta_path);
    const double b = csv::parse_double(f[2]);
    if (!(b > 0.0)) throw std::runtime_error("beta must be positive");
    topo.beta(i, j) = b;
    topo.beta(j, i) = b;
    ++count;
  }
  if (count != n * (n - 1) / 2)
    throw std::runtime_error("fading file must cover every pair in " +
                             beta_path);
  return topo;
}

}  // namespace otac
