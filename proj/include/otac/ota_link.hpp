#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "otac/network.hpp"

namespace otac {

// Two-codeword energy codebook: z1 = +radius, z2 = -radius. The radius must
// exceed the clip bound of the states it carries so convex weights stay in
// (0, 1); the default margin below keeps them away from the endpoints.
struct Codebook {
  double radius;

  static constexpr double kDefaultMargin = 1.2;

  static Codebook for_bound(double x_max, double margin = kDefaultMargin) {
    return Codebook{margin * x_max};
  }

  double z(std::size_t i) const { return i == 0 ? radius : -radius; }
};

using ConvexWeights = std::array<double, 2>;

// Transmitted amplitudes s[i] = sqrt(alpha * p[i]) alongside the weights.
struct PrecodedSymbol {
  std::array<double, 2> s;
  ConvexWeights p;
};

struct ReceivedSymbol {
  std::array<std::complex<double>, 2> rvec;
};

// Combined neighbor contribution with its diagnostic split into the desired
// signal, the non-coherent cross interference, and the aggregated noise.
struct CombinedObservation {
  double c = 0.0;
  double desired = 0.0;       // c1
  double interference = 0.0;  // c2
  double noise = 0.0;         // c3
};

// x as a convex combination of the codewords: p[0]*z1 + p[1]*z2 == x.
// Out-of-range inputs are clamped to the codeword radius, never rejected.
inline ConvexWeights encode(double x, const Codebook& codebook) {
  const double r = codebook.radius;
  const double clamped = std::clamp(x, -r, r);
  return {(clamped + r) / (2.0 * r), (r - clamped) / (2.0 * r)};
}

inline PrecodedSymbol precode(double x, double alpha,
                              const Codebook& codebook) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const ConvexWeights p = encode(x, codebook);
  return {{std::sqrt(alpha * p[0]), std::sqrt(alpha * p[1])}, p};
}

// Superposition at one receiver: every other agent's amplitudes arrive
// through g = h*sqrt(beta), plus this receiver's noise sample. The
// receiver's own transmission is absent (full duplex with perfect
// self-interference cancellation).
inline ReceivedSymbol superpose(std::span<const PrecodedSymbol> symbols,
                                const NetworkTopology& topology,
                                const ChannelRealization& channel,
                                std::size_t receiver) {
  const std::size_t n = topology.size();
  if (symbols.size() != n || receiver >= n)
    throw std::invalid_argument("superpose: bad agent indexing");
  ReceivedSymbol out;
  for (std::size_t i = 0; i < 2; ++i) {
    std::complex<double> acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == receiver) continue;
      acc += link_gain(topology, channel, receiver, m) * symbols[m].s[i];
    }
    out.rvec[i] = acc + channel.noise(receiver, i);
  }
  return out;
}

inline std::array<double, 2> decode_energy(const ReceivedSymbol& received) {
  return {std::norm(received.rvec[0]), std::norm(received.rvec[1])};
}

// Combining rule: c = sum_i (energy_i - sigma^2) * (z_i - x_self). The
// noise variance is assumed known at the receiver for the bias subtraction.
inline double combine(const std::array<double, 2>& energies, double x_self,
                      const Codebook& codebook, double noise_variance) {
  double c = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    c += (energies[i] - noise_variance) * (codebook.z(i) - x_self);
  return c;
}

// Same combination with the termwise decomposition. O(N^2) per receiver, so
// it is a separate entry point rather than part of the production path.
// The identity desired + interference + noise == c holds for every draw.
inline CombinedObservation combine_components(
    std::span<const PrecodedSymbol> symbols, std::span<const double> x,
    std::span<const double> alpha, const NetworkTopology& topology,
    const ChannelRealization& channel, std::size_t receiver,
    const Codebook& codebook) {
  const std::size_t n = topology.size();
  if (symbols.size() != n || x.size() != n || alpha.size() != n ||
      receiver >= n)
    throw std::invalid_argument("combine_components: bad agent indexing");
  const double sigma2 = channel.noise_variance();
  CombinedObservation out;

  const ReceivedSymbol received = superpose(symbols, topology, channel, receiver);
  out.c = combine(decode_energy(received), x[receiver], codebook, sigma2);

  // Desired part: each neighbor's encoded value against our own state.
  for (std::size_t m = 0; m < n; ++m) {
    if (m == receiver) continue;
    const double encoded_m =
        symbols[m].p[0] * codebook.z(0) + symbols[m].p[1] * codebook.z(1);
    out.desired += std::norm(channel.h(receiver, m)) *
                   topology.beta(receiver, m) * alpha[m] *
                   (encoded_m - x[receiver]);
  }

  // Cross interference over ordered sender pairs (m, k), both != receiver.
  for (std::size_t m = 0; m < n; ++m) {
    if (m == receiver) continue;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == m || k == receiver) continue;
      double eps = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        eps += std::sqrt(symbols[m].p[i] * symbols[k].p[i]) *
               (codebook.z(i) - x[receiver]);
      const double cross =
          (channel.h(receiver, m) * std::conj(channel.h(receiver, k))).real();
      out.interference += cross *
                          std::sqrt(topology.beta(receiver, m) *
                                    topology.beta(receiver, k) * alpha[m] *
                                    alpha[k]) *
                          eps;
    }
  }

  // Aggregated noise: N_i = |n_i|^2 + 2 Re(sum_m g s_{i,m} conj(n_i)),
  // straight from expanding the received signal; its mean is sigma^2.
  for (std::size_t i = 0; i < 2; ++i) {
    std::complex<double> signal = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == receiver) continue;
      signal += link_gain(topology, channel, receiver, m) * symbols[m].s[i];
    }
    const std::complex<double> w = channel.noise(receiver, i);
    const double noise_term =
        std::norm(w) + 2.0 * (signal * std::conj(w)).real();
    out.noise += (noise_term - sigma2) * (codebook.z(i) - x[receiver]);
  }
  return out;
}

// Conditional mean of the combined observation given states and powers:
// sum over neighbors of beta * alpha * (x_m - x_n).
inline double expected_combined(const NetworkTopology& topology,
                                std::span<const double> alpha,
                                std::span<const double> x, std::size_t agent) {
  const std::size_t n = topology.size();
  double acc = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (m == agent) continue;
    acc += topology.beta(agent, m) * alpha[m] * (x[m] - x[agent]);
  }
  return acc;
}

// One full exchange round: every agent precodes its clipped state, all
// transmissions superpose, and every receiver decodes and combines. The
// clip keeps the encoder's convex weights valid even for protocols whose
// internal state is allowed to leave [-x_max, x_max].
inline std::vector<double> ota_exchange(std::span<const double> x,
                                        double x_max,
                                        std::span<const double> alpha,
                                        const NetworkTopology& topology,
                                        const ChannelRealization& channel,
                                        const Codebook& codebook) {
  const std::size_t n = topology.size();
  std::vector<PrecodedSymbol> symbols(n);
  for (std::size_t m = 0; m < n; ++m)
    symbols[m] =
        precode(std::clamp(x[m], -x_max, x_max), alpha[m], codebook);

  std::vector<double> combined(n);
  for (std::size_t agent = 0; agent < n; ++agent) {
    const ReceivedSymbol received =
        superpose(symbols, topology, channel, agent);
    combined[agent] = combine(decode_energy(received), x[agent], codebook,
                              channel.noise_variance());
  }
  return combined;
}

}  // namespace otac
