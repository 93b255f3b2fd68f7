#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "otac/network.hpp"

using otac::NetworkTopology;
using otac::PathLossParams;
using otac::RandomStream;

namespace {

NetworkTopology paper_topology(std::uint64_t seed) {
  RandomStream rng(seed);
  return otac::generate_topology(9, 300.0, 20.0, PathLossParams{}, rng);
}

}  // namespace

TEST_CASE("paper setup yields a valid topology") {
  const NetworkTopology topo = paper_topology(1);
  REQUIRE(topo.size() == 9);
  for (std::size_t n = 0; n < 9; ++n) {
    CHECK(topo.positions[n][0] >= 0.0);
    CHECK(topo.positions[n][0] <= 300.0);
    CHECK(topo.positions[n][1] >= 0.0);
    CHECK(topo.positions[n][1] <= 300.0);
    CHECK(topo.beta(n, n) == 0.0);
    for (std::size_t m = 0; m < 9; ++m) {
      if (m == n) continue;
      CHECK(topo.beta(n, m) > 0.0);
      CHECK(topo.beta(n, m) == topo.beta(m, n));  // exact symmetry
      CHECK(otac::distance(topo.positions[n], topo.positions[m]) >= 20.0);
    }
  }
}

TEST_CASE("path loss at the reference distance is the antenna gain") {
  // At d = d0 the log-distance term vanishes: beta_dB = K = 3 dB,
  // linear ~ 1.9953.
  const PathLossParams params;
  const double beta_db =
      params.antenna_gain_db -
      10.0 * params.path_loss_exponent *
          std::log10(params.ref_distance_m / params.ref_distance_m);
  CHECK(beta_db == 3.0);
  CHECK(std::pow(10.0, beta_db / 10.0) ==
        doctest::Approx(1.9953).epsilon(1e-4));
}

TEST_CASE("path loss at 100 m is -37 dB without shadowing") {
  const double beta_db = 3.0 - 10.0 * 4.0 * std::log10(100.0 / 10.0);
  CHECK(beta_db == doctest::Approx(-37.0).epsilon(1e-12));
  // The generator applies the same dB -> linear convention.
  PathLossParams params;
  params.shadowing_std_db = 0.0;
  for (std::uint64_t seed = 1; seed < 6; ++seed) {
    RandomStream rng(seed);
    const NetworkTopology topo =
        otac::generate_topology(2, 300.0, 20.0, params, rng);
    const double d = otac::distance(topo.positions[0], topo.positions[1]);
    const double expected_db =
        3.0 - 40.0 * std::log10(d / 10.0);
    CHECK(topo.beta(0, 1) ==
          doctest::Approx(std::pow(10.0, expected_db / 10.0)).epsilon(1e-12));
  }
}

TEST_CASE("generation is reproducible for a fixed seed") {
  const NetworkTopology a = paper_topology(42);
  const NetworkTopology b = paper_topology(42);
  for (std::size_t n = 0; n < 9; ++n) {
    CHECK(a.positions[n][0] == b.positions[n][0]);
    CHECK(a.positions[n][1] == b.positions[n][1]);
    for (std::size_t m = 0; m < 9; ++m) CHECK(a.beta(n, m) == b.beta(n, m));
  }
}

TEST_CASE("infeasible placement fails deterministically") {
  RandomStream rng(3);
  // 50 agents at >= 90 m spacing cannot fit a 100 m square.
  CHECK_THROWS_AS(
      otac::generate_topology(50, 100.0, 90.0, PathLossParams{}, rng),
      std::runtime_error);
  RandomStream rng2(3);
  CHECK_THROWS_AS(otac::generate_topology(1, 300.0, 20.0, PathLossParams{}, rng2),
                  std::invalid_argument);
}

TEST_CASE("channel draws respect reciprocity and zero diagonal") {
  const NetworkTopology topo = paper_topology(4);
  RandomStream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto ch = otac::draw_channel(topo, 1.0, rng);
    for (std::size_t n = 0; n < topo.size(); ++n) {
      CHECK(ch.h(n, n) == std::complex<double>(0.0, 0.0));
      for (std::size_t m = n + 1; m < topo.size(); ++m)
        CHECK(ch.h(n, m) == ch.h(m, n));
    }
  }
}

TEST_CASE("zero noise variance gives an exactly silent noise matrix") {
  const NetworkTopology topo = paper_topology(6);
  RandomStream rng(7);
  const auto ch = otac::draw_channel(topo, 0.0, rng);
  for (std::size_t n = 0; n < topo.size(); ++n)
    for (std::size_t d = 0; d < 2; ++d)
      CHECK(ch.noise(n, d) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("small-scale fading has unit empirical power") {
  const NetworkTopology topo = paper_topology(8);
  RandomStream rng(9);
  const int draws = 100000;
  double power = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto ch = otac::draw_channel(topo, 0.0, rng);
    power += std::norm(ch.h(0, 1));
  }
  power /= draws;
  // |h|^2 is exponential(1): std = 1
  CHECK(std::abs(power - 1.0) < 3.0 / std::sqrt(double(draws)));
  CHECK(std::abs(power - 1.0) < 0.02);
}

TEST_CASE("noise has the configured empirical power") {
  const NetworkTopology topo = paper_topology(10);
  RandomStream rng(11);
  const double sigma2 = 0.37;
  const int draws = 100000;
  double power = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto ch = otac::draw_channel(topo, sigma2, rng);
    power += std::norm(ch.noise(3, 1));
  }
  power /= draws;
  CHECK(std::abs(power - sigma2) < 3.0 * sigma2 / std::sqrt(double(draws)));
}

TEST_CASE("topology csv round trip") {
  const NetworkTopology topo = paper_topology(12);
  const auto dir = std::filesystem::temp_directory_path();
  const std::string pos = (dir / "otac_test_topology.csv").string();
  const std::string beta = (dir / "otac_test_topology_beta.csv").string();
  otac::save_topology_csv(topo, pos, beta);
  const NetworkTopology loaded = otac::load_topology_csv(pos, beta);
  REQUIRE(loaded.size() == topo.size());
  for (std::size_t n = 0; n < topo.size(); ++n) {
    CHECK(loaded.positions[n][0] == topo.positions[n][0]);
    CHECK(loaded.positions[n][1] == topo.positions[n][1]);
    for (std::size_t m = 0; m < topo.size(); ++m)
      CHECK(loaded.beta(n, m) == topo.beta(n, m));
  }
  std::remove(pos.c_str());
  std::remove(beta.c_str());
}
