#pragma once

// Small hand-built instances shared by the unit and acceptance tests.

#include <cstdint>
#include <random>

#include "edgemarket/model.hpp"

namespace edgemarket::testing {

/// One CPU node (32 cores, 128 GB), one 40 MHz cell; every provider needs
/// (4 cores, 8 GB, 3 MHz) per job and has budget 1.
inline MarketInstance single_node(std::size_t providers = 1) {
  MarketInstance in;
  in.mec_capacity = Matrix(1, 2);
  in.mec_capacity(0, 0) = 32.0;
  in.mec_capacity(0, 1) = 128.0;
  in.ran_capacity = {40.0};
  in.mec_demand = Matrix(providers, 2);
  for (std::size_t s = 0; s < providers; ++s) {
    in.mec_demand(s, 0) = 4.0;
    in.mec_demand(s, 1) = 8.0;
  }
  in.ran_demand = Matrix(providers, 1, 3.0);
  in.budgets.assign(providers, 1.0);
  return in;
}

/// One scalar resource of capacity 10; per-job demands 1 and 2; a cell so
/// large it never binds; equal budgets.
inline MarketInstance capacity_ten() {
  MarketInstance in;
  in.mec_capacity = Matrix(1, 1, 10.0);
  in.ran_capacity = {1e4};
  in.mec_demand = Matrix(2, 1);
  in.mec_demand(0, 0) = 1.0;
  in.mec_demand(1, 0) = 2.0;
  in.ran_demand = Matrix(2, 1, 1.0);
  in.budgets = {1.0, 1.0};
  return in;
}

/// Two providers on one node with opposite dominant resources.
inline MarketInstance asymmetric_pair() {
  MarketInstance in;
  in.mec_capacity = Matrix(1, 2);
  in.mec_capacity(0, 0) = 32.0;
  in.mec_capacity(0, 1) = 128.0;
  in.ran_capacity = {40.0};
  in.mec_demand = Matrix(2, 2);
  in.mec_demand(0, 0) = 4.0;  // CPU heavy
  in.mec_demand(0, 1) = 8.0;
  in.mec_demand(1, 0) = 1.0;  // RAM heavy
  in.mec_demand(1, 1) = 32.0;
  in.ran_demand = Matrix(2, 1, 3.0);
  in.budgets = {1.0, 1.0};
  return in;
}

/// S identical providers with budget `budget` each.
inline MarketInstance identical_providers(std::size_t providers, double budget) {
  MarketInstance in = single_node(providers);
  in.budgets.assign(providers, budget);
  return in;
}

struct RandomShape {
  std::size_t max_providers = 3;
  std::size_t max_nodes = 2;
  std::size_t max_types = 2;
  std::size_t max_cells = 2;
};

/// Random valid instance with dimensions drawn up to `shape`.
inline MarketInstance random_instance(std::uint64_t seed, RandomShape shape = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.5, 3.0);
  auto dim = [&](std::size_t max) { return 1 + static_cast<std::size_t>(rng() % max); };
  const std::size_t S = dim(shape.max_providers);
  const std::size_t M = dim(shape.max_nodes);
  const std::size_t R = dim(shape.max_types);
  const std::size_t C = dim(shape.max_cells);
  MarketInstance in;
  in.mec_capacity = Matrix(M, R);
  for (auto& v : in.mec_capacity.values()) v = 10.0 * unit(rng);
  in.ran_capacity.resize(C);
  for (auto& v : in.ran_capacity) v = 10.0 * unit(rng);
  in.mec_demand = Matrix(S, R);
  for (auto& v : in.mec_demand.values()) v = unit(rng);
  in.ran_demand = Matrix(S, C);
  for (auto& v : in.ran_demand.values()) v = unit(rng);
  in.budgets.resize(S);
  for (auto& v : in.budgets) v = unit(rng);
  return in;
}

}  // namespace edgemarket::testing
