#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "crsf/crsf.hpp"

namespace crsf::test {

inline ServiceTypeId sensing() { return ServiceTypeId("sensing"); }

inline SfProfile sensing_sf(std::int64_t id, std::int64_t subnetwork, double capacity = 40.0) {
  return {SfId(id), SubnetworkId(subnetwork), sensing(), {100, 50, 150, 5, 0.9, 0.01}, capacity};
}

inline ServiceSchema sensing_schema(std::size_t categories = 2) {
  ServiceSchema s;
  s.service_type = sensing();
  s.descriptors = sensing_descriptors();
  for (std::size_t k = 1; k <= categories; ++k)
    s.categories.push_back({CategoryId(static_cast<std::int64_t>(k)), std::vector<double>(6, 0.1 * static_cast<double>(k)),
                            100.0, 5.0 + static_cast<double>(k)});
  return s;
}

/// Random instance with small integer coefficients so that ties are common.
inline SelectionInstance tie_heavy_instance(std::mt19937_64& rng, std::size_t R, std::size_t M) {
  std::uniform_int_distribution<int> coef(0, 4), util(1, 3), cap(0, 6), coin(0, 3);
  SelectionInstance inst;
  inst.coefficients = Matrix<double>(R, M);
  inst.feasible = Matrix<std::uint8_t>(R, M);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t m = 0; m < M; ++m) {
      inst.coefficients(r, m) = coef(rng);
      inst.feasible(r, m) = coin(rng) != 0;
    }
  for (std::size_t r = 0; r < R; ++r) inst.utilization.push_back(util(rng));
  for (std::size_t m = 0; m < M; ++m) inst.capacity.push_back(cap(rng));
  return inst;
}

inline SimConfig sim_config(std::size_t R, std::size_t M, std::uint64_t seed, std::size_t K = 5) {
  SimConfig c;
  c.num_requests = R;
  c.num_sfs = M;
  c.num_categories = K;
  c.seed = seed;
  return c;
}

/// Instance drawn with the simulation's distributions, for given sizes.
inline SlotProblem sampled_problem(std::uint64_t seed, std::uint64_t round, std::size_t R, std::size_t M,
                                   std::size_t K = 5, ScoringMode mode = ScoringMode::raw) {
  return build_round_problem(sample_instance(sim_config(R, M, seed, K), round), mode);
}

}  // namespace crsf::test
