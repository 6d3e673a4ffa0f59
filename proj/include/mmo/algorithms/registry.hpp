#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>

#include "mmo/algorithms/cpdea.hpp"
#include "mmo/algorithms/mmea_wi.hpp"
#include "mmo/algorithms/mo_ring_pso_scd.hpp"
#include "mmo/algorithms/omni_optimizer.hpp"

namespace mmo {

using AnyProblem = std::variant<FeatureSelectionProblem, LocationProblem, SyntheticTwoPsProblem>;

inline constexpr std::array<std::string_view, 4> kAlgorithmNames = {"omni", "mo_ring_pso_scd", "cpdea", "mmea_wi"};

/// Algorithms studied alongside the implemented ones but not provided here.
inline constexpr std::array<std::string_view, 3> kUnavailableAlgorithms = {"hrea", "mmoea_dc", "trimoea_tar"};

inline bool is_registered(std::string_view name) {
  for (auto n : kAlgorithmNames) {
    if (n == name) return true;
  }
  return false;
}

/// Throws NotImplementedError for anything outside `kAlgorithmNames`.
inline void require_registered(std::string_view name) {
  if (is_registered(name)) return;
  std::string msg = "algorithm '" + std::string(name) + "' is not implemented";
  msg += "; available: omni, mo_ring_pso_scd, cpdea, mmea_wi";
  msg += "; hrea, mmoea_dc and trimoea_tar are out of scope";
  throw NotImplementedError(msg);
}

template <MultiobjectiveProblem P>
RunResult run_algorithm(std::string_view name, const P& problem, const AlgorithmConfig& cfg, std::uint64_t seed) {
  require_registered(name);
  if (name == "omni") return run_omni_optimizer(problem, cfg, seed);
  if (name == "mo_ring_pso_scd") return run_mo_ring_pso_scd(problem, cfg, seed);
  if (name == "cpdea") return run_cpdea(problem, cfg, seed);
  return run_mmea_wi(problem, cfg, seed);
}

inline RunResult run_algorithm(std::string_view name, const AnyProblem& problem, const AlgorithmConfig& cfg,
                               std::uint64_t seed) {
  return std::visit([&](const auto& p) { return run_algorithm(name, p, cfg, seed); }, problem);
}

}  // namespace mmo
