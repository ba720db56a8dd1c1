#pragma once

// Exact evolution of the walk's law on S_N for small decks.
//
// Distributions are dense vectors indexed by Lehmer rank (identity = 0).
// The one-step operator is applied as a gather over the N(N-1)/2
// transpositions; only the neighbour indices are tabulated.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bts/chain.hpp"
#include "bts/permutation.hpp"

namespace bts {

inline constexpr unsigned kExactDeckCap = 8;

class TransitionOperator {
 public:
  // Throws CapacityError when the deck exceeds `deck_cap` (itself capped at
  // kExactDeckCap).
  explicit TransitionOperator(const BiasProfile& profile,
                              unsigned deck_cap = kExactDeckCap);

  const BiasProfile& profile() const noexcept { return profile_; }
  const PermutationIndex& index() const noexcept { return index_; }
  std::size_t state_count() const noexcept { return states_; }
  std::size_t transposition_count() const noexcept { return weights_.size(); }

  // out = in * P. Deterministic for any worker count.
  void apply(std::span<const double> in, std::span<double> out,
             std::size_t workers = 1) const;
  std::vector<double> apply(std::span<const double> in,
                            std::size_t workers = 1) const;

  // One-step probability from state `from` to state `to`.
  double flow(std::size_t from, std::size_t to) const;

  double identity_mass() const noexcept { return identity_weight_; }

 private:
  BiasProfile profile_;
  PermutationIndex index_;
  std::size_t states_;
  std::vector<double> weights_;              // 2 p_i p_j per transposition
  std::vector<std::uint32_t> pair_i_;        // transposition -> i
  std::vector<std::uint32_t> pair_j_;        // transposition -> j
  std::vector<std::uint32_t> neighbours_;    // states_ x transpositions
  double identity_weight_ = 0.0;
};

TransitionOperator build_operator(const BiasProfile& profile,
                                  unsigned deck_cap = kExactDeckCap);

std::vector<double> point_mass(std::size_t states, std::size_t at = 0);
std::vector<double> uniform_distribution(std::size_t states);

std::vector<double> evolve(std::vector<double> dist,
                           const TransitionOperator& op, std::uint64_t steps,
                           std::size_t workers = 1);

double tv_distance(std::span<const double> dist);
double separation_distance(std::span<const double> dist);

enum class Metric { TotalVariation, Separation };

struct DistancePoint {
  std::uint64_t t = 0;
  double tv = 0.0;
  double sep = 0.0;
};
using DistanceCurve = std::vector<DistancePoint>;

/// Smallest t such that the distance of P^t(identity, .) is <= eps.
/// Throws InvariantViolation if not reached within `max_steps`.
std::uint64_t mixing_time(const TransitionOperator& op, double eps,
                          Metric metric, std::uint64_t max_steps = 1u << 20,
                          std::size_t workers = 1);

struct MixingTimes {
  std::uint64_t tv = 0;
  std::uint64_t separation = 0;
};
MixingTimes mixing_times(const TransitionOperator& op, double eps,
                         std::uint64_t max_steps = 1u << 20,
                         std::size_t workers = 1);

/// Both distances at every t in `t_list` (any order, duplicates allowed),
/// starting from the identity. Output follows the order of `t_list`.
DistanceCurve cutoff_profile(const TransitionOperator& op,
                             std::span<const std::uint64_t> t_list,
                             std::size_t workers = 1);

}  // namespace bts
