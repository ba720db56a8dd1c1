#pragma once

// Coupon-collector lower bound: while at least K type-A cards are still in
// their starting positions the deck lies in A_K, a set of small uniform mass.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bts/chain.hpp"
#include "bts/rng.hpp"

namespace bts {

// d(m), exact. Throws CapacityError for m > 20 (64-bit overflow).
std::uint64_t derangements(unsigned m);

/// Uniform probability that at least K of the n type-A cards are fixed
/// points of a permutation of 2n cards.
double uniform_mass_A_K(std::size_t n, std::size_t K);

// Number of type-A cards occupying their starting positions.
std::size_t fixed_type_a_count(const DeckState& deck, const BiasProfile& profile);

// E tau~_{n-K} = (2n / a)(H_n - H_K) in hand-picks. Requires K < n.
double coupon_expectation(std::size_t n, std::size_t K, double a);
// (2n / a)^2 pi^2 / 6.
double coupon_variance_bound(std::size_t n, double a);

struct TouchMilestone {
  std::uint64_t picks = 0;  // tau~: hand-picks until target A cards touched
  std::uint64_t steps = 0;  // tau: walk steps until the same event
};

/// Draws hands (right then left per step) until `target` distinct type-A
/// cards have been touched.
TouchMilestone simulate_touch(const BiasProfile& profile, std::size_t target,
                              Rng& rng);

// K = ceil(N^delta).
std::size_t threshold_from_delta(std::size_t deck_size, double delta);

struct AKEstimate {
  std::uint64_t t = 0;
  std::size_t K = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

/// Monte Carlo P^t(A_K) for each t of `t_grid`; every trial walks once to the
/// largest t and is sampled along the way.
std::vector<AKEstimate> simulate_A_K_curve(const BiasProfile& profile,
                                           std::span<const std::uint64_t> t_grid,
                                           std::size_t K, std::uint64_t trials,
                                           std::uint64_t seed,
                                           std::size_t workers = 0);

AKEstimate simulate_A_K(const BiasProfile& profile, std::uint64_t t,
                        std::size_t K, std::uint64_t trials, std::uint64_t seed,
                        std::size_t workers = 0);

struct LowerBoundPoint {
  AKEstimate estimate;
  double uniform_mass = 0.0;
  double bound = 0.0;   // |P^t(A_K) - U(A_K)|
  double std_error = 0.0;
};

LowerBoundPoint tv_lower_bound(const BiasProfile& profile, std::uint64_t t,
                               std::size_t K, std::uint64_t trials,
                               std::uint64_t seed, std::size_t workers = 0);

std::vector<LowerBoundPoint> tv_lower_bound_curve(
    const BiasProfile& profile, std::span<const std::uint64_t> t_grid,
    std::size_t K, std::uint64_t trials, std::uint64_t seed,
    std::size_t workers = 0);

}  // namespace bts
