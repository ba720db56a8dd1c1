#pragma once

// The absorbing chain K on (k_a, k_b), the numbers of marked type-A and
// type-B cards during the second marking phase, plus the bound evaluators
// used to sandwich the full marking time.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bts/chain.hpp"
#include "bts/rng.hpp"

namespace bts {

struct TypeCount {
  std::size_t k_a = 0;
  std::size_t k_b = 0;

  std::size_t total() const noexcept { return k_a + k_b; }
  friend bool operator==(const TypeCount&, const TypeCount&) = default;
  friend auto operator<=>(const TypeCount&, const TypeCount&) = default;
};

struct TransitionRow {
  double p_b_up = 0.0;  // (k_a, k_b + 1)
  double p_a_up = 0.0;  // (k_a + 1, k_b)
  double p_move = 0.0;  // (k_a + 1, k_b - 1)
  double p_stay = 1.0;

  double p_change() const noexcept { return p_b_up + p_a_up + p_move; }
};

/// Dense (n + 1) x (n + 1) table over TypeCount.
template <class T>
class CountGrid {
 public:
  CountGrid() = default;
  CountGrid(std::size_t n, T fill) : n_(n), cells_((n + 1) * (n + 1), fill) {}

  std::size_t n() const noexcept { return n_; }
  T& at(std::size_t k_a, std::size_t k_b) { return cells_[k_a * (n_ + 1) + k_b]; }
  const T& at(std::size_t k_a, std::size_t k_b) const {
    return cells_[k_a * (n_ + 1) + k_b];
  }
  T& operator[](TypeCount c) { return at(c.k_a, c.k_b); }
  const T& operator[](TypeCount c) const { return at(c.k_a, c.k_b); }

 private:
  std::size_t n_ = 0;
  std::vector<T> cells_;
};

TransitionRow k_transitions(std::size_t n, double a, TypeCount s);

// Rate at which k_a increases: p_a_up + p_move.
double a_rate(std::size_t n, double a, TypeCount s);

/// Expected steps to reach (n, n) from every state under the exact rows.
CountGrid<double> expected_absorption_table(std::size_t n, double a);
double expected_absorption(std::size_t n, double a, TypeCount start);

/// Steps for one simulated trajectory of K from `start` to (n, n).
std::uint64_t simulate_type_chain(std::size_t n, double a, TypeCount start,
                                  Rng& rng);

/// The normalised recurrence built from the lower-bounded rates;
/// (n / (a (2 c1 - 1))) * s~ bounds the expected absorption time from above
/// in the regime k_a + k_b >= 2 c1 n. The move term is dropped on the
/// k_b = 0 edge, where no marked B card exists to lose its mark.
CountGrid<double> s_tilde_table(std::size_t n, double a, double c1);

double harmonic_number(std::size_t m);

struct ConjectureRow {
  std::size_t n = 0;
  double c1 = 0.0;
  double a = 0.0;
  double weighted_sum = 0.0;
  double harmonic = 0.0;
  double ratio = 0.0;
};

/// Binomial(d, 1/2)-weighted average of s~ over the starts with
/// d = (1 - c1) 2n unmarked cards, reported next to H(d).
/// Requires d to be a positive integer and c1 > 1/2.
ConjectureRow harmonic_conjecture_probe(std::size_t n, double c1, double a);

// (pi^2 / 6) N^2 / (a^4 c1^2).
double variance_bound(std::size_t deck_size, double a, double c1);

// (n / (a (2 c1 - 1))) [log 2n + log log 2n + const_term], n = N / 2.
double phase2_upper_bound(std::size_t deck_size, double a, double c1,
                          double const_term);

// Index ceil(c1 N) at which the second marking phase begins.
std::size_t phase_two_threshold(std::size_t deck_size, double c1);

/// Exact E[T_N] for the marking scheme: the phase-one geometric waits plus
/// the K absorption time averaged over the hypergeometric split of the
/// ceil(c1 N) cards marked when phase two starts.
double expected_full_marking_time(const BiasProfile& profile, double c1);

// Expected length of phase one alone: sum_{k < ceil(c1 N)} 1 / p_k.
double expected_phase_one_time(const BiasProfile& profile, double c1);

}  // namespace bts
