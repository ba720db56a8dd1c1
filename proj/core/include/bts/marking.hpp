#pragma once

// Two-phase marking scheme whose completion time T_N is a strong uniform
// time for the biased transposition walk.
//
// Phase one (k < ceil(c1 N) marked): when both hands land on unmarked cards,
// mark the right-hand card with probability a^2 / (w(R) w(L)).
//
// Phase two: every unmarked card u owns an ordered pair (r(u), l(u)) of
// distinct marked cards, at least one of u's type. A step marks or moves a
// mark when
//   1. R = L = u unmarked           mark u w.p. a / w(u)
//   2. R = u unmarked, L marked     mark u w.p. a / w(L), else move L's mark to u
//   3. L = u unmarked, R marked     symmetric
//   4. (R, L) = (r(u), l(u))        mark u w.p. a w(u) / (w(R) w(L))
//
// Alongside the deck the state carries permutations phi (labels in marking
// order) and psi (their positions) with deck = phi ∘ psi^-1; the first k
// entries of phi are the marked cards.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bts/chain.hpp"
#include "bts/rng.hpp"
#include "bts/type_chain.hpp"

namespace bts {

enum class Phase : std::uint8_t { One, Two };

enum class MarkEvent : std::uint8_t { None, Marked, MarkMoved };

struct MarkingOptions {
  // (1 + 1 / 1.1) / 2, i.e. c1_from_epsilon(0.1).
  double c1 = 21.0 / 22.0;
  // Negative control: accept every marking attempt and never move a mark.
  // Breaks strong uniformity for a < 1.
  bool always_accept = false;
  // Check deck == phi ∘ psi^-1 after every step; throws on mismatch.
  bool verify_factorization = false;
  bool record_trajectory = false;
};

// c1 = (1 + 1 / (1 + eps)) / 2.
double c1_from_epsilon(double eps);

/// Injective map from unmarked cards to ordered pairs of distinct marked
/// cards.
class PairAssignment {
 public:
  PairAssignment() = default;
  explicit PairAssignment(std::size_t deck_size);

  // Throws InvariantViolation if (r, l) is already taken.
  void assign(Card u, Card r, Card l);

  // Drops every pair; cost proportional to the number assigned.
  void clear();

  std::optional<Card> owner(Card r, Card l) const;
  std::optional<std::pair<Card, Card>> pair_of(Card u) const;

  std::size_t deck_size() const noexcept { return deck_size_; }
  std::size_t size() const noexcept { return cards_.size(); }
  bool empty() const noexcept { return cards_.empty(); }
  std::span<const Card> cards() const noexcept { return cards_; }

 private:
  static constexpr Card kNone = ~Card{0};

  std::size_t deck_size_ = 0;
  std::vector<Card> owner_;   // deck_size^2, pair -> unmarked card
  std::vector<Card> first_;   // unmarked card -> r
  std::vector<Card> second_;  // unmarked card -> l
  std::vector<Card> cards_;   // assigned unmarked cards
};

class MarkingState {
 public:
  /// Fresh state at t = 0: identity deck, nothing marked.
  /// Requires 1/2 < c1 < 1.
  MarkingState(const BiasProfile& profile, MarkingOptions options);

  /// State at t = 0 with `marked_in_order` already marked (identity deck).
  /// Used to probe single steps from a chosen configuration.
  static MarkingState with_marked(const BiasProfile& profile,
                                  MarkingOptions options,
                                  std::span<const Card> marked_in_order);

  const BiasProfile& profile() const noexcept { return profile_; }
  const MarkingOptions& options() const noexcept { return options_; }
  std::uint64_t t() const noexcept { return t_; }
  const DeckState& deck() const noexcept { return deck_; }
  Phase phase() const noexcept { return phase_; }
  std::size_t threshold() const noexcept { return threshold_; }

  bool is_marked(Card c) const { return slot_[c] < k_; }
  std::size_t marked_count() const noexcept { return k_; }
  TypeCount counts() const noexcept { return {k_a_, k_b_}; }
  bool complete() const noexcept { return k_ == deck_.size(); }

  const Perm& phi() const noexcept { return phi_; }
  const Perm& psi() const noexcept { return psi_; }
  // phi(1..k): marked labels in marking order.
  std::span<const Card> mark_order() const {
    return std::span<const Card>(phi_).first(k_);
  }
  const PairAssignment& assignment() const noexcept { return assignment_; }

  // times()[k] is T_k, the first step at which k cards were marked.
  const std::vector<std::uint64_t>& times() const noexcept { return times_; }

  // deck == phi ∘ psi^-1.
  bool factorization_holds() const;

  // Invariants on counts, mark order, phase and assignment; throws
  // InvariantViolation on the first failure.
  void check_invariants() const;

 private:
  friend MarkEvent phase1_step(MarkingState&, const MoveRecord&, Rng&);
  friend MarkEvent phase2_step(MarkingState&, const MoveRecord&, Rng&);
  friend MarkEvent advance(MarkingState&, const MoveRecord&, Rng&);
  friend void fill_assignment(PairAssignment&, const MarkingState&);

  void swap_slots(std::size_t i, std::size_t j);
  void mark_at_next_slot(Card u);
  void move_mark(Card from, Card to);
  void after_marked_set_change();
  void count_card(Card c, int delta);

  BiasProfile profile_;
  MarkingOptions options_;
  std::uint64_t t_ = 0;
  DeckState deck_;
  Perm phi_;
  Perm psi_;
  Perm slot_;  // phi^-1
  std::size_t k_ = 0;
  std::size_t k_a_ = 0;
  std::size_t k_b_ = 0;
  std::size_t threshold_ = 0;
  Phase phase_ = Phase::One;
  PairAssignment assignment_;
  std::vector<std::uint64_t> times_;
};

/// Deterministic greedy assignment: unmarked cards in ascending label order;
/// r(u) is the lowest marked card of u's type that still has a free ordered
/// pair, l(u) the lowest marked card != r(u) completing a free pair.
/// Throws InvariantViolation if no pair is left for some card.
PairAssignment build_assignment(const MarkingState& ms);
// Same rule, reusing `out`'s storage.
void fill_assignment(PairAssignment& out, const MarkingState& ms);

// Phase-one rule for a move already applied to the deck.
MarkEvent phase1_step(MarkingState& ms, const MoveRecord& move, Rng& rng);
// Phase-two rule (cases 1-4) for a move already applied to the deck.
MarkEvent phase2_step(MarkingState& ms, const MoveRecord& move, Rng& rng);

/// Applies `move` to the deck, runs the rule of the current phase and
/// advances the clock. `move.t` is ignored.
MarkEvent advance(MarkingState& ms, const MoveRecord& move, Rng& rng);
MarkEvent advance(MarkingState& ms, Rng& rng);

/// Replays `moves` from the identity and compares the product with
/// phi ∘ psi^-1. Returns the number of positions that disagree.
std::size_t factorization_check(const MarkingState& ms,
                                std::span<const MoveRecord> moves);

struct TrajectoryPoint {
  std::uint64_t t = 0;
  TypeCount counts;
};

struct MarkingRunRecord {
  std::uint64_t t_phase1 = 0;
  std::uint64_t t_full = 0;
  DeckState final_deck;
  std::vector<std::uint64_t> times;
  std::vector<TrajectoryPoint> trajectory;  // filled if record_trajectory
};

struct StepObservation {
  std::uint64_t t = 0;  // step index, 1-based
  Phase phase = Phase::One;
  TypeCount before;
  TypeCount after;
  MarkEvent event = MarkEvent::None;
  const MarkingState* state = nullptr;  // after the step
};
using StepObserver = std::function<void(const StepObservation&)>;

// Step cap applied by run_to_full_marking: 10^4 N log N.
std::uint64_t marking_step_cap(std::size_t deck_size);

/// Runs walk + marking until every card is marked.
MarkingRunRecord run_to_full_marking(const BiasProfile& profile,
                                     const MarkingOptions& options, Rng& rng,
                                     const StepObserver& observer = {});

struct ConditionalUniformity {
  std::size_t m = 0;
  std::size_t classes_tested = 0;
  std::size_t classes_seen = 0;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  double min_class_p_value = 1.0;
};

struct UniformityReport {
  std::size_t deck_size = 0;
  std::uint64_t trials = 0;
  std::size_t cells = 0;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::vector<std::uint64_t> counts;  // final deck, by Lehmer rank
  ConditionalUniformity conditional;
};

struct UniformityOptions {
  MarkingOptions marking;
  // Size m of the conditional test; 0 picks ceil(c1 N) clamped to [1, N-1].
  std::size_t conditional_m = 0;
  std::size_t workers = 0;
};

/// Chi-square test of the deck at T_N against uniform on S_N, plus the
/// conditional arrangement test at the first time m cards are marked.
/// Requires N <= 8 and trials >= 100 N!.
UniformityReport uniformity_test(const BiasProfile& profile,
                                 const UniformityOptions& options,
                                 std::uint64_t trials, std::uint64_t seed);

struct ExactMarkingLaw {
  std::vector<double> deck_law;  // P(deck at T_N = sigma), by Lehmer rank
  double unabsorbed_mass = 0.0;  // mass not yet fully marked when stopped
  std::uint64_t steps = 0;
};

/// Exact law of the deck at the full-marking time, by forward propagation
/// over (deck, marked set) until the unabsorbed mass drops below `tolerance`.
/// Requires N <= 6.
ExactMarkingLaw exact_marking_law(const BiasProfile& profile, const MarkingOptions& options,
                                  double tolerance = 1e-15,
                                  std::uint64_t max_steps = 1u << 20);

}  // namespace bts
