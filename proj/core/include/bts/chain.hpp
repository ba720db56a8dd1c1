#pragma once

// The biased transposition walk on S_N, N = 2n.
//
// Each step two hands independently pick a card; card c is picked with
// probability weight(c) / N where weight is a for the n type-A cards and
// b = 2 - a for the n type-B cards. The two picked cards swap positions
// (nothing happens when both hands pick the same card), so the ordered
// transposition (i j) has probability p_i p_j and the identity sum_i p_i^2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bts/permutation.hpp"
#include "bts/rng.hpp"

namespace bts {

enum class CardType : std::uint8_t { A, B };

/// Law of the walk. Cards 0..n-1 are type A (weight a), n..2n-1 type B
/// (weight b). Weights are stored undivided; hand probabilities are
/// weight / N.
class BiasProfile {
 public:
  /// Requires n >= 1 and 0 < a <= 1.
  static BiasProfile make(std::size_t n, double a);

  std::size_t n() const noexcept { return n_; }
  std::size_t deck_size() const noexcept { return 2 * n_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  CardType type_of(Card c) const noexcept {
    return c < n_ ? CardType::A : CardType::B;
  }
  double weight(Card c) const noexcept { return c < n_ ? a_ : b_; }
  double weight_of(CardType t) const noexcept {
    return t == CardType::A ? a_ : b_;
  }
  double hand_probability(Card c) const noexcept {
    return weight(c) / static_cast<double>(deck_size());
  }

 private:
  BiasProfile(std::size_t n, double a) : n_(n), a_(a), b_(2.0 - a) {}

  std::size_t n_;
  double a_;
  double b_;
};

/// Arrangement of the deck: label_at(position) and its inverse.
class DeckState {
 public:
  DeckState() = default;
  static DeckState identity(std::size_t deck_size);
  // Throws PreconditionError if `position_to_label` is not a bijection.
  static DeckState from_perm(std::span<const std::uint32_t> position_to_label);

  std::size_t size() const noexcept { return label_.size(); }
  Card label_at(Position p) const { return label_[p]; }
  Position position_of(Card c) const { return position_[c]; }
  const Perm& perm() const noexcept { return label_; }

  // Exchange the positions of cards x and y (no-op when x == y).
  void swap_cards(Card x, Card y);

  bool valid() const;

  friend bool operator==(const DeckState&, const DeckState&) = default;

 private:
  Perm label_;     // position -> label
  Perm position_;  // label -> position
};

struct MoveRecord {
  std::uint64_t t = 0;
  Card right = 0;
  Card left = 0;

  bool is_identity() const noexcept { return right == left; }
  friend bool operator==(const MoveRecord&, const MoveRecord&) = default;
};

Card sample_hand(const BiasProfile& profile, Rng& rng);

// Draws the two hands for step t without touching any deck.
MoveRecord draw_move(const BiasProfile& profile, Rng& rng, std::uint64_t t);

void apply_move(DeckState& deck, const MoveRecord& move);

// One step of the walk: draw_move followed by apply_move.
MoveRecord step(DeckState& deck, const BiasProfile& profile, Rng& rng,
                std::uint64_t t);

/// Ordered pair probability p_i p_j. Throws PreconditionError when a label
/// is outside the deck.
double pair_probability(const BiasProfile& profile, Card i, Card j);

}  // namespace bts
