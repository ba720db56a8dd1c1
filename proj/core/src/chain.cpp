#include "bts/chain.hpp"

#include <algorithm>
#include <string>

#include "bts/errors.hpp"

namespace bts {

BiasProfile BiasProfile::make(std::size_t n, double a) {
  detail::require(n >= 1, "n must be >= 1");
  detail::require(a > 0.0, "a must be > 0 (got " + std::to_string(a) + ")");
  detail::require(a <= 1.0, "a must be <= 1 so that a <= b = 2 - a (got " +
                                std::to_string(a) + ")");
  return BiasProfile(n, a);
}

DeckState DeckState::identity(std::size_t deck_size) {
  DeckState d;
  d.label_ = identity_perm(deck_size);
  d.position_ = d.label_;
  return d;
}

DeckState DeckState::from_perm(std::span<const std::uint32_t> position_to_label) {
  detail::require(is_bijection(position_to_label), "deck is not a permutation");
  DeckState d;
  d.label_.assign(position_to_label.begin(), position_to_label.end());
  d.position_ = inverse(d.label_);
  return d;
}

void DeckState::swap_cards(Card x, Card y) {
  const Position px = position_[x];
  const Position py = position_[y];
  label_[px] = y;
  label_[py] = x;
  position_[x] = py;
  position_[y] = px;
}

bool DeckState::valid() const {
  if (!is_bijection(label_) || position_.size() != label_.size()) return false;
  for (std::size_t p = 0; p < label_.size(); ++p)
    if (position_[label_[p]] != p) return false;
  return true;
}

Card sample_hand(const BiasProfile& profile, Rng& rng) {
  // P(type A) = n a / N = a / 2; uniform within the type.
  const double u = 2.0 * uniform01(rng);
  const auto n = static_cast<double>(profile.n());
  const auto last = static_cast<Card>(profile.n() - 1);
  if (u < profile.a()) {
    auto idx = static_cast<Card>(u / profile.a() * n);
    return std::min(idx, last);
  }
  auto idx = static_cast<Card>((u - profile.a()) / profile.b() * n);
  return static_cast<Card>(profile.n()) + std::min(idx, last);
}

MoveRecord draw_move(const BiasProfile& profile, Rng& rng, std::uint64_t t) {
  MoveRecord m;
  m.t = t;
  m.right = sample_hand(profile, rng);
  m.left = sample_hand(profile, rng);
  return m;
}

void apply_move(DeckState& deck, const MoveRecord& move) {
  if (!move.is_identity()) deck.swap_cards(move.right, move.left);
}

MoveRecord step(DeckState& deck, const BiasProfile& profile, Rng& rng, std::uint64_t t) {
  auto m = draw_move(profile, rng, t);
  apply_move(deck, m);
  return m;
}

double pair_probability(const BiasProfile& profile, Card i, Card j) {
  const auto N = profile.deck_size();
  detail::require(i < N && j < N, "pair_probability: label outside deck");
  return profile.hand_probability(i) * profile.hand_probability(j);
}

}  // namespace bts
