#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bts/chain.hpp"
#include "bts/errors.hpp"
#include "bts/rng.hpp"

using namespace bts;

namespace {

double four_sigma(double p, double n) { return 4.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(BiasProfile, HandProbabilities) {
  const auto uni = BiasProfile::make(2, 1.0);
  for (Card c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(uni.hand_probability(c), 0.25);

  const auto half = BiasProfile::make(2, 0.5);
  EXPECT_DOUBLE_EQ(half.hand_probability(0), 0.125);
  EXPECT_DOUBLE_EQ(half.hand_probability(1), 0.125);
  EXPECT_DOUBLE_EQ(half.hand_probability(2), 0.375);
  EXPECT_DOUBLE_EQ(half.hand_probability(3), 0.375);

  const auto single = BiasProfile::make(1, 0.2);
  EXPECT_NEAR(single.hand_probability(0), 0.1, 1e-15);
  EXPECT_NEAR(single.hand_probability(1), 0.9, 1e-15);
}

TEST(BiasProfile, ProbabilitiesSumToOne) {
  for (std::size_t n : {1u, 3u, 10u, 64u})
    for (double a : {0.01, 0.3, 0.5, 1.0}) {
      const auto p = BiasProfile::make(n, a);
      double sum = 0.0;
      for (Card c = 0; c < p.deck_size(); ++c) sum += p.hand_probability(c);
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_DOUBLE_EQ(p.a() + p.b(), 2.0);
    }
}

TEST(BiasProfile, RejectsInvalidParameters) {
  EXPECT_THROW(BiasProfile::make(0, 0.5), PreconditionError);
  EXPECT_THROW(BiasProfile::make(2, 0.0), PreconditionError);
  EXPECT_THROW(BiasProfile::make(2, -0.1), PreconditionError);
  EXPECT_THROW(BiasProfile::make(2, 1.5), PreconditionError);
  EXPECT_THROW(BiasProfile::make(2, std::nan("")), PreconditionError);
}

TEST(BiasProfile, CardTypes) {
  const auto p = BiasProfile::make(3, 0.4);
  EXPECT_EQ(p.type_of(0), CardType::A);
  EXPECT_EQ(p.type_of(2), CardType::A);
  EXPECT_EQ(p.type_of(3), CardType::B);
  EXPECT_EQ(p.type_of(5), CardType::B);
}

TEST(Chain, SampleHandFrequencies) {
  constexpr int kDraws = 1'000'000;
  for (double a : {1.0, 0.5}) {
    const auto p = BiasProfile::make(2, a);
    auto rng = trial_rng(kDefaultSeed, static_cast<std::uint64_t>(a * 10));
    std::vector<double> freq(4, 0.0);
    for (int i = 0; i < kDraws; ++i) freq[sample_hand(p, rng)] += 1.0;
    for (Card c = 0; c < 4; ++c) {
      const double q = p.hand_probability(c);
      EXPECT_NEAR(freq[c] / kDraws, q, four_sigma(q, kDraws)) << "a=" << a << " card " << c;
    }
  }
}

TEST(Chain, PairProbability) {
  const auto uni = BiasProfile::make(2, 1.0);
  EXPECT_DOUBLE_EQ(pair_probability(uni, 0, 3), 1.0 / 16.0);
  const auto half = BiasProfile::make(2, 0.5);
  EXPECT_DOUBLE_EQ(pair_probability(half, 0, 2), 0.046875);
  EXPECT_THROW(pair_probability(half, 0, 4), PreconditionError);

  for (double a : {0.2, 0.7, 1.0}) {
    const auto p = BiasProfile::make(4, a);
    double sum = 0.0;
    for (Card i = 0; i < 8; ++i)
      for (Card j = 0; j < 8; ++j) {
        sum += pair_probability(p, i, j);
        EXPECT_DOUBLE_EQ(pair_probability(p, i, j), pair_probability(p, j, i));
      }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Chain, OneStepLawFromIdentity) {
  constexpr int kSteps = 1'000'000;
  const auto uni = BiasProfile::make(2, 1.0);
  const auto half = BiasProfile::make(2, 0.5);
  auto rng = trial_rng(kDefaultSeed, 77);
  int stay_uni = 0, swap13_half = 0;
  for (int i = 0; i < kSteps; ++i) {
    auto deck = DeckState::identity(4);
    step(deck, uni, rng, 1);
    stay_uni += deck.perm() == identity_perm(4);
    auto deck2 = DeckState::identity(4);
    step(deck2, half, rng, 1);
    swap13_half += deck2.perm() == Perm{2, 1, 0, 3};
  }
  EXPECT_NEAR(static_cast<double>(stay_uni) / kSteps, 0.25, four_sigma(0.25, kSteps));
  EXPECT_NEAR(static_cast<double>(swap13_half) / kSteps, 0.09375,
              four_sigma(0.09375, kSteps));

  double identity_mass = 0.0;
  for (Card c = 0; c < 4; ++c) identity_mass += pair_probability(uni, c, c);
  EXPECT_DOUBLE_EQ(identity_mass, 0.25);
  EXPECT_DOUBLE_EQ(2.0 * pair_probability(half, 0, 2), 0.09375);
}

TEST(Chain, ScriptedMovesSwapCardsByLabel) {
  auto deck = DeckState::identity(4);
  apply_move(deck, MoveRecord{1, 0, 2});
  EXPECT_EQ(deck.perm(), (Perm{2, 1, 0, 3}));
  apply_move(deck, MoveRecord{2, 0, 3});
  EXPECT_EQ(deck.perm(), (Perm{2, 1, 3, 0}));
  EXPECT_EQ(deck.position_of(0), 3u);
  EXPECT_EQ(deck.label_at(2), 3u);
  apply_move(deck, MoveRecord{3, 1, 1});
  EXPECT_EQ(deck.perm(), (Perm{2, 1, 3, 0}));
}

TEST(Chain, StepsPreserveBijection) {
  const auto p = BiasProfile::make(4, 0.3);
  auto deck = DeckState::identity(8);
  auto rng = trial_rng(kDefaultSeed, 5);
  for (std::uint64_t t = 1; t <= 1'000'000; ++t) {
    step(deck, p, rng, t);
    if (t % 997 == 0) ASSERT_TRUE(deck.valid()) << "step " << t;
  }
  EXPECT_TRUE(deck.valid());
}

TEST(Chain, FromPermRejectsNonBijection) {
  const Perm bad{0, 0, 1};
  EXPECT_THROW(DeckState::from_perm(bad), PreconditionError);
}

TEST(Rng, StreamsAreReproducible) {
  auto r1 = trial_rng(42, 9);
  auto r2 = trial_rng(42, 9);
  auto r3 = trial_rng(42, 10);
  const auto x1 = r1();
  EXPECT_EQ(x1, r2());
  EXPECT_NE(x1, r3());
}
