#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bts/chain.hpp"
#include "bts/errors.hpp"
#include "bts/exact.hpp"
#include "bts/rng.hpp"
#include "oracles.hpp"

using namespace bts;

namespace {

std::vector<double> weights_of(const BiasProfile& p) {
  std::vector<double> w(p.deck_size());
  for (Card c = 0; c < w.size(); ++c) w[c] = p.weight(c);
  return w;
}

std::size_t rank_of(const TransitionOperator& op, const Perm& p) { return op.index().rank(p); }

}  // namespace

TEST(Exact, OneStepFromIdentityUniformWeights) {
  const auto op = build_operator(BiasProfile::make(2, 1.0));
  ASSERT_EQ(op.state_count(), 24u);
  const auto d = op.apply(point_mass(24));
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  double tr_mass = 0.0;
  for (Card i = 0; i < 4; ++i)
    for (Card j = i + 1; j < 4; ++j) {
      Perm p = identity_perm(4);
      std::swap(p[i], p[j]);
      EXPECT_DOUBLE_EQ(d[rank_of(op, p)], 0.125);
      tr_mass += d[rank_of(op, p)];
    }
  EXPECT_DOUBLE_EQ(tr_mass + d[0], 1.0);
  EXPECT_NEAR(tv_distance(d), 17.0 / 24.0, 1e-15);
  EXPECT_DOUBLE_EQ(separation_distance(d), 1.0);
}

TEST(Exact, TwoCardDeck) {
  const auto op = build_operator(BiasProfile::make(1, 0.5));
  const auto d = op.apply(point_mass(2));
  EXPECT_DOUBLE_EQ(d[0], 0.625);
  EXPECT_DOUBLE_EQ(d[1], 0.375);
}

TEST(Exact, UniformIsStationary) {
  for (double a : {1.0, 0.5, 0.2}) {
    const auto op = build_operator(BiasProfile::make(3, a));
    const auto u = uniform_distribution(op.state_count());
    const auto v = evolve(u, op, 5);
    EXPECT_LT(tv_distance(v), 1e-13);
    EXPECT_LT(separation_distance(v), 1e-12);
  }
}

TEST(Exact, DistancesAtTimeZero) {
  const auto op = build_operator(BiasProfile::make(2, 0.5));
  const auto d = point_mass(24);
  EXPECT_NEAR(tv_distance(d), 23.0 / 24.0, 1e-15);
  EXPECT_DOUBLE_EQ(separation_distance(d), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(uniform_distribution(24)), 0.0);
  EXPECT_DOUBLE_EQ(separation_distance(uniform_distribution(24)), 0.0);
  EXPECT_EQ(evolve(d, op, 0), d);
}

TEST(Exact, MatchesDenseMatrixPowers) {
  for (double a : {1.0, 0.5, 0.25}) {
    const auto profile = BiasProfile::make(2, a);
    const auto op = build_operator(profile);
    const auto P = oracle::dense_kernel(weights_of(profile));
    std::vector<double> ref = point_mass(24);
    std::vector<double> got = point_mass(24);
    for (int t = 1; t <= 6; ++t) {
      ref = oracle::row_times(ref, P);
      got = op.apply(got);
      for (std::size_t s = 0; s < 24; ++s)
        EXPECT_NEAR(got[s], ref[s], 1e-10) << "a=" << a << " t=" << t << " s=" << s;
    }
  }
}

TEST(Exact, KernelIsSymmetric) {
  const auto op = build_operator(BiasProfile::make(3, 0.3));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, op.state_count() - 1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = pick(rng);
    const auto y = pick(rng);
    EXPECT_DOUBLE_EQ(op.flow(x, y), op.flow(y, x));
  }
  Perm p = identity_perm(6);
  const auto x = rank_of(op, p);
  std::swap(p[1], p[4]);
  const auto y = rank_of(op, p);
  EXPECT_GT(op.flow(x, y), 0.0);
  EXPECT_DOUBLE_EQ(op.flow(x, y), op.flow(y, x));
}

TEST(Exact, RowsSumToOne) {
  const auto op = build_operator(BiasProfile::make(3, 0.4));
  for (std::size_t s : {0u, 17u, 719u}) {
    double sum = 0.0;
    for (std::size_t y = 0; y < op.state_count(); ++y) sum += op.flow(s, y);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Exact, AgreesWithSimulation) {
  constexpr int kRuns = 1'000'000;
  constexpr int kT = 3;
  const auto profile = BiasProfile::make(2, 0.5);
  const auto op = build_operator(profile);
  const auto law = evolve(point_mass(24), op, kT);
  std::vector<double> hits(24, 0.0);
  for (int r = 0; r < kRuns; ++r) {
    auto rng = trial_rng(kDefaultSeed, static_cast<std::uint64_t>(r));
    auto deck = DeckState::identity(4);
    for (int t = 1; t <= kT; ++t) step(deck, profile, rng, static_cast<std::uint64_t>(t));
    hits[rank_of(op, deck.perm())] += 1.0;
  }
  for (std::size_t s = 0; s < 24; ++s) {
    const double p = law[s];
    const double se = std::sqrt(p * (1.0 - p) / kRuns);
    EXPECT_NEAR(hits[s] / kRuns, p, 5.0 * se + 1e-12) << "state " << s;
  }
}

TEST(Exact, CapacityIsEnforced) {
  EXPECT_THROW(build_operator(BiasProfile::make(5, 0.5)), CapacityError);
  EXPECT_THROW(build_operator(BiasProfile::make(3, 0.5), 4), CapacityError);
}

TEST(Exact, MixingTimes) {
  const auto op = build_operator(BiasProfile::make(2, 0.5));
  EXPECT_EQ(mixing_time(op, 23.0 / 24.0 + 1e-12, Metric::TotalVariation), 0u);
  for (double eps : {0.5, 0.25, 0.1, 0.01}) {
    const auto m = mixing_times(op, eps);
    EXPECT_LE(m.tv, m.separation) << eps;
    EXPECT_EQ(m.tv, mixing_time(op, eps, Metric::TotalVariation));
    const auto at = evolve(point_mass(24), op, m.tv);
    EXPECT_LE(tv_distance(at), eps);
    const auto before = evolve(point_mass(24), op, m.tv - 1);
    EXPECT_GT(tv_distance(before), eps);
  }
}

TEST(Exact, BiasSlowsMixing) {
  const auto fair = build_operator(BiasProfile::make(3, 1.0));
  const auto biased = build_operator(BiasProfile::make(3, 0.5));
  EXPECT_GT(mixing_time(biased, 0.25, Metric::TotalVariation),
            mixing_time(fair, 0.25, Metric::TotalVariation));
}

TEST(Exact, CutoffProfile) {
  const auto op = build_operator(BiasProfile::make(2, 1.0));
  const std::vector<std::uint64_t> ts{0, 1, 2, 4, 8, 16, 32};
  const auto curve = cutoff_profile(op, ts);
  ASSERT_EQ(curve.size(), ts.size());
  EXPECT_NEAR(curve[0].tv, 23.0 / 24.0, 1e-15);
  EXPECT_DOUBLE_EQ(curve[0].sep, 1.0);
  EXPECT_NEAR(curve[1].tv, 17.0 / 24.0, 1e-15);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_EQ(curve[i].t, ts[i]);
    EXPECT_LE(curve[i].tv, curve[i - 1].tv + 1e-15);
    EXPECT_LE(curve[i].sep, curve[i - 1].sep + 1e-15);
    EXPECT_LE(curve[i].tv, curve[i].sep + 1e-15);
  }
}

TEST(Exact, ParallelApplyIsBitIdentical) {
  const auto op = build_operator(BiasProfile::make(3, 0.35));
  const auto one = evolve(point_mass(op.state_count()), op, 7, 1);
  const auto three = evolve(point_mass(op.state_count()), op, 7, 3);
  EXPECT_EQ(one, three);
}
