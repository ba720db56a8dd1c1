#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bts/errors.hpp"
#include "bts/marking.hpp"
#include "bts/rng.hpp"
#include "bts/stats.hpp"
#include "bts/type_chain.hpp"

using namespace bts;

namespace {

MarkingOptions opts(double c1) {
  MarkingOptions o;
  o.c1 = c1;
  return o;
}

// Repeats one scripted move from a fixed starting state and returns the
// frequency of each outcome.
struct Outcomes {
  double marked = 0.0;
  double moved = 0.0;
  double none = 0.0;
};

Outcomes repeat_move(const MarkingState& start, MoveRecord move, int reps, std::uint64_t seed) {
  Outcomes o;
  auto rng = trial_rng(seed, 0);
  for (int i = 0; i < reps; ++i) {
    auto ms = start;
    switch (advance(ms, move, rng)) {
      case MarkEvent::Marked: o.marked += 1.0; break;
      case MarkEvent::MarkMoved: o.moved += 1.0; break;
      case MarkEvent::None: o.none += 1.0; break;
    }
    ms.check_invariants();
  }
  o.marked /= reps;
  o.moved /= reps;
  o.none /= reps;
  return o;
}

double four_sigma(double p, double n) { return 4.0 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(Marking, FreshStateFactorsTrivially) {
  const MarkingState ms(BiasProfile::make(3, 0.5), opts(0.75));
  EXPECT_EQ(ms.phi(), identity_perm(6));
  EXPECT_EQ(ms.psi(), identity_perm(6));
  EXPECT_EQ(ms.marked_count(), 0u);
  EXPECT_EQ(ms.phase(), Phase::One);
  EXPECT_EQ(ms.threshold(), 5u);
  EXPECT_TRUE(ms.factorization_holds());
  ms.check_invariants();
}

TEST(Marking, RejectsBadC1) {
  EXPECT_THROW(MarkingState(BiasProfile::make(2, 0.5), opts(0.5)), PreconditionError);
  EXPECT_THROW(MarkingState(BiasProfile::make(2, 0.5), opts(1.0)), PreconditionError);
  EXPECT_NEAR(c1_from_epsilon(1.0), 0.75, 1e-15);
}

TEST(Marking, PhaseOneUnbiasedMarksRightHand) {
  const MarkingState start(BiasProfile::make(2, 1.0), opts(0.9));
  auto ms = start;
  auto rng = trial_rng(1, 1);
  EXPECT_EQ(advance(ms, MoveRecord{1, 0, 3}, rng), MarkEvent::Marked);
  EXPECT_EQ(ms.marked_count(), 1u);
  ASSERT_EQ(ms.mark_order().size(), 1u);
  EXPECT_EQ(ms.mark_order()[0], 0u);
  EXPECT_EQ(ms.times()[1], 1u);
  // One marked hand never marks in phase one.
  EXPECT_EQ(advance(ms, MoveRecord{2, 0, 2}, rng), MarkEvent::None);
  ms.check_invariants();
}

TEST(Marking, PhaseOneAcceptanceForTwoHeavyCards) {
  const MarkingState start(BiasProfile::make(2, 0.5), opts(0.9));
  constexpr int kReps = 100'000;
  const auto o = repeat_move(start, MoveRecord{1, 2, 3}, kReps, 11);
  EXPECT_NEAR(o.marked, 1.0 / 9.0, four_sigma(1.0 / 9.0, kReps));
  EXPECT_EQ(o.moved, 0.0);
}

TEST(Marking, PhaseTwoSingleUnmarkedHand) {
  const auto profile = BiasProfile::make(2, 0.5);
  const std::vector<Card> marked{0, 2, 3};
  const auto start = MarkingState::with_marked(profile, opts(0.6), marked);
  ASSERT_EQ(start.phase(), Phase::Two);
  constexpr int kReps = 100'000;

  // Partner is a heavy marked card: mark with probability a/b, else move.
  const auto o = repeat_move(start, MoveRecord{1, 1, 2}, kReps, 12);
  EXPECT_NEAR(o.marked, 1.0 / 3.0, four_sigma(1.0 / 3.0, kReps));
  EXPECT_NEAR(o.moved, 2.0 / 3.0, four_sigma(2.0 / 3.0, kReps));

  // Partner is a light marked card: always mark.
  const auto o2 = repeat_move(start, MoveRecord{1, 0, 1}, 1000, 13);
  EXPECT_EQ(o2.marked, 1.0);
}

TEST(Marking, MarkMoveTransfersTheSlot) {
  const auto profile = BiasProfile::make(2, 0.5);
  const std::vector<Card> marked{0, 2, 3};
  const auto start = MarkingState::with_marked(profile, opts(0.6), marked);
  auto rng = trial_rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    auto ms = start;
    if (advance(ms, MoveRecord{1, 1, 2}, rng) != MarkEvent::MarkMoved) continue;
    EXPECT_TRUE(ms.is_marked(1));
    EXPECT_FALSE(ms.is_marked(2));
    EXPECT_EQ(ms.marked_count(), 3u);
    EXPECT_EQ((ms.counts()), (TypeCount{2, 1}));
    EXPECT_EQ(ms.mark_order()[1], 1u);
    ms.check_invariants();
    return;
  }
  FAIL() << "no mark move observed";
}

TEST(Marking, PhaseTwoSameCardBothHands) {
  const auto profile = BiasProfile::make(2, 0.5);
  const std::vector<Card> marked{0, 1, 2};
  const auto start = MarkingState::with_marked(profile, opts(0.6), marked);
  constexpr int kReps = 100'000;
  const auto o = repeat_move(start, MoveRecord{1, 3, 3}, kReps, 14);
  EXPECT_NEAR(o.marked, 1.0 / 3.0, four_sigma(1.0 / 3.0, kReps));
  EXPECT_EQ(o.moved, 0.0);
}

TEST(Marking, PhaseTwoAssignedPair) {
  const auto profile = BiasProfile::make(2, 0.5);
  {
    const std::vector<Card> marked{0, 1, 2};
    const auto start = MarkingState::with_marked(profile, opts(0.6), marked);
    const auto pr = start.assignment().pair_of(3);
    ASSERT_TRUE(pr.has_value());
    EXPECT_EQ(pr->first, 2u);
    EXPECT_EQ(pr->second, 0u);
    // Pair weights b*a against owner weight b: ratio one.
    const auto o = repeat_move(start, MoveRecord{1, 2, 0}, 1000, 15);
    EXPECT_EQ(o.marked, 1.0);
    // Reversed order is not an assigned pair.
    const auto o2 = repeat_move(start, MoveRecord{1, 0, 2}, 1000, 16);
    EXPECT_EQ(o2.none, 1.0);
  }
  {
    const std::vector<Card> marked{1, 2, 3};
    const auto start = MarkingState::with_marked(profile, opts(0.6), marked);
    const auto pr = start.assignment().pair_of(0);
    ASSERT_TRUE(pr.has_value());
    EXPECT_EQ(pr->first, 1u);
    EXPECT_EQ(pr->second, 2u);
    constexpr int kReps = 100'000;
    const auto o = repeat_move(start, MoveRecord{1, 1, 2}, kReps, 17);
    EXPECT_NEAR(o.marked, 1.0 / 3.0, four_sigma(1.0 / 3.0, kReps));
  }
}

TEST(Marking, PhaseTwoIgnoresTwoUnmarkedHands) {
  const auto profile = BiasProfile::make(4, 0.5);
  const std::vector<Card> marked{0, 1, 2, 4, 5, 6};
  const auto start = MarkingState::with_marked(profile, opts(0.75), marked);
  ASSERT_EQ(start.phase(), Phase::Two);
  const auto o = repeat_move(start, MoveRecord{1, 3, 7}, 1000, 18);
  EXPECT_EQ(o.none, 1.0);
}

TEST(Marking, GreedyAssignment) {
  const auto profile = BiasProfile::make(4, 0.5);
  const std::vector<Card> marked{0, 1, 2, 4, 5, 6};
  const auto ms = MarkingState::with_marked(profile, opts(0.75), marked);
  const auto pa = build_assignment(ms);
  EXPECT_EQ(pa.size(), 2u);
  EXPECT_EQ(pa.pair_of(3), (std::pair<Card, Card>{0, 1}));
  EXPECT_EQ(pa.pair_of(7), (std::pair<Card, Card>{4, 0}));
  EXPECT_EQ(pa.owner(0, 1), 3u);
  EXPECT_EQ(pa.owner(4, 0), 7u);
  EXPECT_FALSE(pa.owner(1, 0).has_value());
  EXPECT_FALSE(pa.pair_of(0).has_value());
}

TEST(Marking, InfeasibleAssignmentIsReported) {
  const auto profile = BiasProfile::make(2, 0.5);
  const std::vector<Card> marked{2, 3};
  const auto ms = MarkingState::with_marked(profile, opts(0.9), marked);
  EXPECT_EQ(ms.phase(), Phase::One);
  EXPECT_THROW(build_assignment(ms), InvariantViolation);
}

TEST(Marking, FactorizationHoldsAlongTrajectories) {
  const auto profile = BiasProfile::make(3, 0.5);
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; steps < 1000 || seed < 20; ++seed) {
    auto o = opts(0.6);
    o.verify_factorization = true;
    MarkingState ms(profile, o);
    auto rng = trial_rng(99, seed);
    std::vector<MoveRecord> moves;
    while (!ms.complete()) {
      const auto move = draw_move(profile, rng, ms.t() + 1);
      advance(ms, move, rng);
      moves.push_back(move);
      ASSERT_EQ(factorization_check(ms, moves), 0u) << "seed " << seed << " t " << ms.t();
      ms.check_invariants();
      ++steps;
    }
  }
}

TEST(Marking, InvariantsUnderRandomRuns) {
  for (double a : {0.3, 0.5, 1.0}) {
    const auto profile = BiasProfile::make(4, a);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      MarkingState ms(profile, opts(0.75));
      auto rng = trial_rng(seed, 3);
      while (!ms.complete()) {
        advance(ms, rng);
        ms.check_invariants();
      }
      EXPECT_EQ(ms.times().size(), 9u);
      EXPECT_TRUE(std::is_sorted(ms.times().begin(), ms.times().end()));
    }
  }
}

TEST(Marking, UnbiasedRunsNeverMoveMarks) {
  const auto profile = BiasProfile::make(4, 1.0);
  std::size_t moves = 0;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
    auto rng = trial_rng(seed, 4);
    run_to_full_marking(profile, opts(0.6), rng, [&](const StepObservation& obs) {
      moves += obs.event == MarkEvent::MarkMoved;
    });
  }
  EXPECT_EQ(moves, 0u);
}

TEST(Marking, TwoCardDeck) {
  const auto profile = BiasProfile::make(1, 0.3);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto rng = trial_rng(seed, 5);
    const auto rec = run_to_full_marking(profile, opts(0.75), rng);
    EXPECT_LE(rec.t_phase1, rec.t_full);
    EXPECT_EQ(rec.times.size(), 3u);
    EXPECT_EQ(rec.times.back(), rec.t_full);
  }
}

TEST(Marking, MeanFullMarkingTime) {
  constexpr int kRuns = 100'000;
  for (double a : {1.0, 0.5}) {
    const auto profile = BiasProfile::make(2, a);
    std::vector<double> t;
    t.reserve(kRuns);
    for (int r = 0; r < kRuns; ++r) {
      auto rng = trial_rng(kDefaultSeed, static_cast<std::uint64_t>(r));
      t.push_back(static_cast<double>(run_to_full_marking(profile, opts(0.6), rng).t_full));
    }
    const auto m = stats::moments(t);
    EXPECT_NEAR(m.mean, expected_full_marking_time(profile, 0.6), 4.0 * m.stderr_mean) << a;
  }
}

TEST(Marking, PhaseOneWaitingTimeIsGeometric) {
  constexpr int kRuns = 100'000;
  const auto profile = BiasProfile::make(3, 0.5);
  const double p = std::pow(0.5 * 5.0 / 6.0, 2);
  constexpr std::size_t kBins = 30;
  std::vector<std::uint64_t> hist(kBins, 0);
  for (int r = 0; r < kRuns; ++r) {
    auto rng = trial_rng(kDefaultSeed, static_cast<std::uint64_t>(r));
    const auto rec = run_to_full_marking(profile, opts(0.9), rng);
    const auto gap = rec.times[2] - rec.times[1];
    ++hist[std::min<std::size_t>(gap - 1, kBins - 1)];
  }
  std::vector<double> prob(kBins);
  for (std::size_t j = 0; j + 1 < kBins; ++j) prob[j] = p * std::pow(1.0 - p, double(j));
  prob[kBins - 1] = std::pow(1.0 - p, double(kBins - 1));
  EXPECT_GT(stats::goodness_of_fit(hist, prob).p_value, 1e-3);
}

TEST(Marking, ObserverSeesEveryStep) {
  const auto profile = BiasProfile::make(3, 0.5);
  auto rng = trial_rng(1, 2);
  std::uint64_t last = 0;
  std::size_t marks = 0;
  const auto rec = run_to_full_marking(profile, opts(0.75), rng, [&](const StepObservation& o) {
    EXPECT_EQ(o.t, last + 1);
    last = o.t;
    marks += o.event == MarkEvent::Marked;
    EXPECT_EQ(o.after.total(), o.state->marked_count());
  });
  EXPECT_EQ(last, rec.t_full);
  EXPECT_EQ(marks, 6u);
}

TEST(Marking, ExactLawIsUniformWhenUnbiased) {
  const auto law = exact_marking_law(BiasProfile::make(2, 1.0), opts(0.6));
  ASSERT_EQ(law.deck_law.size(), 24u);
  EXPECT_LT(law.unabsorbed_mass, 1e-14);
  for (double p : law.deck_law) EXPECT_NEAR(p * 24.0, 1.0, 1e-12);
}

TEST(Marking, ExactLawDeviationWhenBiased) {
  // Reference values from an independent absorbing-chain solve.
  const auto dev = [](const ExactMarkingLaw& law) {
    double worst = 0.0;
    for (double p : law.deck_law) worst = std::max(worst, std::abs(24.0 * p - 1.0));
    return worst;
  };
  const auto profile = BiasProfile::make(2, 0.5);
  const auto two_phase = exact_marking_law(profile, opts(0.6));
  double total = 0.0;
  for (double p : two_phase.deck_law) total += p;
  EXPECT_NEAR(total, 1.0, 1e-13);
  EXPECT_NEAR(dev(two_phase), 0.00328434087944407, 1e-10);
  EXPECT_NEAR(dev(exact_marking_law(BiasProfile::make(2, 0.25), opts(0.6))),
              0.0007743631804133511, 1e-10);
  EXPECT_NEAR(dev(exact_marking_law(profile, opts(0.9))), 0.000536214154911896, 1e-10);
}

TEST(Marking, ExactLawAgreesWithSimulation) {
  for (bool control : {false, true}) {
    auto o = opts(0.6);
    o.always_accept = control;
    const auto profile = BiasProfile::make(2, 0.5);
    const auto law = exact_marking_law(profile, o);
    UniformityOptions u;
    u.marking = o;
    u.workers = 1;
    const auto rep = uniformity_test(profile, u, 200'000, 21);
    EXPECT_GT(stats::goodness_of_fit(rep.counts, law.deck_law).p_value, 1e-3) << control;
  }
}

TEST(Marking, UniformityTestPreconditions) {
  UniformityOptions u;
  EXPECT_THROW(uniformity_test(BiasProfile::make(2, 0.5), u, 100, 1), PreconditionError);
  EXPECT_THROW(uniformity_test(BiasProfile::make(5, 0.5), u, 1'000'000'000, 1), PreconditionError);
}

TEST(Marking, UniformityReportShape) {
  UniformityOptions u;
  u.marking = opts(0.6);
  u.workers = 2;
  const auto rep = uniformity_test(BiasProfile::make(2, 1.0), u, 20'000, 3);
  EXPECT_EQ(rep.cells, 24u);
  EXPECT_EQ(rep.counts.size(), 24u);
  EXPECT_DOUBLE_EQ(rep.dof, 23.0);
  std::uint64_t sum = 0;
  for (auto c : rep.counts) sum += c;
  EXPECT_EQ(sum, 20'000u);
  u.workers = 1;
  const auto again = uniformity_test(BiasProfile::make(2, 1.0), u, 20'000, 3);
  EXPECT_EQ(rep.counts, again.counts);
}
