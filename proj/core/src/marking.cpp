#include "bts/marking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "bts/errors.hpp"
#include "bts/exact.hpp"
#include "bts/parallel.hpp"
#include "bts/permutation.hpp"
#include "bts/stats.hpp"

namespace bts {

double c1_from_epsilon(double eps) {
  detail::require(eps > 0.0, "eps must be > 0");
  return 0.5 * (1.0 + 1.0 / (1.0 + eps));
}

// ---------------------------------------------------------------------------
// PairAssignment

PairAssignment::PairAssignment(std::size_t deck_size)
    : deck_size_(deck_size),
      owner_(deck_size * deck_size, kNone),
      first_(deck_size, kNone),
      second_(deck_size, kNone) {}

void PairAssignment::assign(Card u, Card r, Card l) {
  detail::ensure(u < deck_size_ && r < deck_size_ && l < deck_size_,
                 "assign: card outside deck");
  detail::ensure(r != l, "assign: pair must use two distinct cards");
  detail::ensure(first_[u] == kNone, "assign: card already has a pair");
  auto& slot = owner_[r * deck_size_ + l];
  detail::ensure(slot == kNone, "assign: ordered pair already taken");
  slot = u;
  first_[u] = r;
  second_[u] = l;
  cards_.push_back(u);
}

void PairAssignment::clear() {
  for (Card u : cards_) {
    owner_[first_[u] * deck_size_ + second_[u]] = kNone;
    first_[u] = second_[u] = kNone;
  }
  cards_.clear();
}

std::optional<Card> PairAssignment::owner(Card r, Card l) const {
  if (r >= deck_size_ || l >= deck_size_) return std::nullopt;
  const Card u = owner_[r * deck_size_ + l];
  if (u == kNone) return std::nullopt;
  return u;
}

std::optional<std::pair<Card, Card>> PairAssignment::pair_of(Card u) const {
  if (u >= deck_size_ || first_[u] == kNone) return std::nullopt;
  return std::pair{first_[u], second_[u]};
}

// ---------------------------------------------------------------------------
// MarkingState

MarkingState::MarkingState(const BiasProfile& profile, MarkingOptions options)
    : profile_(profile),
      options_(options),
      deck_(DeckState::identity(profile.deck_size())),
      phi_(identity_perm(profile.deck_size())),
      psi_(phi_),
      slot_(phi_),
      threshold_(0),
      assignment_(profile.deck_size()),
      times_{0} {
  detail::require(options.c1 > 0.5 && options.c1 < 1.0, "c1 must lie in (1/2, 1)");
  threshold_ = phase_two_threshold(profile.deck_size(), options.c1);
}

MarkingState MarkingState::with_marked(const BiasProfile& profile, MarkingOptions options,
                                       std::span<const Card> marked_in_order) {
  MarkingState ms(profile, options);
  for (Card c : marked_in_order) {
    detail::require(c < profile.deck_size(), "with_marked: card outside deck");
    detail::require(!ms.is_marked(c), "with_marked: card listed twice");
    ms.swap_slots(ms.k_, ms.slot_[c]);
    ++ms.k_;
    ms.count_card(c, +1);
    ms.times_.push_back(0);
  }
  if (ms.k_ >= ms.threshold_) {
    ms.phase_ = Phase::Two;
    if (!ms.complete()) fill_assignment(ms.assignment_, ms);
  }
  return ms;
}

void MarkingState::swap_slots(std::size_t i, std::size_t j) {
  if (i == j) return;
  std::swap(phi_[i], phi_[j]);
  std::swap(psi_[i], psi_[j]);
  slot_[phi_[i]] = static_cast<std::uint32_t>(i);
  slot_[phi_[j]] = static_cast<std::uint32_t>(j);
}

void MarkingState::count_card(Card c, int delta) {
  auto& counter = profile_.type_of(c) == CardType::A ? k_a_ : k_b_;
  counter = static_cast<std::size_t>(static_cast<long long>(counter) + delta);
}

void MarkingState::mark_at_next_slot(Card u) {
  swap_slots(k_, slot_[u]);
  ++k_;
  count_card(u, +1);
  times_.push_back(t_);
  after_marked_set_change();
}

void MarkingState::move_mark(Card from, Card to) {
  // `to` takes over the slot of `from` in the marking order.
  swap_slots(slot_[from], slot_[to]);
  count_card(from, -1);
  count_card(to, +1);
  after_marked_set_change();
}

void MarkingState::after_marked_set_change() {
  if (phase_ == Phase::One && k_ >= threshold_) phase_ = Phase::Two;
  if (phase_ == Phase::Two) {
    if (complete())
      assignment_.clear();
    else
      fill_assignment(assignment_, *this);
  }
}

bool MarkingState::factorization_holds() const {
  for (std::size_t i = 0; i < phi_.size(); ++i)
    if (deck_.label_at(psi_[i]) != phi_[i]) return false;
  return true;
}

void MarkingState::check_invariants() const {
  const std::size_t N = deck_.size();
  const std::size_t n = profile_.n();
  detail::ensure(deck_.valid(), "deck is not a permutation");
  detail::ensure(is_bijection(phi_) && is_bijection(psi_), "phi or psi is not a permutation");
  detail::ensure(k_ == k_a_ + k_b_ && k_a_ <= n && k_b_ <= n, "marked counts inconsistent");
  std::size_t a_seen = 0;
  for (std::size_t i = 0; i < N; ++i) {
    detail::ensure(slot_[phi_[i]] == i, "slot index out of sync with phi");
    if (i < k_ && profile_.type_of(phi_[i]) == CardType::A) ++a_seen;
  }
  detail::ensure(a_seen == k_a_, "k_a disagrees with mark order");
  detail::ensure((phase_ == Phase::Two) == (k_ >= threshold_), "phase disagrees with k");
  detail::ensure(times_.size() == k_ + 1, "marking times out of sync");
  detail::ensure(factorization_holds(), "deck != phi o psi^-1");

  if (phase_ == Phase::Two) {
    detail::ensure(assignment_.size() == N - k_, "assignment does not cover unmarked cards");
    for (Card u = 0; u < N; ++u) {
      const auto pr = assignment_.pair_of(u);
      if (is_marked(u)) {
        detail::ensure(!pr.has_value(), "marked card owns a pair");
        continue;
      }
      detail::ensure(pr.has_value(), "unmarked card without a pair");
      const auto [r, l] = *pr;
      detail::ensure(r != l && is_marked(r) && is_marked(l), "pair must be two marked cards");
      detail::ensure(profile_.type_of(r) == profile_.type_of(u) ||
                         profile_.type_of(l) == profile_.type_of(u),
                     "pair has no card of the owner's type");
      detail::ensure(assignment_.owner(r, l) == u, "pair map is not injective");
    }
  }
}

void fill_assignment(PairAssignment& out, const MarkingState& ms) {
  const auto& profile = ms.profile();
  const std::size_t N = profile.deck_size();
  if (out.deck_size() != N) out = PairAssignment(N);
  out.clear();
  if (ms.complete()) return;

  std::vector<Card> marked;
  std::vector<Card> marked_of_type[2];
  marked.reserve(ms.marked_count());
  for (Card c = 0; c < N; ++c) {
    if (!ms.is_marked(c)) continue;
    marked.push_back(c);
    marked_of_type[profile.type_of(c) == CardType::A ? 0 : 1].push_back(c);
  }

  for (Card u = 0; u < N; ++u) {
    if (ms.is_marked(u)) continue;
    bool placed = false;
    for (Card r : marked_of_type[profile.type_of(u) == CardType::A ? 0 : 1]) {
      for (Card l : marked) {
        if (l == r || out.owner(r, l)) continue;
        out.assign(u, r, l);
        placed = true;
        break;
      }
      if (placed) break;
    }
    if (!placed)
      throw InvariantViolation("pair assignment infeasible for card " + std::to_string(u + 1) +
                               " with k = " + std::to_string(ms.marked_count()));
  }
}

PairAssignment build_assignment(const MarkingState& ms) {
  PairAssignment out(ms.profile().deck_size());
  fill_assignment(out, ms);
  return out;
}

// ---------------------------------------------------------------------------
// Steps

namespace {

bool accept(const MarkingState& ms, double ratio, Rng& rng) {
  detail::ensure(ratio >= 0.0 && ratio <= 1.0 + 1e-12, "acceptance ratio outside [0, 1]");
  if (ms.options().always_accept) return true;
  return uniform01(rng) < ratio;
}

}  // namespace

MarkEvent phase1_step(MarkingState& ms, const MoveRecord& move, Rng& rng) {
  detail::ensure(ms.phase_ == Phase::One, "phase1_step outside phase one");
  const Card R = move.right;
  const Card L = move.left;
  const std::size_t r_slot = ms.slot_[R];
  const std::size_t l_slot = ms.slot_[L];
  const std::size_t k = ms.k_;
  const auto& p = ms.profile_;

  if (r_slot >= k && l_slot >= k &&
      accept(ms, p.a() * p.a() / (p.weight(R) * p.weight(L)), rng)) {
    // psi <- psi (k L*); phi <- phi (k R*) or phi (k R*)(R* L*).
    std::swap(ms.psi_[k], ms.psi_[l_slot]);
    std::swap(ms.phi_[k], ms.phi_[r_slot]);
    if (r_slot != k && l_slot != k && r_slot != l_slot)
      std::swap(ms.phi_[r_slot], ms.phi_[l_slot]);
    for (std::size_t i : {k, r_slot, l_slot}) ms.slot_[ms.phi_[i]] = static_cast<std::uint32_t>(i);
    ++ms.k_;
    ms.count_card(R, +1);
    ms.times_.push_back(ms.t_);
    ms.after_marked_set_change();
    return MarkEvent::Marked;
  }

  std::swap(ms.psi_[r_slot], ms.psi_[l_slot]);
  return MarkEvent::None;
}

MarkEvent phase2_step(MarkingState& ms, const MoveRecord& move, Rng& rng) {
  detail::ensure(ms.phase_ == Phase::Two, "phase2_step outside phase two");
  const Card R = move.right;
  const Card L = move.left;
  const auto& p = ms.profile_;

  // The move itself: psi <- psi (R* L*). Marking events below only permute
  // slots, which leaves phi ∘ psi^-1 unchanged.
  std::swap(ms.psi_[ms.slot_[R]], ms.psi_[ms.slot_[L]]);

  const bool r_marked = ms.is_marked(R);
  const bool l_marked = ms.is_marked(L);

  if (R == L) {
    if (!r_marked && accept(ms, p.a() / p.weight(R), rng)) {
      ms.mark_at_next_slot(R);
      return MarkEvent::Marked;
    }
    return MarkEvent::None;
  }

  if (r_marked != l_marked) {
    const Card u = r_marked ? L : R;
    const Card m = r_marked ? R : L;
    if (accept(ms, p.a() / p.weight(m), rng)) {
      ms.mark_at_next_slot(u);
      return MarkEvent::Marked;
    }
    ms.move_mark(m, u);
    return MarkEvent::MarkMoved;
  }

  if (r_marked && l_marked) {
    if (const auto u = ms.assignment_.owner(R, L)) {
      if (accept(ms, p.a() * p.weight(*u) / (p.weight(R) * p.weight(L)), rng)) {
        ms.mark_at_next_slot(*u);
        return MarkEvent::Marked;
      }
    }
  }
  return MarkEvent::None;
}

MarkEvent advance(MarkingState& ms, const MoveRecord& move, Rng& rng) {
  const std::size_t N = ms.deck_.size();
  detail::require(move.right < N && move.left < N, "advance: card outside deck");
  detail::ensure(!ms.complete(), "advance: marking already complete");
  ++ms.t_;
  apply_move(ms.deck_, move);
  const MarkEvent ev =
      ms.phase_ == Phase::One ? phase1_step(ms, move, rng) : phase2_step(ms, move, rng);
  if (ms.options_.verify_factorization && !ms.factorization_holds())
    throw InvariantViolation("deck != phi o psi^-1 at t = " + std::to_string(ms.t_));
  return ev;
}

MarkEvent advance(MarkingState& ms, Rng& rng) {
  const auto move = draw_move(ms.profile(), rng, ms.t() + 1);
  return advance(ms, move, rng);
}

std::size_t factorization_check(const MarkingState& ms, std::span<const MoveRecord> moves) {
  auto deck = DeckState::identity(ms.deck().size());
  for (const auto& m : moves) apply_move(deck, m);
  const auto psi_inv = inverse(ms.psi());
  const auto product = compose(ms.phi(), psi_inv);
  std::size_t mismatches = 0;
  for (std::size_t x = 0; x < product.size(); ++x)
    if (product[x] != deck.label_at(static_cast<Position>(x))) ++mismatches;
  return mismatches;
}

std::uint64_t marking_step_cap(std::size_t deck_size) {
  const auto N = static_cast<double>(deck_size);
  return static_cast<std::uint64_t>(std::ceil(1e4 * N * std::log(std::max(N, 2.0))));
}

MarkingRunRecord run_to_full_marking(const BiasProfile& profile, const MarkingOptions& options,
                                     Rng& rng, const StepObserver& observer) {
  MarkingState ms(profile, options);
  MarkingRunRecord rec;
  const auto cap = marking_step_cap(profile.deck_size());
  if (options.record_trajectory) rec.trajectory.push_back({0, ms.counts()});

  while (!ms.complete()) {
    if (ms.t() >= cap)
      throw InvariantViolation("marking did not finish within " + std::to_string(cap) +
                               " steps (k = " + std::to_string(ms.marked_count()) + ")");
    const TypeCount before = ms.counts();
    const Phase phase = ms.phase();
    const MarkEvent ev = advance(ms, rng);
    const TypeCount after = ms.counts();
    if (options.record_trajectory && after != before) rec.trajectory.push_back({ms.t(), after});
    if (observer) observer({ms.t(), phase, before, after, ev, &ms});
  }

  rec.times = ms.times();
  rec.t_full = rec.times.back();
  rec.t_phase1 = rec.times[std::min(ms.threshold(), profile.deck_size())];
  rec.final_deck = ms.deck();
  return rec;
}

// ---------------------------------------------------------------------------
// Uniformity

namespace {

// Key of the conditioning class (label set, position set) and the rank of the
// induced arrangement in S_m.
struct ArrangementSample {
  std::uint64_t key = 0;
  std::uint64_t rank = 0;
};

ArrangementSample arrangement_of(const MarkingState& ms, const PermutationIndex& small) {
  const std::size_t N = ms.deck().size();
  std::uint64_t label_mask = 0, position_mask = 0;
  for (Card c : ms.mark_order()) {
    label_mask |= std::uint64_t{1} << c;
    position_mask |= std::uint64_t{1} << ms.deck().position_of(c);
  }
  // Walk marked positions in increasing order and record the relative rank of
  // the label found there among the marked labels.
  Perm arrangement;
  arrangement.reserve(ms.marked_count());
  for (Position p = 0; p < N; ++p) {
    if (!(position_mask >> p & 1)) continue;
    const Card c = ms.deck().label_at(p);
    const auto below = label_mask & ((std::uint64_t{1} << c) - 1);
    arrangement.push_back(static_cast<std::uint32_t>(__builtin_popcountll(below)));
  }
  return {label_mask << N | position_mask, small.rank(arrangement)};
}

}  // namespace

UniformityReport uniformity_test(const BiasProfile& profile, const UniformityOptions& options,
                                 std::uint64_t trials, std::uint64_t seed) {
  const std::size_t N = profile.deck_size();
  detail::require(N <= kExactDeckCap, "uniformity_test: deck too large for a full S_N histogram");
  const PermutationIndex index(static_cast<unsigned>(N));
  detail::require(trials >= 100 * index.size(),
                  "uniformity_test: need at least 100 N! = " + std::to_string(100 * index.size()) +
                      " trials");

  std::size_t m = options.conditional_m;
  if (m == 0) m = std::clamp<std::size_t>(phase_two_threshold(N, options.marking.c1), 1, N - 1);
  detail::require(m >= 1 && m < N, "conditional size m must lie in [1, N - 1]");
  const PermutationIndex small(static_cast<unsigned>(m));

  const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;
  std::vector<std::vector<std::uint64_t>> hist(workers, std::vector<std::uint64_t>(index.size(), 0));
  std::vector<std::map<std::uint64_t, std::vector<std::uint64_t>>> cond(workers);

  MarkingOptions mopts = options.marking;
  mopts.record_trajectory = false;
  parallel_blocks(trials, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = trial_rng(seed, i);
      auto observer = [&](const StepObservation& obs) {
        if (obs.after.total() == m && obs.before.total() + 1 == m) {
          const auto s = arrangement_of(*obs.state, small);
          auto& cell = cond[w][s.key];
          if (cell.empty()) cell.assign(small.size(), 0);
          ++cell[s.rank];
        }
      };
      const auto rec = run_to_full_marking(profile, mopts, rng, observer);
      ++hist[w][index.rank(rec.final_deck.perm())];
    }
  });

  UniformityReport rep;
  rep.deck_size = N;
  rep.trials = trials;
  rep.cells = index.size();
  rep.counts.assign(index.size(), 0);
  for (const auto& h : hist)
    for (std::size_t c = 0; c < h.size(); ++c) rep.counts[c] += h[c];
  const auto fit = stats::uniform_fit(rep.counts);
  rep.statistic = fit.statistic;
  rep.dof = fit.dof;
  rep.p_value = fit.p_value;

  std::map<std::uint64_t, std::vector<std::uint64_t>> merged;
  for (const auto& part : cond)
    for (const auto& [key, counts] : part) {
      auto& cell = merged[key];
      if (cell.empty()) cell.assign(counts.size(), 0);
      for (std::size_t r = 0; r < counts.size(); ++r) cell[r] += counts[r];
    }
  auto& cu = rep.conditional;
  cu.m = m;
  cu.classes_seen = merged.size();
  const std::uint64_t min_samples = 50 * small.size();
  for (const auto& [key, counts] : merged) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total < min_samples || counts.size() < 2) continue;
    const auto f = stats::uniform_fit(counts);
    ++cu.classes_tested;
    cu.statistic += f.statistic;
    cu.dof += f.dof;
    cu.min_class_p_value = std::min(cu.min_class_p_value, f.p_value);
  }
  cu.p_value = stats::chi_square_survival(cu.statistic, cu.dof);
  return rep;
}

}  // namespace bts

namespace bts {

ExactMarkingLaw exact_marking_law(const BiasProfile& profile, const MarkingOptions& options,
                                  double tolerance, std::uint64_t max_steps) {
  const std::size_t N = profile.deck_size();
  detail::require(N <= 6, "exact_marking_law: deck too large (N <= 6)");
  detail::require(options.c1 > 0.5 && options.c1 < 1.0, "c1 must lie in (1/2, 1)");
  const PermutationIndex index(static_cast<unsigned>(N));
  const std::size_t perms = index.size();
  const std::size_t masks = std::size_t{1} << N;
  const std::size_t full = masks - 1;
  const std::size_t threshold = phase_two_threshold(N, options.c1);
  const double a = profile.a();

  // after[s * N * N + R * N + L]: deck rank once cards R and L swap.
  std::vector<std::uint32_t> after(perms * N * N);
  {
    Perm p(N);
    for (std::size_t s = 0; s < perms; ++s) {
      index.unrank(s, p);
      for (Card R = 0; R < N; ++R)
        for (Card L = 0; L < N; ++L) {
          auto q = p;
          if (R != L) {
            const auto pr = std::find(q.begin(), q.end(), R) - q.begin();
            const auto pl = std::find(q.begin(), q.end(), L) - q.begin();
            std::swap(q[pr], q[pl]);
          }
          after[(s * N + R) * N + L] = static_cast<std::uint32_t>(index.rank(q));
        }
    }
  }

  // Pair owners for every marked set that can occur in phase two.
  std::vector<std::vector<int>> owner(masks);
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) < threshold) continue;
    std::vector<Card> marked;
    for (Card c = 0; c < N; ++c)
      if (mask >> c & 1) marked.push_back(c);
    const auto ms = MarkingState::with_marked(profile, options, marked);
    owner[mask].assign(N * N, -1);
    for (Card r = 0; r < N; ++r)
      for (Card l = 0; l < N; ++l)
        if (const auto u = ms.assignment().owner(r, l)) owner[mask][r * N + l] = static_cast<int>(*u);
  }

  auto ratio = [&](double x) { return options.always_accept ? 1.0 : x; };

  ExactMarkingLaw out;
  out.deck_law.assign(perms, 0.0);
  std::vector<double> cur(perms * masks, 0.0), next(perms * masks, 0.0);
  cur[0] = 1.0;  // identity deck, nothing marked
  const double N2 = static_cast<double>(N * N);

  for (out.steps = 0; out.steps < max_steps; ++out.steps) {
    std::fill(next.begin(), next.end(), 0.0);
    double live = 0.0;
    for (std::size_t s = 0; s < perms; ++s) {
      for (std::size_t mask = 0; mask < full; ++mask) {
        const double mass = cur[s * masks + mask];
        if (mass == 0.0) continue;
        const auto k = static_cast<std::size_t>(__builtin_popcountll(mask));
        for (Card R = 0; R < N; ++R)
          for (Card L = 0; L < N; ++L) {
            const double pm = mass * profile.weight(R) * profile.weight(L) / N2;
            const std::size_t d = after[(s * N + R) * N + L];
            auto put = [&](std::size_t new_mask, double p) {
              if (p <= 0.0) return;
              if (new_mask == full)
                out.deck_law[d] += pm * p;
              else
                next[d * masks + new_mask] += pm * p;
            };
            const bool rm = mask >> R & 1;
            const bool lm = mask >> L & 1;
            const std::size_t bitR = std::size_t{1} << R;
            if (k < threshold) {
              if (!rm && !lm) {
                const double acc = ratio(a * a / (profile.weight(R) * profile.weight(L)));
                put(mask | bitR, acc);
                put(mask, 1.0 - acc);
              } else {
                put(mask, 1.0);
              }
              continue;
            }
            if (R == L) {
              if (rm) {
                put(mask, 1.0);
              } else {
                const double acc = ratio(a / profile.weight(R));
                put(mask | bitR, acc);
                put(mask, 1.0 - acc);
              }
            } else if (rm != lm) {
              const Card u = rm ? L : R;
              const Card m = rm ? R : L;
              const std::size_t bit_u = std::size_t{1} << u;
              const std::size_t bit_m = std::size_t{1} << m;
              const double acc = ratio(a / profile.weight(m));
              put(mask | bit_u, acc);
              put((mask & ~bit_m) | bit_u, 1.0 - acc);
            } else if (rm && lm && owner[mask][R * N + L] >= 0) {
              const auto u = static_cast<Card>(owner[mask][R * N + L]);
              const double acc =
                  ratio(a * profile.weight(u) / (profile.weight(R) * profile.weight(L)));
              put(mask | (std::size_t{1} << u), acc);
              put(mask, 1.0 - acc);
            } else {
              put(mask, 1.0);
            }
          }
      }
    }
    cur.swap(next);
    for (double v : cur) live += v;
    out.unabsorbed_mass = live;
    if (live < tolerance) {
      ++out.steps;
      break;
    }
  }
  return out;
}

}  // namespace bts
