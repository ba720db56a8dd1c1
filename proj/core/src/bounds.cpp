#include "bts/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bts/errors.hpp"
#include "bts/parallel.hpp"
#include "bts/stats.hpp"
#include "bts/type_chain.hpp"

namespace bts {

std::uint64_t derangements(unsigned m) {
  if (m > 20)
    throw CapacityError("derangements: d(" + std::to_string(m) + ") overflows 64 bits");
  std::uint64_t prev = 1;  // d(0)
  std::uint64_t cur = 0;   // d(1)
  if (m == 0) return prev;
  for (unsigned i = 2; i <= m; ++i) {
    const std::uint64_t next = (i - 1) * (cur + prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

double uniform_mass_A_K(std::size_t n, std::size_t K) {
  detail::require(K <= n, "uniform_mass_A_K: K must be <= n");
  if (K == 0) return 1.0;
  const auto N = static_cast<double>(2 * n);
  // P(exactly k of the n A cards fixed) by inclusion-exclusion over the
  // remaining n - k:  C(n,k) sum_j (-1)^j C(n-k, j) (N-k-j)! / N!.
  // Summing the upper tail directly keeps tiny masses accurate.
  double tail = 0.0;
  double t0 = 1.0;  // C(n, k) (N - k)! / N!
  for (std::size_t k = 0; k <= n; ++k) {
    if (k > 0)
      t0 *= static_cast<double>(n - k + 1) /
            (static_cast<double>(k) * (N - static_cast<double>(k - 1)));
    if (k < K) continue;
    double term = t0;
    double sum = 0.0;
    for (std::size_t j = 0; j <= n - k; ++j) {
      sum += (j % 2 == 0) ? term : -term;
      // T_{j+1} / T_j = (n - k - j) / ((j + 1)(N - k - j))
      term *= static_cast<double>(n - k - j) /
              (static_cast<double>(j + 1) * (N - static_cast<double>(k + j)));
    }
    tail += sum;
  }
  return std::clamp(tail, 0.0, 1.0);
}

std::size_t fixed_type_a_count(const DeckState& deck, const BiasProfile& profile) {
  std::size_t fixed = 0;
  for (Card c = 0; c < profile.n(); ++c)
    if (deck.position_of(c) == c) ++fixed;
  return fixed;
}

double coupon_expectation(std::size_t n, std::size_t K, double a) {
  detail::require(K < n, "coupon_expectation: K must be < n");
  detail::require(a > 0.0 && a <= 1.0, "a must lie in (0, 1]");
  return 2.0 * static_cast<double>(n) / a * (harmonic_number(n) - harmonic_number(K));
}

double coupon_variance_bound(std::size_t n, double a) {
  detail::require(a > 0.0 && a <= 1.0, "a must lie in (0, 1]");
  const double scale = 2.0 * static_cast<double>(n) / a;
  return scale * scale * std::numbers::pi * std::numbers::pi / 6.0;
}

TouchMilestone simulate_touch(const BiasProfile& profile, std::size_t target, Rng& rng) {
  detail::require(target <= profile.n(), "simulate_touch: target exceeds n");
  std::vector<std::uint8_t> touched(profile.n(), 0);
  std::size_t count = 0;
  TouchMilestone out;
  auto touch = [&](Card c) {
    ++out.picks;
    if (c < profile.n() && !touched[c]) {
      touched[c] = 1;
      ++count;
    }
    return count >= target;
  };
  if (target == 0) return out;
  // Walk step by step; the hands of step t are picks 2t - 1 (right) and 2t.
  for (std::uint64_t t = 1;; ++t) {
    const auto mv = draw_move(profile, rng, t);
    if (touch(mv.right) || touch(mv.left)) {
      out.steps = t;
      return out;
    }
  }
}

std::size_t threshold_from_delta(std::size_t deck_size, double delta) {
  detail::require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(deck_size), delta) - 1e-9));
}

std::vector<AKEstimate> simulate_A_K_curve(const BiasProfile& profile,
                                           std::span<const std::uint64_t> t_grid, std::size_t K,
                                           std::uint64_t trials, std::uint64_t seed,
                                           std::size_t workers) {
  detail::require(K <= profile.n(), "simulate_A_K: K must be <= n");
  detail::require(trials >= 1, "simulate_A_K: need at least one trial");
  const std::size_t n = profile.n();
  const std::size_t N = profile.deck_size();

  std::vector<std::uint64_t> sorted(t_grid.begin(), t_grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  if (workers == 0) workers = default_workers();
  std::vector<std::vector<std::uint64_t>> hits(workers, std::vector<std::uint64_t>(sorted.size(), 0));

  parallel_blocks(trials, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
    auto deck = DeckState::identity(N);
    for (std::size_t trial = begin; trial < end; ++trial) {
      Rng rng = trial_rng(seed, trial);
      deck = DeckState::identity(N);
      std::size_t fixed = n;
      std::uint64_t now = 0;
      auto is_home_a = [&](Card c) { return c < n && deck.position_of(c) == c; };
      for (std::size_t g = 0; g < sorted.size(); ++g) {
        for (; now < sorted[g]; ++now) {
          const auto mv = draw_move(profile, rng, now + 1);
          if (mv.is_identity()) continue;
          fixed -= static_cast<std::size_t>(is_home_a(mv.right)) +
                   static_cast<std::size_t>(is_home_a(mv.left));
          deck.swap_cards(mv.right, mv.left);
          fixed += static_cast<std::size_t>(is_home_a(mv.right)) +
                   static_cast<std::size_t>(is_home_a(mv.left));
        }
        if (fixed >= K) ++hits[w][g];
      }
    }
  });

  std::vector<AKEstimate> by_t(sorted.size());
  for (std::size_t g = 0; g < sorted.size(); ++g) {
    std::uint64_t total = 0;
    for (const auto& h : hits) total += h[g];
    const double p = static_cast<double>(total) / static_cast<double>(trials);
    by_t[g] = {sorted[g], K, p, stats::binomial_stderr(p, static_cast<double>(trials)), trials};
  }
  std::vector<AKEstimate> out;
  out.reserve(t_grid.size());
  for (auto t : t_grid) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
    out.push_back(by_t[static_cast<std::size_t>(it - sorted.begin())]);
  }
  return out;
}

AKEstimate simulate_A_K(const BiasProfile& profile, std::uint64_t t, std::size_t K,
                        std::uint64_t trials, std::uint64_t seed, std::size_t workers) {
  const std::uint64_t grid[] = {t};
  return simulate_A_K_curve(profile, grid, K, trials, seed, workers).front();
}

std::vector<LowerBoundPoint> tv_lower_bound_curve(const BiasProfile& profile,
                                                  std::span<const std::uint64_t> t_grid,
                                                  std::size_t K, std::uint64_t trials,
                                                  std::uint64_t seed, std::size_t workers) {
  const double u = uniform_mass_A_K(profile.n(), K);
  std::vector<LowerBoundPoint> out;
  for (const auto& est : simulate_A_K_curve(profile, t_grid, K, trials, seed, workers))
    out.push_back({est, u, std::abs(est.estimate - u), est.std_error});
  return out;
}

LowerBoundPoint tv_lower_bound(const BiasProfile& profile, std::uint64_t t, std::size_t K,
                               std::uint64_t trials, std::uint64_t seed, std::size_t workers) {
  const std::uint64_t grid[] = {t};
  return tv_lower_bound_curve(profile, grid, K, trials, seed, workers).front();
}

}  // namespace bts
