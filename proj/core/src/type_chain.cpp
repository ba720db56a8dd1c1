#include "bts/type_chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bts/errors.hpp"

namespace bts {

namespace {

void check_count(std::size_t n, TypeCount s) {
  detail::require(s.k_a <= n && s.k_b <= n,
                  "type count (" + std::to_string(s.k_a) + ", " + std::to_string(s.k_b) +
                      ") outside [0, " + std::to_string(n) + "]^2");
}

void check_a(double a) {
  detail::require(a > 0.0 && a <= 1.0, "a must lie in (0, 1]");
}

void check_c1(double c1) {
  detail::require(c1 > 0.5 && c1 < 1.0, "c1 must lie in (1/2, 1)");
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

TransitionRow k_transitions(std::size_t n, double a, TypeCount s) {
  check_a(a);
  check_count(n, s);
  const double b = 2.0 - a;
  const double N2 = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  const double free_a = static_cast<double>(n - s.k_a);
  const double free_b = static_cast<double>(n - s.k_b);
  const double k1 = static_cast<double>(s.total() + 1);

  TransitionRow row;
  row.p_b_up = 2.0 * a * b * free_b * k1 / N2;
  row.p_a_up = 2.0 * a * a * free_a * k1 / N2;
  row.p_move = 2.0 * a * (b - a) * free_a * static_cast<double>(s.k_b) / N2;
  row.p_stay = 1.0 - row.p_change();
  return row;
}

double a_rate(std::size_t n, double a, TypeCount s) {
  check_a(a);
  check_count(n, s);
  const double b = 2.0 - a;
  const double N2 = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  return 2.0 * a * static_cast<double>(n - s.k_a) *
         (a * static_cast<double>(s.k_a) + b * static_cast<double>(s.k_b) + a) / N2;
}

CountGrid<double> expected_absorption_table(std::size_t n, double a) {
  check_a(a);
  detail::require(n >= 1, "n must be >= 1");
  CountGrid<double> E(n, 0.0);
  // (k_a + k_b) never decreases and the move step keeps the total but raises
  // k_a, so sweeping totals downward and k_a downward is a topological order.
  for (std::size_t total = 2 * n; total-- > 0;) {
    const std::size_t lo = total > n ? total - n : 0;
    const std::size_t hi = std::min(total, n);
    for (std::size_t k_a = hi + 1; k_a-- > lo;) {
      const TypeCount s{k_a, total - k_a};
      const auto row = k_transitions(n, a, s);
      const double q = row.p_change();
      detail::ensure(q > 0.0, "expected_absorption: non-absorbing state with no exit");
      double acc = 1.0;
      if (row.p_b_up > 0) acc += row.p_b_up * E.at(s.k_a, s.k_b + 1);
      if (row.p_a_up > 0) acc += row.p_a_up * E.at(s.k_a + 1, s.k_b);
      if (row.p_move > 0) acc += row.p_move * E.at(s.k_a + 1, s.k_b - 1);
      E[s] = acc / q;
    }
  }
  return E;
}

double expected_absorption(std::size_t n, double a, TypeCount start) {
  check_count(n, start);
  return expected_absorption_table(n, a)[start];
}

std::uint64_t simulate_type_chain(std::size_t n, double a, TypeCount start, Rng& rng) {
  check_count(n, start);
  std::uint64_t steps = 0;
  TypeCount s = start;
  while (!(s.k_a == n && s.k_b == n)) {
    const auto row = k_transitions(n, a, s);
    const double q = row.p_change();
    detail::ensure(q > 0.0, "simulate_type_chain: stuck state");
    // Holding time is geometric(q) on {1, 2, ...}.
    if (q >= 1.0) {
      steps += 1;
    } else {
      const double u = 1.0 - uniform01(rng);  // (0, 1]
      steps += 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-q)));
    }
    const double pick = uniform01(rng) * q;
    if (pick < row.p_b_up) {
      ++s.k_b;
    } else if (pick < row.p_b_up + row.p_a_up || row.p_move == 0.0) {
      ++s.k_a;
    } else {
      ++s.k_a;
      --s.k_b;
    }
  }
  return steps;
}

CountGrid<double> s_tilde_table(std::size_t n, double a, double c1) {
  check_a(a);
  check_c1(c1);
  detail::require(n >= 1, "n must be >= 1");
  const double b = 2.0 - a;
  CountGrid<double> S(n, 0.0);
  for (std::size_t total = 2 * n; total-- > 0;) {
    const std::size_t lo = total > n ? total - n : 0;
    const std::size_t hi = std::min(total, n);
    for (std::size_t k_a = hi + 1; k_a-- > lo;) {
      const std::size_t k_b = total - k_a;
      const double free_a = static_cast<double>(n - k_a);
      const double free_b = static_cast<double>(n - k_b);
      double num = 1.0;
      double den = 0.0;
      if (k_b < n) {
        num += b * free_b * S.at(k_a, k_b + 1);
        den += b * free_b;
      }
      if (k_a < n) {
        num += free_a * a * S.at(k_a + 1, k_b);
        den += free_a * a;
        if (k_b > 0) {
          num += free_a * (b - 1.0) * S.at(k_a + 1, k_b - 1);
          den += free_a * (b - 1.0);
        }
      }
      S.at(k_a, k_b) = num / den;
    }
  }
  return S;
}

double harmonic_number(std::size_t m) {
  double h = 0.0;
  for (std::size_t j = m; j >= 1; --j) h += 1.0 / static_cast<double>(j);
  return h;
}

ConjectureRow harmonic_conjecture_probe(std::size_t n, double c1, double a) {
  check_c1(c1);
  check_a(a);
  const double d_real = (1.0 - c1) * 2.0 * static_cast<double>(n);
  const double d_round = std::round(d_real);
  detail::require(std::abs(d_real - d_round) < 1e-9 && d_round >= 1.0,
                  "conjecture probe needs (1 - c1) 2n to be a positive integer (got " +
                      std::to_string(d_real) + ")");
  const auto d = static_cast<std::size_t>(d_round);
  const auto S = s_tilde_table(n, a, c1);

  ConjectureRow row{n, c1, a, 0.0, harmonic_number(d), 0.0};
  for (std::size_t free_a = 0; free_a <= d; ++free_a) {
    const std::size_t free_b = d - free_a;
    if (free_a > n || free_b > n) continue;
    const double w = std::exp(log_choose(static_cast<double>(d), static_cast<double>(free_a)) -
                              static_cast<double>(d) * std::numbers::ln2);
    row.weighted_sum += w * S.at(n - free_a, n - free_b);
  }
  row.ratio = row.weighted_sum / row.harmonic;
  return row;
}

double variance_bound(std::size_t deck_size, double a, double c1) {
  check_a(a);
  check_c1(c1);
  const auto N = static_cast<double>(deck_size);
  return std::numbers::pi * std::numbers::pi / 6.0 * N * N / (std::pow(a, 4) * c1 * c1);
}

double phase2_upper_bound(std::size_t deck_size, double a, double c1, double const_term) {
  check_a(a);
  check_c1(c1);
  detail::require(deck_size >= 3, "phase2_upper_bound needs 2n >= 3 for log log 2n");
  detail::require(const_term >= 0.0, "const_term must be >= 0");
  const auto N = static_cast<double>(deck_size);
  const double n = N / 2.0;
  return n / (a * (2.0 * c1 - 1.0)) * (std::log(N) + std::log(std::log(N)) + const_term);
}

std::size_t phase_two_threshold(std::size_t deck_size, double c1) {
  return static_cast<std::size_t>(std::ceil(c1 * static_cast<double>(deck_size) - 1e-9));
}

double expected_phase_one_time(const BiasProfile& profile, double c1) {
  check_c1(c1);
  const std::size_t N = profile.deck_size();
  const std::size_t k1 = phase_two_threshold(N, c1);
  double sum = 0.0;
  for (std::size_t k = 0; k < k1; ++k) {
    const double p = profile.a() * static_cast<double>(N - k) / static_cast<double>(N);
    sum += 1.0 / (p * p);
  }
  return sum;
}

double expected_full_marking_time(const BiasProfile& profile, double c1) {
  const std::size_t n = profile.n();
  const std::size_t N = profile.deck_size();
  const std::size_t k1 = phase_two_threshold(N, c1);
  double total = expected_phase_one_time(profile, c1);
  if (k1 >= N) return total;

  const auto E = expected_absorption_table(n, profile.a());
  const double log_all = log_choose(static_cast<double>(N), static_cast<double>(k1));
  for (std::size_t k_a = (k1 > n ? k1 - n : 0); k_a <= std::min(k1, n); ++k_a) {
    const std::size_t k_b = k1 - k_a;
    const double w = std::exp(log_choose(static_cast<double>(n), static_cast<double>(k_a)) +
                              log_choose(static_cast<double>(n), static_cast<double>(k_b)) -
                              log_all);
    total += w * E.at(k_a, k_b);
  }
  return total;
}

}  // namespace bts
