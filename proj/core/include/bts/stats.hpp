#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bts::stats {

struct ChiSquare {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Upper tail P(X >= x) of a chi-square variable with `dof` degrees of freedom.
double chi_square_survival(double x, double dof);

// Goodness of fit of `observed` against `expected_prob` (same length).
ChiSquare goodness_of_fit(std::span<const std::uint64_t> observed,
                          std::span<const double> expected_prob);

ChiSquare uniform_fit(std::span<const std::uint64_t> observed);

/// Pearson homogeneity test on a rows x cols contingency table stored row
/// major. Rows or columns with zero total are dropped.
ChiSquare homogeneity(std::span<const std::uint64_t> table, std::size_t rows,
                      std::size_t cols);

// Binomial standard error sqrt(p (1 - p) / n).
double binomial_stderr(double p, double n);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
  std::size_t count = 0;
};

Moments moments(std::span<const double> xs);
double median(std::vector<double> xs);

}  // namespace bts::stats
