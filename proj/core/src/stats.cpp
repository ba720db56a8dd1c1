#include "bts/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "bts/errors.hpp"

namespace bts::stats {

double chi_square_survival(double x, double dof) {
  if (dof <= 0.0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

ChiSquare goodness_of_fit(std::span<const std::uint64_t> observed,
                          std::span<const double> expected_prob) {
  detail::require(observed.size() == expected_prob.size(),
                  "goodness_of_fit: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  ChiSquare r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_prob[i];
    if (e <= 0.0) {
      detail::require(observed[i] == 0, "goodness_of_fit: count in zero-probability cell");
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    r.statistic += d * d / e;
    ++used;
  }
  r.dof = used > 0 ? static_cast<double>(used - 1) : 0.0;
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

ChiSquare uniform_fit(std::span<const std::uint64_t> observed) {
  std::vector<double> p(observed.size(), 1.0 / static_cast<double>(observed.size()));
  return goodness_of_fit(observed, p);
}

ChiSquare homogeneity(std::span<const std::uint64_t> table, std::size_t rows,
                      std::size_t cols) {
  detail::require(table.size() == rows * cols, "homogeneity: bad table shape");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<double>(table[r * cols + c]);
      row_sum[r] += v;
      col_sum[c] += v;
      total += v;
    }
  const auto live_rows = std::count_if(row_sum.begin(), row_sum.end(), [](double v) { return v > 0; });
  const auto live_cols = std::count_if(col_sum.begin(), col_sum.end(), [](double v) { return v > 0; });
  ChiSquare out;
  if (live_rows < 2 || live_cols < 2) return out;
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_sum[r] == 0) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      if (col_sum[c] == 0) continue;
      const double e = row_sum[r] * col_sum[c] / total;
      const double d = static_cast<double>(table[r * cols + c]) - e;
      out.statistic += d * d / e;
    }
  }
  out.dof = static_cast<double>((live_rows - 1) * (live_cols - 1));
  out.p_value = chi_square_survival(out.statistic, out.dof);
  return out;
}

double binomial_stderr(double p, double n) {
  if (n <= 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

Moments moments(std::span<const double> xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / static_cast<double>(xs.size() - 1);
    m.stderr_mean = std::sqrt(m.variance / static_cast<double>(xs.size()));
  }
  return m;
}

double median(std::vector<double> xs) {
  detail::require(!xs.empty(), "median of empty sample");
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace bts::stats
