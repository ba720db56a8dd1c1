#include "bts/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bts/errors.hpp"
#include "bts/parallel.hpp"

namespace bts {

TransitionOperator::TransitionOperator(const BiasProfile& profile, unsigned deck_cap)
    : profile_(profile),
      index_([&] {
        const auto N = profile.deck_size();
        const unsigned cap = std::min(deck_cap, kExactDeckCap);
        if (N > cap)
          throw CapacityError("exact mode supports decks of at most " + std::to_string(cap) +
                              " cards (got N = " + std::to_string(N) + ")");
        return PermutationIndex(static_cast<unsigned>(N));
      }()),
      states_(index_.size()) {
  const auto N = static_cast<std::uint32_t>(profile_.deck_size());
  for (std::uint32_t i = 0; i < N; ++i) {
    identity_weight_ += profile_.hand_probability(i) * profile_.hand_probability(i);
    for (std::uint32_t j = i + 1; j < N; ++j) {
      pair_i_.push_back(i);
      pair_j_.push_back(j);
      weights_.push_back(2.0 * pair_probability(profile_, i, j));
    }
  }

  const std::size_t degree = weights_.size();
  neighbours_.resize(states_ * degree);
  Perm perm(N), pos(N);
  for (std::size_t s = 0; s < states_; ++s) {
    index_.unrank(s, perm);
    for (std::uint32_t p = 0; p < N; ++p) pos[perm[p]] = p;
    for (std::size_t tr = 0; tr < degree; ++tr) {
      const auto pi = pos[pair_i_[tr]];
      const auto pj = pos[pair_j_[tr]];
      std::swap(perm[pi], perm[pj]);
      neighbours_[s * degree + tr] = static_cast<std::uint32_t>(index_.rank(perm));
      std::swap(perm[pi], perm[pj]);
    }
  }
}

void TransitionOperator::apply(std::span<const double> in, std::span<double> out,
                               std::size_t workers) const {
  detail::require(in.size() == states_ && out.size() == states_,
                  "apply: distribution has wrong length");
  detail::require(in.data() != out.data(), "apply: input and output alias");
  const std::size_t degree = weights_.size();
  // The kernel is symmetric, so the mass arriving at s is a gather over the
  // same neighbour list that s would scatter to.
  parallel_blocks(states_, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t s = begin; s < end; ++s) {
      double acc = identity_weight_ * in[s];
      const std::uint32_t* nb = &neighbours_[s * degree];
      for (std::size_t tr = 0; tr < degree; ++tr) acc += weights_[tr] * in[nb[tr]];
      out[s] = acc;
    }
  });
}

std::vector<double> TransitionOperator::apply(std::span<const double> in,
                                              std::size_t workers) const {
  std::vector<double> out(states_);
  apply(in, out, workers);
  return out;
}

double TransitionOperator::flow(std::size_t from, std::size_t to) const {
  detail::require(from < states_ && to < states_, "flow: state out of range");
  if (from == to) return identity_weight_;
  const std::size_t degree = weights_.size();
  for (std::size_t tr = 0; tr < degree; ++tr)
    if (neighbours_[from * degree + tr] == to) return weights_[tr];
  return 0.0;
}

TransitionOperator build_operator(const BiasProfile& profile, unsigned deck_cap) {
  return TransitionOperator(profile, deck_cap);
}

std::vector<double> point_mass(std::size_t states, std::size_t at) {
  detail::require(at < states, "point_mass: state out of range");
  std::vector<double> d(states, 0.0);
  d[at] = 1.0;
  return d;
}

std::vector<double> uniform_distribution(std::size_t states) {
  return std::vector<double>(states, 1.0 / static_cast<double>(states));
}

std::vector<double> evolve(std::vector<double> dist, const TransitionOperator& op,
                           std::uint64_t steps, std::size_t workers) {
  std::vector<double> scratch(dist.size());
  for (std::uint64_t s = 0; s < steps; ++s) {
    op.apply(dist, scratch, workers);
    dist.swap(scratch);
  }
  return dist;
}

double tv_distance(std::span<const double> dist) {
  const double u = 1.0 / static_cast<double>(dist.size());
  double acc = 0.0;
  for (double p : dist) acc += std::abs(p - u);
  return 0.5 * acc;
}

double separation_distance(std::span<const double> dist) {
  const auto states = static_cast<double>(dist.size());
  double worst = 0.0;
  for (double p : dist) worst = std::max(worst, 1.0 - states * p);
  return std::clamp(worst, 0.0, 1.0);
}

namespace {

double distance(std::span<const double> d, Metric m) {
  return m == Metric::TotalVariation ? tv_distance(d) : separation_distance(d);
}

}  // namespace

std::uint64_t mixing_time(const TransitionOperator& op, double eps, Metric metric,
                          std::uint64_t max_steps, std::size_t workers) {
  detail::require(eps > 0.0, "mixing_time: eps must be > 0");
  auto dist = point_mass(op.state_count());
  std::vector<double> scratch(dist.size());
  for (std::uint64_t t = 0; t <= max_steps; ++t) {
    if (distance(dist, metric) <= eps) return t;
    op.apply(dist, scratch, workers);
    dist.swap(scratch);
  }
  throw InvariantViolation("mixing_time: distance still above eps after " +
                           std::to_string(max_steps) + " steps");
}

MixingTimes mixing_times(const TransitionOperator& op, double eps, std::uint64_t max_steps,
                         std::size_t workers) {
  detail::require(eps > 0.0, "mixing_times: eps must be > 0");
  auto dist = point_mass(op.state_count());
  std::vector<double> scratch(dist.size());
  bool tv_done = false;
  MixingTimes out;
  for (std::uint64_t t = 0; t <= max_steps; ++t) {
    if (!tv_done && tv_distance(dist) <= eps) {
      out.tv = t;
      tv_done = true;
    }
    if (separation_distance(dist) <= eps) {
      out.separation = t;
      if (!tv_done) out.tv = t;  // tv <= sep
      return out;
    }
    op.apply(dist, scratch, workers);
    dist.swap(scratch);
  }
  throw InvariantViolation("mixing_times: separation still above eps after " +
                           std::to_string(max_steps) + " steps");
}

DistanceCurve cutoff_profile(const TransitionOperator& op,
                             std::span<const std::uint64_t> t_list, std::size_t workers) {
  std::vector<std::size_t> order(t_list.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return t_list[x] < t_list[y]; });

  DistanceCurve curve(t_list.size());
  auto dist = point_mass(op.state_count());
  std::vector<double> scratch(dist.size());
  std::uint64_t now = 0;
  for (auto idx : order) {
    while (now < t_list[idx]) {
      op.apply(dist, scratch, workers);
      dist.swap(scratch);
      ++now;
    }
    curve[idx] = {now, tv_distance(dist), separation_distance(dist)};
  }
  return curve;
}

}  // namespace bts
