#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bts {

// Cards and positions are 0-based internally; card c is printed as c + 1.
using Card = std::uint32_t;
using Position = std::uint32_t;
using Perm = std::vector<std::uint32_t>;

Perm identity_perm(std::size_t size);
bool is_bijection(std::span<const std::uint32_t> p);

// (f ∘ g)(x) = f(g(x)).
Perm compose(std::span<const std::uint32_t> f, std::span<const std::uint32_t> g);
Perm inverse(std::span<const std::uint32_t> p);

// n! for n <= 20; throws CapacityError beyond.
std::uint64_t factorial(unsigned n);

/// Bijection S_N <-> {0, ..., N! - 1} through the Lehmer code. The identity
/// has rank 0. Ranks are lexicographic in the one-line notation.
class PermutationIndex {
 public:
  explicit PermutationIndex(unsigned degree);

  unsigned degree() const noexcept { return degree_; }
  std::uint64_t size() const noexcept { return size_; }

  std::uint64_t rank(std::span<const std::uint32_t> p) const;
  void unrank(std::uint64_t r, std::span<std::uint32_t> out) const;
  Perm unrank(std::uint64_t r) const;

 private:
  unsigned degree_;
  std::uint64_t size_;
  std::vector<std::uint64_t> place_value_;  // (N-1-i)!
};

}  // namespace bts
