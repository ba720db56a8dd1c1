#include "bts/permutation.hpp"

#include <numeric>
#include <string>

#include "bts/errors.hpp"

namespace bts {

Perm identity_perm(std::size_t size) {
  Perm p(size);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

bool is_bijection(std::span<const std::uint32_t> p) {
  std::vector<std::uint8_t> seen(p.size(), 0);
  for (auto v : p) {
    if (v >= p.size() || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

Perm compose(std::span<const std::uint32_t> f, std::span<const std::uint32_t> g) {
  detail::require(f.size() == g.size(), "compose: size mismatch");
  Perm out(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) out[x] = f[g[x]];
  return out;
}

Perm inverse(std::span<const std::uint32_t> p) {
  Perm out(p.size());
  for (std::size_t x = 0; x < p.size(); ++x) out[p[x]] = static_cast<std::uint32_t>(x);
  return out;
}

std::uint64_t factorial(unsigned n) {
  if (n > 20) throw CapacityError("factorial: " + std::to_string(n) + "! overflows 64 bits");
  std::uint64_t f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

PermutationIndex::PermutationIndex(unsigned degree)
    : degree_(degree), size_(factorial(degree)), place_value_(degree) {
  for (unsigned i = 0; i < degree; ++i) place_value_[i] = factorial(degree - 1 - i);
}

std::uint64_t PermutationIndex::rank(std::span<const std::uint32_t> p) const {
  detail::require(p.size() == degree_, "rank: wrong degree");
  std::uint64_t r = 0;
  std::uint32_t used = 0;  // bitmask of values already consumed
  for (unsigned i = 0; i < degree_; ++i) {
    const std::uint32_t below = (1u << p[i]) - 1u;
    const auto smaller_unused =
        static_cast<std::uint64_t>(__builtin_popcount(below & ~used));
    r += smaller_unused * place_value_[i];
    used |= 1u << p[i];
  }
  return r;
}

void PermutationIndex::unrank(std::uint64_t r, std::span<std::uint32_t> out) const {
  detail::require(out.size() == degree_ && r < size_, "unrank: out of range");
  std::uint32_t free_values = (degree_ == 32) ? ~0u : ((1u << degree_) - 1u);
  for (unsigned i = 0; i < degree_; ++i) {
    auto digit = r / place_value_[i];
    r %= place_value_[i];
    std::uint32_t v = free_values;
    for (std::uint64_t skip = 0; skip < digit; ++skip) v &= v - 1;  // drop lowest
    const auto value = static_cast<std::uint32_t>(__builtin_ctz(v));
    out[i] = value;
    free_values &= ~(1u << value);
  }
}

Perm PermutationIndex::unrank(std::uint64_t r) const {
  Perm out(degree_);
  unrank(r, out);
  return out;
}

}  // namespace bts
