#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "cpm/tables.hpp"

namespace cpm::detail {

/// Row-major strides of `scope` laid out with `cards`.
inline std::vector<std::size_t> row_major_strides(std::span<const std::size_t> cards) {
  std::vector<std::size_t> strides(cards.size());
  std::size_t s = 1;
  for (std::size_t i = cards.size(); i-- > 0;) {
    strides[i] = s;
    s *= cards[i];
  }
  return strides;
}

/// Strides of an operand with layout (scope, cards) projected onto the
/// dimensions of `target`; dimensions the operand lacks get stride 0.
inline std::vector<std::size_t> aligned_strides(const Scope& target, const Scope& scope,
                                                std::span<const std::size_t> cards) {
  auto own = row_major_strides(cards);
  std::vector<std::size_t> out(target.size(), 0);
  for (std::size_t d = 0; d < target.size(); ++d) {
    if (auto pos = scope.position(target[d])) out[d] = own[*pos];
  }
  return out;
}

/// Walks every configuration of a layout with `cards` in row-major order,
/// keeping N operand offsets in step. Calls f(linear_index, offsets).
template <std::size_t N, class F>
void for_each_aligned(std::span<const std::size_t> cards,
                      const std::array<std::vector<std::size_t>, N>& strides, F&& f) {
  const std::size_t dims = cards.size();
  std::size_t total = 1;
  for (auto c : cards) total *= c;
  if (total == 0) return;

  std::vector<std::size_t> counter(dims, 0);
  std::array<std::size_t, N> offs{};
  for (std::size_t i = 0; i < total; ++i) {
    f(i, offs);
    for (std::size_t d = dims; d-- > 0;) {
      if (++counter[d] < cards[d]) {
        for (std::size_t k = 0; k < N; ++k) offs[k] += strides[k][d];
        break;
      }
      counter[d] = 0;
      for (std::size_t k = 0; k < N; ++k) offs[k] -= strides[k][d] * (cards[d] - 1);
    }
  }
}

}  // namespace cpm::detail
