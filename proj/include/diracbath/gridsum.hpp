// gridsum.hpp: deterministic compensated reductions over the N x N momentum grid
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace diracbath::gridsum {

// Neumaier compensated accumulator.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + carry; }
};

template <std::size_t M>
using Terms = std::array<double, M>;

template <std::size_t M>
struct RowAccumulator {
  std::array<Compensated, M> acc{};
  void add(const Terms<M>& t) noexcept {
    for (std::size_t j = 0; j < M; ++j) acc[j].add(t[j]);
  }
  Terms<M> value() const noexcept {
    Terms<M> out{};
    for (std::size_t j = 0; j < M; ++j) out[j] = acc[j].value();
    return out;
  }
};

// Pairwise tree reduction; fixed order for a given length.
template <std::size_t M>
Terms<M> pairwise(const std::vector<Terms<M>>& rows, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return rows[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Terms<M> a = pairwise(rows, lo, mid), b = pairwise(rows, mid, hi);
  for (std::size_t j = 0; j < M; ++j) a[j] += b[j];
  return a;
}

// row(i1, acc) accumulates every term of row i1 into acc.
template <std::size_t M, class Row>
Terms<M> reduce(int N, Row&& row) {
  std::vector<Terms<M>> rows(N);
  for (int i1 = 0; i1 < N; ++i1) {
    RowAccumulator<M> acc;
    row(i1, acc);
    rows[i1] = acc.value();
  }
  return pairwise(rows, 0, rows.size());
}

}  // namespace diracbath::gridsum
