#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace zksip {

// Indices of the t largest values, ties broken toward the smaller index,
// returned in increasing index order. t larger than the input keeps all.
template <class T>
std::vector<std::size_t> top_t_capture(std::span<const T> values, std::size_t t) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  t = std::min(t, values.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (values[a] > values[b]) return true;
    if (values[b] > values[a]) return false;
    return a < b;
  };
  if (t < idx.size()) std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t), idx.end(), better);
  idx.resize(t);
  std::sort(idx.begin(), idx.end());
  return idx;
}

template <class T>
std::vector<std::size_t> top_t_capture(const std::vector<T>& values, std::size_t t) {
  return top_t_capture(std::span<const T>(values), t);
}

}  // namespace zksip
