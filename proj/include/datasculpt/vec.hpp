#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace datasculpt::vec {

template <typename A, typename B>
double dot(std::span<const A> a, std::span<const B> b) noexcept {
  double s = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <typename A>
double norm(std::span<const A> a) noexcept {
  return std::sqrt(dot(a, a));
}

// Cosine similarity; 0 when either side is the zero vector.
template <typename A, typename B>
double cosine(std::span<const A> a, std::span<const B> b) noexcept {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

template <typename T>
std::span<const T> view(const std::vector<T>& v) noexcept {
  return {v.data(), v.size()};
}

}  // namespace datasculpt::vec
