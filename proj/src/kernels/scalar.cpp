#include "coopcomp/kernels.hpp"

#include <cmath>
#include <limits>

namespace coopcomp::kernels::scalar {

double entropy_bits(std::span<const double> p) noexcept {
  double acc = 0.0;
  for (double v : p) {
    if (v > 0.0) acc -= v * std::log2(v);
  }
  return acc;
}

double cross_entropy_bits(std::span<const double> p, std::span<const double> q) noexcept {
  double acc = 0.0;
  const std::size_t n = p.size() < q.size() ? p.size() : q.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) acc -= p[i] * std::log2(q[i]);
  }
  return acc;
}

void log2_array(std::span<const double> in, std::span<double> out) noexcept {
  const std::size_t n = in.size() < out.size() ? in.size() : out.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = in[i] > 0.0 ? std::log2(in[i]) : -std::numeric_limits<double>::infinity();
  }
}

double dot(std::span<const double> p, std::span<const double> q) noexcept {
  double acc = 0.0;
  const std::size_t n = p.size() < q.size() ? p.size() : q.size();
  for (std::size_t i = 0; i < n; ++i) acc += p[i] * q[i];
  return acc;
}

}  // namespace coopcomp::kernels::scalar
