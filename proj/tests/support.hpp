#pragma once
// Small generators shared by the unit and acceptance tests.

#include "coopcomp/prob.hpp"

#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = u(rng) < zero_prob ? 0.0 : e(rng);
    s += x;
  }
  if (s == 0.0) {
    v[0] = 1.0;
    s = 1.0;
  }
  for (auto& x : v) x /= s;
  return v;
}

inline coopcomp::JointPmf random_joint(std::mt19937_64& rng, const std::vector<std::size_t>& dims,
                                       double zero_prob = 0.0) {
  std::vector<coopcomp::Alphabet> axes;
  std::size_t n = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    axes.push_back(coopcomp::Alphabet::range(std::string(1, static_cast<char>('A' + i)), dims[i]));
    n *= dims[i];
  }
  return coopcomp::JointPmf(axes, random_simplex(rng, n, zero_prob));
}

inline coopcomp::Channel random_channel(std::mt19937_64& rng, std::vector<coopcomp::Alphabet> from,
                                        coopcomp::Alphabet to, double zero_prob = 0.0) {
  std::size_t rows = 1;
  for (const auto& a : from) rows *= a.size();
  std::vector<double> t;
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = random_simplex(rng, to.size(), zero_prob);
    t.insert(t.end(), row.begin(), row.end());
  }
  return coopcomp::Channel(std::move(from), std::move(to), std::move(t));
}

}  // namespace testsupport
