#pragma once
// Typical sequences and a finite-blocklength Monte Carlo of the two-phase
// random-binning scheme.
//
// Codebooks of size 2^{nI} cannot be stored at useful n, so only the T
// codebook is materialized. Every other codebook is represented implicitly:
// a codeword drawn i.i.d. from p(.|t) is jointly typical with a fixed context
// sequence with a probability that factors over context symbols into
// multinomial box probabilities, computed exactly by dynamic programming.
// Selected codewords are then sampled conditionally on typicality, and
// bin collisions are binomial counts.

#include "coopcomp/regions.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace coopcomp {

using Sequence = std::vector<std::uint16_t>;

struct TypicalityConfig {
  double epsilon = 0.1;
  std::size_t n = 100;
};

/// |pi(a) - p(a)| <= eps * p(a) for every cell a of `joint`, where pi is the
/// empirical type of the tuple sequence. `seqs[k]` runs over joint axis k.
/// Throws ValidationError on a length mismatch or an out-of-range symbol.
bool is_jointly_typical(const std::vector<Sequence>& seqs, const JointPmf& joint, double eps);

struct TypicalityRow {
  std::size_t n = 0;
  double p_typical = 0.0;
  /// Fraction of typical draws whose probability lies in
  /// [2^{-nH(1+eps)}, 2^{-nH(1-eps)}]. NaN when no draw was typical.
  double logprob_in_interval = 0.0;
  /// Covering success for R above and below I(X;Xhat); NaN unless the joint
  /// has exactly two axes (X first, Xhat second).
  double cover_above = 0.0;
  double cover_below = 0.0;
};

struct TypicalityEmpirics {
  double entropy_bits = 0.0;
  double mutual_info_bits = 0.0;  // two-axis joints only
  double rate_above = 0.0;        // I + 0.2
  double rate_below = 0.0;        // max(I - 0.2, 0.01)
  std::vector<TypicalityRow> rows;
};

TypicalityEmpirics typicality_empirics(const JointPmf& joint, const std::vector<std::size_t>& ns, double eps,
                                       std::size_t trials, std::uint64_t seed);

/// log2 probability that X^hat^n, i.i.d. from the second axis' marginal, is
/// jointly typical with the given first-axis sequence. Exposed for tests.
double log2_cover_probability(const JointPmf& joint2, const Sequence& x, double eps);

struct SimulationConfig {
  std::size_t n = 100;
  std::size_t trials = 500;
  double eps_cover = 0.05;  // eps'' : phase-1 covering at transmitter X
  double eps_mid = 0.10;    // eps'  : phase-1 decoding and phase-2 covering
  double eps_dec = 0.15;    // eps   : final decoding
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t memory_cap_bytes = std::size_t{2} << 30;
};

/// Codebook and bin sizes as log2 counts.
struct CodebookExponents {
  double t = 0, u = 0, v = 0, w = 0;  // n * I(.)
  double b0 = 0, bx = 0, by = 0;      // n * R
};

struct SimulationResult {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t err_total = 0;
  std::size_t err_phase1_cover = 0;
  std::size_t err_phase1_bin = 0;
  std::size_t err_phase2_cover = 0;
  std::size_t err_phase2_bin = 0;
  std::size_t err_fundef = 0;
  bool validated = false;
  std::string validation_note;
  RateTuple bounds;
  /// min over the four bounds of (rate - bound); negative means outside.
  double margin = 0.0;
  CodebookExponents exponents;

  double error_rate() const { return trials ? static_cast<double>(err_total) / static_cast<double>(trials) : 0.0; }
  static std::string csv_header();
  std::string csv_row() const;
};

/// `rates.r0/rx/ry` are the binning rates; rates.sum is ignored (the scheme's
/// sum is rx + ry). Throws ValidationError when the stored T codebook would
/// exceed the memory cap or a codebook exponent is too large to represent.
SimulationResult simulate_two_phase_scheme(const AuxiliarySystem& sys, const FunctionSpec& f, const RateTuple& rates,
                                           const SimulationConfig& cfg);

}  // namespace coopcomp
